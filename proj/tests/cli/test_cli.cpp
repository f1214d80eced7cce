#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = HYPCUSP_TEST_TMP;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = kTmp / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the CLI with stdout and stderr captured next to the outputs.
int run(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string("\"") + HYPCUSP_CLI_PATH + "\" " + args + " > \"" +
                          (dir / "stdout.txt").string() + "\" 2> \"" + (dir / "stderr.txt").string() +
                          "\"";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::string out_flag(const fs::path& dir) { return " --out \"" + dir.string() + "\""; }

}  // namespace

TEST_CASE("profile fits the decay rate and is deterministic") {
  const auto a = fresh_dir("profile_a"), b = fresh_dir("profile_b");
  REQUIRE(run("profile --k 0.75 --dt 1e-3" + out_flag(a), a) == 0);
  REQUIRE(run("profile --k 0.75 --dt 1e-3" + out_flag(b), b) == 0);
  const auto j = read_json(a / "profile_fit.json");
  CHECK(j.size() == 4);
  CHECK(j["k"] == 0.75);
  CHECK(j["lambda_expected"] == 0.5);
  CHECK(std::abs(j["lambda_fitted"].get<double>() - 0.5) < 0.01);
  CHECK(j["residual"].get<double>() >= 0.0);
  CHECK(slurp(a / "profile.csv").rfind("t,f,fp\n", 0) == 0);
  CHECK(slurp(a / "profile.csv") == slurp(b / "profile.csv"));
  CHECK(slurp(a / "profile_fit.json") == slurp(b / "profile_fit.json"));
}

TEST_CASE("usage errors exit with code 2") {
  const auto d = fresh_dir("usage");
  CHECK(run("profile --k 1.5" + out_flag(d), d) == 2);
  CHECK(slurp(d / "stderr.txt").find("k must lie in (0, 1)") != std::string::npos);
  CHECK(run("profile --k 0" + out_flag(d), d) == 2);
  CHECK(run("profile --dt -1" + out_flag(d), d) == 2);
  CHECK(run("profile --eps 0.5" + out_flag(d), d) == 2);
  CHECK(run("verify --resolution 100" + out_flag(d), d) == 2);
  CHECK(run("verify --tolerance 0" + out_flag(d), d) == 2);
  CHECK(run("volume --primitive C" + out_flag(d), d) == 2);
  CHECK(run("volume --index 0" + out_flag(d), d) == 2);
  CHECK(run("profile --no-such-flag", d) == 2);
  CHECK(run("frobnicate", d) == 2);
  CHECK(run("", d) == 2);
  CHECK(run("--help", d) == 0);
  CHECK(run("profile --config \"" + (d / "missing.cfg").string() + "\"", d) == 2);
}

TEST_CASE("config file precedence: flags over file over defaults") {
  const auto d = fresh_dir("config");
  {
    std::ofstream cfg(d / "run.cfg");
    cfg << "# profile settings\nk = 0.5\n\nhorizon = 25\n";
  }
  const std::string cfg = " --config \"" + (d / "run.cfg").string() + "\"";
  REQUIRE(run("profile" + cfg + out_flag(d), d) == 0);
  CHECK(read_json(d / "profile_fit.json")["k"] == 0.5);
  CHECK(read_json(d / "profile_fit.json")["lambda_expected"].get<double>() ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  REQUIRE(run("profile --k 0.75" + cfg + out_flag(d), d) == 0);
  CHECK(read_json(d / "profile_fit.json")["k"] == 0.75);
  // t_end of the CSV reflects the horizon from the file.
  const std::string csv = slurp(d / "profile.csv");
  const auto last_line = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
  CHECK(std::stod(last_line.substr(0, last_line.find(','))) == doctest::Approx(25.0));

  {
    std::ofstream bad(d / "bad.cfg");
    bad << "k = 0.5\ncolour = blue\n";
  }
  CHECK(run("profile --config \"" + (d / "bad.cfg").string() + "\"" + out_flag(d), d) == 2);
}

TEST_CASE("verify writes a seven-entry ledger") {
  const auto d = fresh_dir("verify");
  REQUIRE(run("verify" + out_flag(d), d) == 0);
  const auto j = read_json(d / "verify.json");
  CHECK(j["all_pass"] == true);
  REQUIRE(j["entries"].size() == 7);
  for (const auto& e : j["entries"]) CHECK(e["pass"] == true);
  const std::string out = slurp(d / "stdout.txt");
  CHECK(out.find("FAIL") == std::string::npos);

  const auto a = fresh_dir("verify_tight_a"), b = fresh_dir("verify_tight_b");
  CHECK(run("verify --tolerance 1e-15 --resolution 128" + out_flag(a), a) == 1);
  CHECK(run("verify --tolerance 1e-15 --resolution 128" + out_flag(b), b) == 1);
  const auto tight = read_json(a / "verify.json");
  CHECK(tight["all_pass"] == false);
  CHECK(tight["entries"].size() == 7);
  for (const auto& e : tight["entries"]) {
    if (e["pass"] == false) CHECK(e["residual"].get<double>() > 1e-15);
  }
  CHECK(slurp(a / "verify.json") == slurp(b / "verify.json"));
}

TEST_CASE("winding and stokes subcommands") {
  const auto d = fresh_dir("winding");
  REQUIRE(run("winding --curve limacon --point 0.5,0 --point 2,0 --point -2,0" + out_flag(d), d) == 0);
  const auto j = read_json(d / "winding.json");
  CHECK(j["curve"] == "limacon");
  CHECK(j["turning_index"] == 2);
  REQUIRE(j["simple_loops"].size() == 2);
  for (const auto& l : j["simple_loops"]) CHECK(l["turning_index"] == 1);
  REQUIRE(j["points"].size() == 3);
  CHECK(j["points"][0]["winding"] == 2);
  CHECK(j["points"][1]["winding"] == 1);
  CHECK(j["points"][2]["winding"] == 0);
  CHECK(slurp(d / "loop.csv").rfind("s,x,y\n", 0) == 0);

  // The written loop reads back through --curve csv.
  const auto e = fresh_dir("winding_csv");
  REQUIRE(run("winding --curve csv --input \"" + (d / "loop.csv").string() + "\"" + out_flag(e), e) == 0);
  CHECK(read_json(e / "winding.json")["turning_index"] == 2);
  CHECK(run("winding --curve epicycle --epicycle 1,2,0.1,5" + out_flag(e), e) == 0);
  CHECK(read_json(e / "winding.json")["convex"] == true);
  CHECK(run("winding --curve csv" + out_flag(e), e) == 2);

  const auto s = fresh_dir("stokes");
  REQUIRE(run("stokes --curve limacon --tolerance 1e-2" + out_flag(s), s) == 0);
  const auto r = read_json(s / "stokes.json");
  CHECK(r["residual"].get<double>() < 1e-2);
  CHECK(r["resolution"] == 512);
  CHECK(run("stokes --curve circle --form random --seed 3" + out_flag(s), s) == 0);
  CHECK(run("stokes --curve circle --form random --tolerance 1e-15" + out_flag(s), s) == 1);
}

TEST_CASE("volume converges for a two-fold cusp and flags a short horizon") {
  const auto d = fresh_dir("volume");
  REQUIRE(run("volume --k 0.75 --index 2" + out_flag(d), d) == 0);
  const auto conv = read_json(d / "convergence.json");
  CHECK(conv.size() == 9);
  CHECK(std::isfinite(conv["extrapolated_limit"].get<double>()));
  CHECK(conv["tail_fraction"].get<double>() < 0.01);
  const auto prim = read_json(d / "primitive_check.json");
  CHECK(prim["agree"] == true);
  CHECK(prim["relative_difference"].get<double>() < 1e-3);
  const std::string csv = slurp(d / "volume.csv");
  CHECK(csv.rfind("t,Area,Vol,V\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);

  const auto s = fresh_dir("volume_short");
  CHECK(run("volume --k 0.75 --index 2 --horizon 1" + out_flag(s), s) == 1);
  CHECK(slurp(s / "stderr.txt").find("tail fraction") != std::string::npos);
  CHECK(read_json(s / "convergence.json")["tail_fraction"].get<double>() >= 0.01);

  // A horizon past the reach of the default seed lowers the seed value.
  const auto far = fresh_dir("volume_far");
  CHECK(run("volume --k 0.5 --horizon 30" + out_flag(far), far) == 0);
  CHECK(slurp(far / "stderr.txt").find("seed value lowered") != std::string::npos);
  CHECK(read_json(far / "convergence.json")["tail_fraction"].get<double>() < 0.01);
}
