// hypcusp command-line driver.
//
// Exit codes: 0 success, 1 verification or convergence failure, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hypcusp/hypcusp.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a library call fails; carries the exit code to use.
struct RunError : std::runtime_error {
  RunError(const std::string& what, int code) : std::runtime_error(what), code(code) {}
  int code;
};

void check(hc_status s, const char* what) {
  if (s == HC_OK) return;
  const std::string msg = std::string(what) + ": " + hc_status_name(s) + ": " + hc_last_error();
  throw RunError(msg, s == HC_ERR_INVALID_ARGUMENT ? kExitUsage : kExitFailure);
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ProfilePtr = std::unique_ptr<hc_profile, Deleter<hc_profile, hc_profile_free>>;
using LoopPtr = std::unique_ptr<hc_loop, Deleter<hc_loop, hc_loop_free>>;
using FamilyPtr = std::unique_ptr<hc_family, Deleter<hc_family, hc_family_free>>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  hc_string_free(s);
  return out;
}

// Flags override the config file, which overrides these defaults.
struct RunConfig {
  double k = 0.75;
  double dt = 1e-3;
  double eps = 1e-6;
  double horizon = 20.0;
  int resolution = 512;
  std::optional<double> tolerance;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string primitive = "A";
  int index = 1;
};

struct Flags {
  double k, dt, eps, horizon, tolerance;
  int resolution, index;
  std::uint64_t seed;
  std::string out, primitive, config;
  std::vector<CLI::Option*> options;
};

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw UsageError("config: " + key + " is not a number: " + v);
  return d;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long i = 0;
  try {
    i = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw UsageError("config: " + key + " is not an integer: " + v);
  return i;
}

void add_common(CLI::App* cmd, Flags& f) {
  f.options = {
      cmd->add_option("--k", f.k, "constant curvature k in (0, 1) [0.75]"),
      cmd->add_option("--dt", f.dt, "integration step [1e-3]"),
      cmd->add_option("--eps", f.eps, "profile seed value [1e-6]"),
      cmd->add_option("--horizon", f.horizon, "largest t [20]"),
      cmd->add_option("--resolution", f.resolution, "grid cells per axis, a power of two [512]"),
      cmd->add_option("--tolerance", f.tolerance, "pass/fail tolerance"),
      cmd->add_option("--seed", f.seed, "random seed [1]"),
      cmd->add_option("--out", f.out, "output directory [.]"),
      cmd->add_option("--primitive", f.primitive, "volume primitive, A or B [A]"),
      cmd->add_option("--index", f.index, "cusp index n >= 1 [1]"),
      cmd->add_option("--config", f.config, "flat key = value file of the options above"),
  };
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  auto given = [&](const char* name) {
    for (auto* o : f.options) {
      if (o->get_name() == name) return o->count() > 0;
    }
    return false;
  };
  if (given("--config")) {
    for (const auto& [key, value] : read_config(f.config)) {
      if (key == "k") c.k = parse_double(key, value);
      else if (key == "dt") c.dt = parse_double(key, value);
      else if (key == "eps") c.eps = parse_double(key, value);
      else if (key == "horizon") c.horizon = parse_double(key, value);
      else if (key == "resolution") c.resolution = static_cast<int>(parse_int(key, value));
      else if (key == "tolerance") c.tolerance = parse_double(key, value);
      else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
      else if (key == "out") c.out = value;
      else if (key == "primitive") c.primitive = value;
      else if (key == "index") c.index = static_cast<int>(parse_int(key, value));
      else throw UsageError("config: unknown key '" + key + "'");
    }
  }
  if (given("--k")) c.k = f.k;
  if (given("--dt")) c.dt = f.dt;
  if (given("--eps")) c.eps = f.eps;
  if (given("--horizon")) c.horizon = f.horizon;
  if (given("--resolution")) c.resolution = f.resolution;
  if (given("--tolerance")) c.tolerance = f.tolerance;
  if (given("--seed")) c.seed = f.seed;
  if (given("--out")) c.out = f.out;
  if (given("--primitive")) c.primitive = f.primitive;
  if (given("--index")) c.index = f.index;

  if (!(c.k > 0.0 && c.k < 1.0)) throw UsageError("k must lie in (0, 1), got " + fmt17(c.k));
  if (!(c.dt > 0.0)) throw UsageError("dt must be positive");
  if (!(c.eps > 0.0 && c.eps < 0.1)) throw UsageError("eps must lie in (0, 0.1)");
  if (!(c.horizon > 0.0)) throw UsageError("horizon must be positive");
  if (c.resolution < 16 || (c.resolution & (c.resolution - 1)) != 0) {
    throw UsageError("resolution must be a power of two >= 16, got " + std::to_string(c.resolution));
  }
  if (c.tolerance && !(*c.tolerance > 0.0)) throw UsageError("tolerance must be positive");
  if (c.primitive != "A" && c.primitive != "B") throw UsageError("primitive must be A or B");
  if (c.index < 1) throw UsageError("index must be >= 1");
  return c;
}

std::filesystem::path output_dir(const RunConfig& c) {
  std::filesystem::path dir(c.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RunError("cannot create output directory " + c.out + ": " + ec.message(), kExitFailure);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw RunError("cannot write " + path.string(), kExitFailure);
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// ---- profile ----

int cmd_profile(const RunConfig& c) {
  hc_profile* raw = nullptr;
  check(hc_integrate_backward(c.eps, c.horizon, c.k, c.dt, 1, &raw), "integrate_backward");
  ProfilePtr p(raw);
  if (const std::string diag = hc_profile_diagnostic(p.get()); !diag.empty()) {
    std::cerr << "warning: " << diag << "\n";
  }
  double start = 0.0, end = 0.0;
  check(hc_default_fit_window(p.get(), &start, &end), "fit window");
  hc_fit fit{};
  check(hc_decay_fit(p.get(), start, end, &fit), "decay_fit");

  const auto dir = output_dir(c);
  check(hc_profile_write_csv(p.get(), (dir / "profile.csv").string().c_str()), "write profile");
  const double lambda = std::sqrt(1.0 - c.k);
  const nlohmann::json report = {{"k", c.k},
                                 {"lambda_expected", lambda},
                                 {"lambda_fitted", fit.rate},
                                 {"residual", fit.residual}};
  write_file(dir / "profile_fit.json", dump(report));
  std::cout << "lambda_expected " << fmt17(lambda) << "\nlambda_fitted " << fmt17(fit.rate)
            << "\nresidual " << fmt17(fit.residual) << "\n";
  return 0;
}

// ---- verify ----

int cmd_verify(const RunConfig& c) {
  char* json = nullptr;
  int all_pass = 0;
  check(hc_verify_ledger_json(c.tolerance.value_or(0.0), c.seed, c.resolution, &json, &all_pass),
        "verify");
  const std::string text = take_string(json);
  const auto dir = output_dir(c);
  write_file(dir / "verify.json", text + "\n");
  const auto ledger = nlohmann::json::parse(text);
  for (const auto& e : ledger.at("entries")) {
    std::cout << (e.at("pass").get<bool>() ? "PASS " : "FAIL ") << e.at("name").get<std::string>()
              << " residual=" << fmt17(e.at("residual").get<double>())
              << " tolerance=" << fmt17(e.at("tolerance").get<double>()) << "\n";
  }
  return all_pass ? 0 : kExitFailure;
}

// ---- curves ----

struct CurveArgs {
  std::string curve = "limacon";
  std::string input;
  std::size_t samples = 4096;
  std::vector<double> epicycle;  // a, n, b, m
};

void add_curve_options(CLI::App* cmd, CurveArgs& a) {
  cmd->add_option("--curve", a.curve, "circle, limacon, figure_eight, epicycle or csv [limacon]");
  cmd->add_option("--input", a.input, "loop CSV (s,x,y) for --curve csv");
  cmd->add_option("--samples", a.samples, "samples for builtin curves [4096]");
  cmd->add_option("--epicycle", a.epicycle, "a n b m for a e^{ins} + b e^{ims}")->expected(4)->delimiter(',');
}

LoopPtr make_loop(const CurveArgs& a) {
  hc_loop* raw = nullptr;
  if (a.curve == "csv") {
    if (a.input.empty()) throw UsageError("--curve csv needs --input");
    check(hc_loop_read_csv(a.input.c_str(), &raw), "read loop");
  } else if (a.curve == "epicycle") {
    if (a.epicycle.size() != 4) throw UsageError("--curve epicycle needs --epicycle a,n,b,m");
    check(hc_loop_epicycle(a.epicycle[0], static_cast<int>(a.epicycle[1]), a.epicycle[2],
                           static_cast<int>(a.epicycle[3]), a.samples, &raw),
          "epicycle");
  } else if (a.curve == "circle" || a.curve == "limacon" || a.curve == "figure_eight") {
    check(hc_loop_builtin(a.curve.c_str(), a.samples, &raw), "builtin curve");
  } else {
    throw UsageError("unknown curve '" + a.curve + "'");
  }
  return LoopPtr(raw);
}

int cmd_winding(const RunConfig& c, const CurveArgs& a, const std::vector<double>& points) {
  if (points.size() % 2 != 0) throw UsageError("--point takes x,y pairs");
  const LoopPtr loop = make_loop(a);
  int index = 0, convex = 0;
  check(hc_turning_index(loop.get(), &index), "turning_index");
  check(hc_is_convex(loop.get(), &convex), "is_convex");

  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i + 1 < points.size(); i += 2) {
    int w = 0;
    check(hc_winding_number(loop.get(), points[i], points[i + 1], &w), "winding_number");
    pts.push_back({{"x", points[i]}, {"y", points[i + 1]}, {"winding", w}});
  }

  nlohmann::json loops = nlohmann::json::array();
  hc_loop** pieces = nullptr;
  std::size_t count = 0;
  const hc_status s = hc_decompose_simple_loops(loop.get(), &pieces, &count);
  if (s == HC_OK) {
    for (std::size_t i = 0; i < count; ++i) {
      int turn = 0;
      const hc_status ts = hc_turning_index(pieces[i], &turn);
      loops.push_back({{"vertices", hc_loop_size(pieces[i])}, {"turning_index", ts == HC_OK ? turn : 0}});
    }
    hc_loop_array_free(pieces, count);
  } else {
    std::cerr << "warning: decomposition failed: " << hc_last_error() << "\n";
  }

  const auto dir = output_dir(c);
  check(hc_loop_write_csv(loop.get(), (dir / "loop.csv").string().c_str()), "write loop");
  const nlohmann::json report = {{"curve", a.curve},     {"samples", hc_loop_size(loop.get())},
                                 {"turning_index", index}, {"convex", convex != 0},
                                 {"points", pts},        {"simple_loops", loops}};
  write_file(dir / "winding.json", dump(report));
  std::cout << "turning_index " << index << "\nconvex " << (convex ? "true" : "false") << "\n";
  for (const auto& p : pts) {
    std::cout << "winding " << fmt17(p["x"].get<double>()) << " " << fmt17(p["y"].get<double>()) << " "
              << p["winding"].get<int>() << "\n";
  }
  return 0;
}

int cmd_stokes(const RunConfig& c, const CurveArgs& a, const std::string& form) {
  const LoopPtr loop = make_loop(a);
  hc_stokes_report r{};
  if (form == "x_dy") {
    const double p[3] = {0.0, 0.0, 0.0};
    const double q[3] = {0.0, 1.0, 0.0};
    check(hc_stokes_polynomial(loop.get(), p, q, 1, c.resolution, &r), "stokes");
  } else if (form == "random") {
    // Cubic coefficients in [-1, 1] from the seed.
    std::mt19937_64 rng(c.seed);
    auto draw = [&] { return -1.0 + 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<double> p(10), q(10);
    for (double& v : p) v = draw();
    for (double& v : q) v = draw();
    check(hc_stokes_polynomial(loop.get(), p.data(), q.data(), 3, c.resolution, &r), "stokes");
  } else {
    throw UsageError("unknown form '" + form + "' (x_dy, random)");
  }
  char* json = nullptr;
  check(hc_stokes_report_json(&r, &json), "report");
  const auto dir = output_dir(c);
  write_file(dir / "stokes.json", take_string(json) + "\n");
  const double tol = c.tolerance.value_or(1e-3);
  std::cout << "lhs " << fmt17(r.lhs) << "\nrhs " << fmt17(r.rhs) << "\nresidual " << fmt17(r.residual)
            << "\n";
  return r.residual <= tol ? 0 : kExitFailure;
}

// ---- volume ----

int cmd_volume(const RunConfig& c, std::size_t steps) {
  const double lambda = std::sqrt(1.0 - c.k);
  // The profile starts near f = 0.5 at t = 0 and extends past the horizon;
  // the seed value is lowered when --eps alone would not reach that far.
  const double reach = c.horizon + 2.0;
  const double eps = std::min(c.eps, 0.5 * std::exp(-lambda * reach));
  if (eps < c.eps) std::cerr << "note: seed value lowered to " << fmt17(eps) << " to cover the horizon\n";
  const double seed_time = std::log(0.5 / eps) / lambda;
  hc_profile* raw = nullptr;
  check(hc_integrate_backward(eps, seed_time, c.k, c.dt, 1, &raw), "integrate_backward");
  ProfilePtr p(raw);
  const double T = hc_profile_t0(p.get());
  if (!(c.horizon > T)) {
    throw RunError("horizon " + fmt17(c.horizon) + " is not beyond the profile start " + fmt17(T),
                   kExitUsage);
  }

  hc_family* fraw = nullptr;
  const std::string id = "revolution-k" + fmt17(c.k) + "-n" + std::to_string(c.index);
  check(hc_family_from_profile(id.c_str(), p.get(), c.index, lambda, &fraw), "family");
  FamilyPtr family(fraw);

  hc_quadrature q;
  hc_quadrature_defaults(&q);
  q.resolution = c.resolution;

  const hc_primitive chosen = c.primitive == "A" ? HC_PRIMITIVE_A : HC_PRIMITIVE_B;
  const hc_primitive other = chosen == HC_PRIMITIVE_A ? HC_PRIMITIVE_B : HC_PRIMITIVE_A;
  char* json = nullptr;
  int converged = 0;
  check(hc_convergence_report_json(family.get(), chosen, T, c.horizon, steps, &q, &json, &converged),
        "convergence");
  const std::string report_text = take_string(json);
  const auto report = nlohmann::json::parse(report_text);
  check(hc_convergence_report_json(family.get(), other, T, c.horizon, steps, &q, &json, nullptr),
        "convergence");
  const auto other_report = nlohmann::json::parse(take_string(json));

  const double limit = report.at("extrapolated_limit").get<double>();
  const double other_limit = other_report.at("extrapolated_limit").get<double>();
  const double gap = std::abs(limit - other_limit) / std::max(1.0, std::abs(limit));
  const double tol = c.tolerance.value_or(1e-3);
  const bool agree = gap <= tol;

  std::ostringstream csv;
  csv << "t,Area,Vol,V\n";
  const auto& ts = report.at("t_ladder");
  const auto& vs = report.at("V_values");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i].get<double>();
    double area = 0.0, vol = 0.0;
    check(hc_area_tail(p.get(), t, &area), "area_tail");
    check(hc_volume_tail(p.get(), t, &vol), "volume_tail");
    csv << fmt17(t) << ',' << fmt17(c.index * area) << ',' << fmt17(c.index * vol) << ','
        << fmt17(vs[i].get<double>()) << '\n';
  }

  const auto dir = output_dir(c);
  write_file(dir / "volume.csv", csv.str());
  write_file(dir / "convergence.json", report_text + "\n");
  const nlohmann::json check_json = {
      {"primitives", {c.primitive, c.primitive == "A" ? "B" : "A"}},
      {"extrapolated_limits", {limit, other_limit}},
      {"relative_difference", gap},
      {"tolerance", tol},
      {"agree", agree}};
  write_file(dir / "primitive_check.json", dump(check_json));

  const double tail = report.at("tail_fraction").get<double>();
  std::cout << "extrapolated_limit " << fmt17(limit) << "\nfitted_rate "
            << fmt17(report.at("fitted_rate").get<double>()) << "\ntail_fraction " << fmt17(tail)
            << "\nprimitive_gap " << fmt17(gap) << "\n";
  if (!(tail < 0.01)) {
    std::cerr << "warning: tail fraction " << fmt17(tail)
              << " is not below 0.01; extend --horizon\n";
  }
  if (!converged) std::cerr << "convergence check failed\n";
  if (!agree) std::cerr << "primitives disagree beyond tolerance\n";
  return converged && agree ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cusp geometry of constant-curvature surfaces in hyperbolic space"};
  app.require_subcommand(1);

  Flags profile_f{}, verify_f{}, winding_f{}, stokes_f{}, volume_f{};
  auto* profile = app.add_subcommand("profile", "integrate a cusp profile and fit its decay rate");
  add_common(profile, profile_f);
  auto* verify = app.add_subcommand("verify", "check the geometric identities and write a ledger");
  add_common(verify, verify_f);

  CurveArgs winding_curve, stokes_curve;
  std::vector<double> points;
  auto* winding = app.add_subcommand("winding", "winding numbers, turning index and simple loops");
  add_common(winding, winding_f);
  add_curve_options(winding, winding_curve);
  winding->add_option("--point", points, "x,y query point (repeatable)")->delimiter(',');

  std::string form = "x_dy";
  auto* stokes = app.add_subcommand("stokes", "line integral against winding-weighted area integral");
  add_common(stokes, stokes_f);
  add_curve_options(stokes, stokes_curve);
  stokes->add_option("--form", form, "x_dy or random (cubic, from --seed) [x_dy]");

  std::size_t steps = 20;
  auto* volume = app.add_subcommand("volume", "cusp volume ladder, convergence and primitive check");
  add_common(volume, volume_f);
  volume->add_option("--steps", steps, "ladder intervals [20]")->check(CLI::Range(3, 10000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (profile->parsed()) return cmd_profile(resolve(profile_f));
    if (verify->parsed()) return cmd_verify(resolve(verify_f));
    if (winding->parsed()) return cmd_winding(resolve(winding_f), winding_curve, points);
    if (stokes->parsed()) return cmd_stokes(resolve(stokes_f), stokes_curve, form);
    if (volume->parsed()) return cmd_volume(resolve(volume_f), steps);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RunError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
