#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypcusp/hypcusp.h"

namespace {

constexpr double kPi = std::numbers::pi;

nlohmann::json take_json(char* s) {
  REQUIRE(s != nullptr);
  auto j = nlohmann::json::parse(s);
  hc_string_free(s);
  return j;
}

double x_squared(double x, double, void*) { return x * x; }
double minus_y(double, double y, void*) { return -y; }
double plus_x(double x, double, void*) { return x; }
double scaled(double, double, void* user) { return *static_cast<double*>(user); }

}  // namespace

TEST_CASE("status names, version and last error") {
  CHECK(std::string(hc_version()).size() > 0);
  CHECK(std::string(hc_status_name(HC_OK)) == "ok");
  CHECK(std::string(hc_status_name(HC_ERR_DOMAIN)) == "domain");
  CHECK(std::string(hc_status_name(static_cast<hc_status>(99))) == "unknown");

  hc_metric_diag m{};
  CHECK(hc_metric_polar(-1.0, &m) == HC_ERR_DOMAIN);
  CHECK(std::string(hc_last_error()).size() > 0);
  CHECK(hc_metric_polar(1.0, nullptr) == HC_ERR_INVALID_ARGUMENT);
  CHECK(hc_metric_polar(1.0, &m) == HC_OK);
  CHECK(m.gtt == 2.0);
  CHECK(m.gRR == 0.5);
  CHECK(m.gthth == 1.0);
}

TEST_CASE("half-space kernel") {
  hc_halfspace_point p{};
  REQUIRE(hc_phi_gamma(1.0, 0.0, 0.3, &p) == HC_OK);
  CHECK(p.t == doctest::Approx(std::numbers::e));
  CHECK(hc_psi_gamma(0.0, -1.0, 0.0, &p) == HC_ERR_DOMAIN);

  hc_connection table{}, oracle{};
  REQUIRE(hc_connection_table(0.8, &table) == HC_OK);
  REQUIRE(hc_christoffel_oracle(0.8, 1e-5, &oracle) == HC_OK);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(std::abs(table.gamma[k][i][j] - oracle.gamma[k][i][j]) < 1e-6);
  // Gamma^R_tt = -R (1 + R^2)
  CHECK(table.gamma[1][0][0] == doctest::Approx(-0.8 * 1.64));
  CHECK(hc_connection_table(0.0, &table) == HC_ERR_DOMAIN);

  hc_metric_diag m{};
  double off = -1;
  REQUIRE(hc_pullback_metric_oracle(0.2, 0.9, 1.0, 1e-4, &m, &off) == HC_OK);
  CHECK(m.gtt == doctest::Approx(1.81).epsilon(1e-6));
  CHECK(off < 1e-6);
}

TEST_CASE("profiles through the C interface") {
  double v = 0;
  REQUIRE(hc_curvature_from_profile(1.0, 0.0, 0.0, &v) == HC_OK);
  CHECK(v == doctest::Approx(1.0));
  double fpp = 0;
  REQUIRE(hc_fpp_from_curvature(0.4, -0.2, 0.6, &fpp) == HC_OK);
  REQUIRE(hc_curvature_from_profile(0.4, -0.2, fpp, &v) == HC_OK);
  CHECK(v == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(hc_fpp_from_curvature(0.4, -0.2, 1.5, &fpp) == HC_ERR_INVALID_ARGUMENT);

  hc_profile* p = nullptr;
  CHECK(hc_integrate_backward(1e-6, 30.0, 0.75, 1e-3, 0, &p) == HC_ERR_INTEGRATION);
  CHECK(p == nullptr);
  REQUIRE(hc_integrate_backward(1e-6, 30.0, 0.75, 1e-3, 1, &p) == HC_OK);
  CHECK(std::string(hc_profile_diagnostic(p)).size() > 0);
  CHECK(hc_profile_t0(p) > 0.5);
  hc_profile_free(p);

  REQUIRE(hc_integrate_backward(1e-6, std::log(0.5e6) / 0.5, 0.75, 1e-3, 0, &p) == HC_OK);
  CHECK(std::string(hc_profile_diagnostic(p)).empty());
  const size_t n = hc_profile_size(p);
  CHECK(n > 1000);
  CHECK(hc_profile_t0(p) == 0.0);
  CHECK(hc_profile_dt(p) == doctest::Approx(1e-3));
  std::vector<double> f(n), fp(n);
  REQUIRE(hc_profile_samples(p, f.data(), fp.data(), n) == HC_OK);
  CHECK(f.front() == doctest::Approx(0.5).epsilon(0.05));
  CHECK(f.back() == doctest::Approx(1e-6));

  double start = 0, end = 0;
  REQUIRE(hc_default_fit_window(p, &start, &end) == HC_OK);
  hc_fit fit{};
  REQUIRE(hc_decay_fit(p, start, end, &fit) == HC_OK);
  CHECK(std::abs(fit.rate - 0.5) < 1e-3);
  int sign = 0;
  REQUIRE(hc_derivative_rate_check(p, 0.75, 2, start, end, &fit, &sign) == HC_OK);
  CHECK(sign == 1);
  CHECK(std::abs(fit.rate - 0.5) < 0.01);
  double kappa = 0;
  REQUIRE(hc_extrinsic_curvature(p, 2.0, 1e-4, 0.0, &kappa) == HC_OK);
  CHECK(std::abs(kappa - 0.75) < 1e-3);
  double area = 0, vol = 0;
  REQUIRE(hc_area_tail(p, 1.0, &area) == HC_OK);
  REQUIRE(hc_volume_tail(p, 1.0, &vol) == HC_OK);
  CHECK(area > 0);
  CHECK(vol > 0);
  CHECK(vol < area);

  hc_family* fam = nullptr;
  REQUIRE(hc_family_from_profile("rev", p, 2, 0.5, &fam) == HC_OK);
  hc_profile_free(p);  // the family keeps the profile alive
  hc_quadrature q{};
  hc_quadrature_defaults(&q);
  q.resolution = 256;
  q.loop_samples = 512;
  double V = 0;
  REQUIRE(hc_V_of_t(fam, HC_PRIMITIVE_A, 1.0, 5.0, &q, &V) == HC_OK);
  CHECK(V == doctest::Approx(2 * (vol - [&] {
                                  hc_profile* again = nullptr;
                                  hc_integrate_backward(1e-6, std::log(0.5e6) / 0.5, 0.75, 1e-3, 0, &again);
                                  double v5 = 0;
                                  hc_volume_tail(again, 5.0, &v5);
                                  hc_profile_free(again);
                                  return v5;
                                }()))
                 .epsilon(1e-4));
  hc_family_free(fam);

  const double fs[] = {1.0, 0.5, 0.25}, fps[] = {-1.0, -0.5, -0.25};
  REQUIRE(hc_profile_from_samples(0.0, 1.0, fs, fps, 3, &p) == HC_OK);
  CHECK(hc_profile_t_end(p) == 2.0);
  hc_profile_free(p);
  const double bad[] = {1.0, -0.5};
  CHECK(hc_profile_from_samples(0.0, 1.0, bad, fps, 2, &p) != HC_OK);
  hc_profile_free(nullptr);
}

TEST_CASE("loops through the C interface") {
  hc_loop* lim = nullptr;
  REQUIRE(hc_loop_builtin("limacon", 4096, &lim) == HC_OK);
  CHECK(hc_loop_size(lim) == 4096);
  int w = -1;
  REQUIRE(hc_winding_number(lim, 0.5, 0.0, &w) == HC_OK);
  CHECK(w == 2);
  int turning = 0, convex = -1;
  REQUIRE(hc_turning_index(lim, &turning) == HC_OK);
  CHECK(turning == 2);
  REQUIRE(hc_is_convex(lim, &convex) == HC_OK);

  hc_loop** pieces = nullptr;
  size_t count = 0;
  REQUIRE(hc_decompose_simple_loops(lim, &pieces, &count) == HC_OK);
  REQUIRE(count == 2);
  for (size_t i = 0; i < count; ++i) {
    int t = 0;
    REQUIRE(hc_turning_index(pieces[i], &t) == HC_OK);
    CHECK(t == 1);
  }
  hc_loop_array_free(pieces, count);

  const double p[] = {0, 0, 0}, q[] = {0, 1, 0};  // x dy
  hc_stokes_report r{};
  REQUIRE(hc_stokes_polynomial(lim, p, q, 1, 512, &r) == HC_OK);
  CHECK(r.rhs == doctest::Approx(3 * kPi).epsilon(1e-4));
  CHECK(r.residual < 1e-2);
  CHECK(r.resolution == 512);
  CHECK(hc_stokes_polynomial(lim, p, q, 1, 1, &r) == HC_ERR_INVALID_ARGUMENT);
  CHECK(hc_stokes_polynomial(lim, p, q, 13, 512, &r) == HC_ERR_INVALID_ARGUMENT);

  char* json = nullptr;
  REQUIRE(hc_stokes_report_json(&r, &json) == HC_OK);
  const auto j = take_json(json);
  CHECK(j.size() == 4);
  CHECK(j["resolution"] == 512);
  hc_loop_free(lim);

  hc_loop* circle = nullptr;
  REQUIRE(hc_loop_builtin("circle", 4096, &circle) == HC_OK);
  double two = 2.0;
  REQUIRE(hc_stokes_callback(circle, minus_y, plus_x, scaled, &two, 512, &r) == HC_OK);
  CHECK(r.lhs == doctest::Approx(2 * kPi).epsilon(1e-5));
  CHECK(r.residual < 1e-3);
  double one = 1.0;
  CHECK(hc_stokes_callback(circle, minus_y, plus_x, scaled, &one, 512, &r) == HC_ERR_INVALID_ARGUMENT);
  double integral = 0;
  REQUIRE(hc_winding_weighted_integral(circle, x_squared, nullptr, 512, &integral) == HC_OK);
  CHECK(integral == doctest::Approx(kPi / 4).epsilon(1e-5));

  std::vector<hc_point> pts(hc_loop_size(circle));
  REQUIRE(hc_loop_points(circle, pts.data(), pts.size()) == HC_OK);
  hc_loop* copy = nullptr;
  REQUIRE(hc_loop_from_points(pts.data(), pts.size(), &copy) == HC_OK);
  CHECK(hc_winding_number(copy, 0.0, 0.0, &w) == HC_OK);
  CHECK(w == 1);
  CHECK(hc_winding_number(copy, pts[0].x, pts[0].y, &w) == HC_ERR_DOMAIN);

  const std::string path = "hypcusp_capi_loop.csv";
  REQUIRE(hc_loop_write_csv(copy, path.c_str()) == HC_OK);
  hc_loop* back = nullptr;
  REQUIRE(hc_loop_read_csv(path.c_str(), &back) == HC_OK);
  CHECK(hc_loop_size(back) == pts.size());
  std::remove(path.c_str());
  CHECK(hc_loop_read_csv("does/not/exist.csv", &back) == HC_ERR_IO);
  hc_loop_free(back);
  hc_loop_free(copy);
  hc_loop_free(circle);

  hc_loop* eight = nullptr;
  REQUIRE(hc_loop_builtin("figure_eight", 1024, &eight) == HC_OK);
  REQUIRE(hc_turning_index(eight, &turning) == HC_OK);
  CHECK(turning == 0);
  hc_loop_free(eight);
  CHECK(hc_loop_builtin("square", 64, &eight) == HC_ERR_INVALID_ARGUMENT);

  hc_loop* epi = nullptr;
  REQUIRE(hc_loop_epicycle(1.0, 3, 0.1, 5, 2048, &epi) == HC_OK);
  REQUIRE(hc_is_convex(epi, &convex) == HC_OK);
  CHECK(convex == 1);
  REQUIRE(hc_turning_index(epi, &turning) == HC_OK);
  CHECK(turning == 3);
  hc_loop_free(epi);
  hc_loop_free(nullptr);
  CHECK(hc_turning_index(nullptr, &turning) == HC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("cusp families through the C interface") {
  hc_family* f = nullptr;
  REQUIRE(hc_family_epicycle("e", 1.0, 0.5, 1, 0.1, 0.7, 3, 0.0, 20.0, &f) == HC_OK);
  hc_quadrature q{};
  hc_quadrature_defaults(&q);
  CHECK(q.resolution == 512);
  CHECK(q.loop_samples == 1024);
  q.resolution = 256;
  q.loop_samples = 512;

  double va = 0, vb = 0, slab = 0;
  REQUIRE(hc_V_of_t(f, HC_PRIMITIVE_A, 0.0, 2.0, &q, &va) == HC_OK);
  REQUIRE(hc_V_of_t(f, HC_PRIMITIVE_B, 0.0, 2.0, &q, &vb) == HC_OK);
  REQUIRE(hc_winding_dvol(f, 0.0, 2.0, &q, &slab) == HC_OK);
  const double closed = kPi * (1.0 / 1.0 * (1 - std::exp(-2.0)) + 3 * 0.01 / 1.4 * (1 - std::exp(-2.8)));
  CHECK(va == doctest::Approx(closed).epsilon(1e-4));
  CHECK(vb == doctest::Approx(closed).epsilon(1e-4));
  CHECK(slab == doctest::Approx(closed).epsilon(1e-4));
  CHECK(hc_V_of_t(f, HC_PRIMITIVE_A, 0.0, 25.0, &q, &va) == HC_ERR_INVALID_ARGUMENT);
  CHECK(hc_V_of_t(f, static_cast<hc_primitive>(7), 0.0, 1.0, &q, &va) == HC_ERR_INVALID_ARGUMENT);

  char* json = nullptr;
  int holds = -1;
  REQUIRE(hc_decay_validator_json(f, 0.75, 0.05, 40, &json, &holds) == HC_OK);
  CHECK(holds == 1);
  CHECK(take_json(json)["holds"] == true);

  int converged = -1;
  REQUIRE(hc_convergence_report_json(f, HC_PRIMITIVE_A, 0.0, 20.0, 20, &q, &json, &converged) == HC_OK);
  CHECK(converged == 1);
  const auto j = take_json(json);
  CHECK(j.size() == 9);
  CHECK(j["t_ladder"].size() == 21);
  hc_family_free(f);
  hc_family_free(nullptr);
  CHECK(hc_family_epicycle("bad", 1.0, 0.5, 0, 0.1, 0.7, 3, 0.0, 20.0, &f) == HC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("verification ledger through the C interface") {
  char* json = nullptr;
  int all_pass = -1;
  REQUIRE(hc_verify_ledger_json(0.0, 1, 256, &json, &all_pass) == HC_OK);
  CHECK(all_pass == 1);
  const auto j = take_json(json);
  CHECK(j["entries"].size() == 7);
  CHECK(j["resolution"] == 256);
  CHECK(hc_verify_ledger_json(0.0, 1, 256, nullptr, &all_pass) == HC_ERR_INVALID_ARGUMENT);
  CHECK(hc_verify_ledger_json(0.0, 1, 4, &json, &all_pass) == HC_ERR_INVALID_ARGUMENT);
}
