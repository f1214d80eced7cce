#include "hypcusp/hypcusp.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <numbers>
#include <string>
#include <vector>

#include "cusp_integrals.hpp"
#include "error.hpp"
#include "hyper3.hpp"
#include "plane_curves.hpp"
#include "profile_ode.hpp"
#include "verify.hpp"

struct hc_profile {
  std::shared_ptr<const hypcusp::profile::Profile> p;
};

struct hc_loop {
  hypcusp::plane::SampledLoop loop;
};

struct hc_family {
  hypcusp::cusp::CuspFamily family;
};

namespace {

using namespace hypcusp;

thread_local std::string last_error;

hc_status from_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return HC_ERR_INVALID_ARGUMENT;
    case ErrorCode::Domain: return HC_ERR_DOMAIN;
    case ErrorCode::IntegrationFailure: return HC_ERR_INTEGRATION;
    case ErrorCode::Numerical: return HC_ERR_NUMERICAL;
    case ErrorCode::Io: return HC_ERR_IO;
  }
  return HC_ERR_INTERNAL;
}

hc_status fail(hc_status s, const std::string& message) {
  last_error = message;
  return s;
}

// Runs body, translating exceptions into status codes.
template <class F>
hc_status guard(F&& body) {
  try {
    body();
    return HC_OK;
  } catch (const Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HC_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hc_metric_diag to_c(const hyper3::MetricDiag& m) { return {m.gtt, m.gRR, m.gthth}; }

hc_connection to_c(const hyper3::ConnectionTable& t) {
  hc_connection out{};
  const auto& a = t.array();
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.gamma[k][i][j] = a[k][i][j];
  return out;
}

hc_fit to_c(const profile::DecayFit& f) {
  return {f.rate, f.amplitude, f.window.start, f.window.end, f.residual};
}

cusp::QuadratureSettings settings(const hc_quadrature* q) {
  cusp::QuadratureSettings s;
  if (q) {
    require(q->loop_samples >= plane::SampledLoop::kMinSamples, "quadrature loop_samples too small");
    require(q->resolution >= 2, "quadrature resolution must be >= 2");
    require(q->lateral_step > 0.0 && q->slice_step > 0.0, "quadrature steps must be positive");
    s.loop_samples = q->loop_samples;
    s.resolution = q->resolution;
    s.lateral_step = q->lateral_step;
    s.slice_step = q->slice_step;
  }
  return s;
}

cusp::ChartPrimitive primitive(hc_primitive p) {
  switch (p) {
    case HC_PRIMITIVE_A: return cusp::chart_primitive_A();
    case HC_PRIMITIVE_B: return cusp::chart_primitive_B();
  }
  throw Error(ErrorCode::InvalidArgument, "unknown primitive");
}

hc_stokes_report to_c(const plane::StokesReport& r) {
  return {r.lhs, r.rhs, r.residual, r.error_bound, r.resolution};
}

hc_loop* new_loop(plane::SampledLoop loop) { return new hc_loop{std::move(loop)}; }

}  // namespace

extern "C" {

const char* hc_version(void) { return "1.0.0"; }

const char* hc_status_name(hc_status status) {
  switch (status) {
    case HC_OK: return "ok";
    case HC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case HC_ERR_DOMAIN: return "domain";
    case HC_ERR_INTEGRATION: return "integration_failure";
    case HC_ERR_NUMERICAL: return "numerical";
    case HC_ERR_IO: return "io";
    case HC_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* hc_last_error(void) { return last_error.c_str(); }

void hc_string_free(char* s) { std::free(s); }

/* ---- half-space model ---- */

hc_status hc_phi_gamma(double t, double r, double theta, hc_halfspace_point* out) {
  return guard([&] {
    require(out, "null output");
    const auto p = hyper3::phi_gamma(t, r, theta);
    *out = {p.x, p.y, p.t};
  });
}

hc_status hc_psi_gamma(double t, double R, double theta, hc_halfspace_point* out) {
  return guard([&] {
    require(out, "null output");
    const auto p = hyper3::psi_gamma({t, R, theta});
    *out = {p.x, p.y, p.t};
  });
}

hc_status hc_metric_polar(double R, hc_metric_diag* out) {
  return guard([&] {
    require(out, "null output");
    *out = to_c(hyper3::metric_polar(R));
  });
}

hc_status hc_pullback_metric_oracle(double t, double R, double theta, double h, hc_metric_diag* out,
                                    double* offdiag_residual) {
  return guard([&] {
    require(out, "null output");
    const auto r = hyper3::pullback_metric_oracle({t, R, theta}, h);
    *out = to_c(r.diag);
    if (offdiag_residual) *offdiag_residual = r.offdiag_residual;
  });
}

hc_status hc_connection_table(double R, hc_connection* out) {
  return guard([&] {
    require(out, "null output");
    *out = to_c(hyper3::connection_table(R));
  });
}

hc_status hc_christoffel_oracle(double R, double h, hc_connection* out) {
  return guard([&] {
    require(out, "null output");
    *out = to_c(hyper3::christoffel_oracle(R, h));
  });
}

/* ---- profiles ---- */

hc_status hc_curvature_from_profile(double f, double fp, double fpp, double* out) {
  return guard([&] {
    require(out, "null output");
    *out = profile::curvature_from_profile(f, fp, fpp);
  });
}

hc_status hc_fpp_from_curvature(double f, double fp, double k, double* out) {
  return guard([&] {
    require(out, "null output");
    *out = profile::fpp_from_curvature(f, fp, profile::CurvatureLevel(k));
  });
}

hc_status hc_integrate_backward(double eps, double T, double k, double dt, int truncate_on_blowup,
                                hc_profile** out) {
  return guard([&] {
    require(out, "null output");
    *out = nullptr;
    auto p = profile::integrate_backward(
        eps, T, profile::CurvatureLevel(k), dt,
        truncate_on_blowup ? profile::OnBlowUp::Truncate : profile::OnBlowUp::Throw);
    *out = new hc_profile{std::make_shared<const profile::Profile>(std::move(p))};
  });
}

hc_status hc_shoot_forward(double f0, double k, double T, double dt, hc_profile** out) {
  return guard([&] {
    require(out, "null output");
    *out = nullptr;
    auto p = profile::shoot_forward(f0, profile::CurvatureLevel(k), T, dt);
    *out = new hc_profile{std::make_shared<const profile::Profile>(std::move(p))};
  });
}

hc_status hc_profile_from_samples(double t0, double dt, const double* f, const double* fp, size_t n,
                                  hc_profile** out) {
  return guard([&] {
    require(out && f && fp, "null argument");
    *out = nullptr;
    profile::Profile p(t0, dt, std::vector<double>(f, f + n), std::vector<double>(fp, fp + n));
    *out = new hc_profile{std::make_shared<const profile::Profile>(std::move(p))};
  });
}

void hc_profile_free(hc_profile* p) { delete p; }

size_t hc_profile_size(const hc_profile* p) { return p ? p->p->size() : 0; }
double hc_profile_t0(const hc_profile* p) { return p ? p->p->t0() : NAN; }
double hc_profile_dt(const hc_profile* p) { return p ? p->p->dt() : NAN; }
double hc_profile_t_end(const hc_profile* p) { return p ? p->p->t_end() : NAN; }

hc_status hc_profile_samples(const hc_profile* p, double* f, double* fp, size_t capacity) {
  return guard([&] {
    require(p, "null profile");
    const std::size_t n = std::min(capacity, p->p->size());
    for (std::size_t i = 0; i < n; ++i) {
      if (f) f[i] = p->p->f()[i];
      if (fp) fp[i] = p->p->fp()[i];
    }
  });
}

const char* hc_profile_diagnostic(const hc_profile* p) { return p ? p->p->diagnostic().c_str() : ""; }

hc_status hc_profile_write_csv(const hc_profile* p, const char* path) {
  return guard([&] {
    require(p && path, "null argument");
    profile::write_profile_csv(*p->p, path);
  });
}

hc_status hc_default_fit_window(const hc_profile* p, double* start, double* end) {
  return guard([&] {
    require(p && start && end, "null argument");
    const auto w = profile::default_fit_window(*p->p);
    *start = w.start;
    *end = w.end;
  });
}

hc_status hc_decay_fit(const hc_profile* p, double start, double end, hc_fit* out) {
  return guard([&] {
    require(p && out, "null argument");
    *out = to_c(profile::decay_fit(*p->p, {start, end}));
  });
}

hc_status hc_derivative_rate_check(const hc_profile* p, double k, int order, double start, double end,
                                   hc_fit* out, int* sign_pattern) {
  return guard([&] {
    require(p && out, "null argument");
    const auto r = profile::derivative_rate_check(*p->p, profile::CurvatureLevel(k), order, {start, end});
    *out = to_c(r.fit);
    if (sign_pattern) *sign_pattern = r.sign_pattern ? 1 : 0;
  });
}

hc_status hc_extrinsic_curvature(const hc_profile* p, double t, double h, double theta, double* out) {
  return guard([&] {
    require(p && out, "null argument");
    *out = profile::extrinsic_curvature_oracle(*p->p, t, h, theta);
  });
}

hc_status hc_area_tail(const hc_profile* p, double t, double* out) {
  return guard([&] {
    require(p && out, "null argument");
    *out = cusp::area_tail(*p->p, t);
  });
}

hc_status hc_volume_tail(const hc_profile* p, double t, double* out) {
  return guard([&] {
    require(p && out, "null argument");
    *out = cusp::volume_tail_revolution(*p->p, t);
  });
}

/* ---- loops ---- */

hc_status hc_loop_from_points(const hc_point* points, size_t n, hc_loop** out) {
  return guard([&] {
    require(points && out, "null argument");
    *out = nullptr;
    std::vector<plane::Point2> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = {points[i].x, points[i].y};
    *out = new_loop(plane::SampledLoop(std::move(pts)));
  });
}

hc_status hc_loop_builtin(const char* name, size_t samples, hc_loop** out) {
  return guard([&] {
    require(name && out, "null argument");
    *out = nullptr;
    const std::string which = name;
    std::function<plane::Point2(double)> curve;
    if (which == "circle") {
      curve = [](double s) { return plane::Point2{std::cos(s), std::sin(s)}; };
    } else if (which == "limacon") {
      curve = plane::limacon;
    } else if (which == "figure_eight") {
      curve = plane::figure_eight;
    } else {
      throw Error(ErrorCode::InvalidArgument,
                  "unknown builtin curve '" + which + "' (circle, limacon, figure_eight)");
    }
    *out = new_loop(plane::SampledLoop::sample(curve, samples, 0.5));
  });
}

hc_status hc_loop_epicycle(double a, int n, double b, int m, size_t samples, hc_loop** out) {
  return guard([&] {
    require(out, "null output");
    *out = nullptr;
    *out = new_loop(plane::SampledLoop::sample(plane::epicycle(a, n, b, m), samples, 0.5));
  });
}

hc_status hc_loop_read_csv(const char* path, hc_loop** out) {
  return guard([&] {
    require(path && out, "null argument");
    *out = nullptr;
    *out = new_loop(plane::read_loop_csv(path));
  });
}

hc_status hc_loop_write_csv(const hc_loop* loop, const char* path) {
  return guard([&] {
    require(loop && path, "null argument");
    plane::write_loop_csv(loop->loop, path);
  });
}

void hc_loop_free(hc_loop* loop) { delete loop; }

size_t hc_loop_size(const hc_loop* loop) { return loop ? loop->loop.size() : 0; }

hc_status hc_loop_points(const hc_loop* loop, hc_point* out, size_t capacity) {
  return guard([&] {
    require(loop && out, "null argument");
    const std::size_t n = std::min(capacity, loop->loop.size());
    for (std::size_t i = 0; i < n; ++i) out[i] = {loop->loop[i].x, loop->loop[i].y};
  });
}

hc_status hc_winding_number(const hc_loop* loop, double x, double y, int* out) {
  return guard([&] {
    require(loop && out, "null argument");
    *out = plane::winding_number(loop->loop, {x, y});
  });
}

hc_status hc_turning_index(const hc_loop* loop, int* out) {
  return guard([&] {
    require(loop && out, "null argument");
    *out = plane::turning_index(loop->loop);
  });
}

hc_status hc_is_convex(const hc_loop* loop, int* out) {
  return guard([&] {
    require(loop && out, "null argument");
    *out = plane::is_convex(loop->loop) ? 1 : 0;
  });
}

hc_status hc_decompose_simple_loops(const hc_loop* loop, hc_loop*** loops, size_t* count) {
  return guard([&] {
    require(loop && loops && count, "null argument");
    *loops = nullptr;
    *count = 0;
    auto pieces = plane::decompose_simple_loops(loop->loop);
    auto** arr = static_cast<hc_loop**>(std::calloc(pieces.size(), sizeof(hc_loop*)));
    if (!arr && !pieces.empty()) throw std::bad_alloc();
    std::size_t made = 0;
    try {
      for (auto& piece : pieces) arr[made++] = new_loop(std::move(piece));
    } catch (...) {
      hc_loop_array_free(arr, made);
      throw;
    }
    *loops = arr;
    *count = made;
  });
}

void hc_loop_array_free(hc_loop** loops, size_t count) {
  if (!loops) return;
  for (size_t i = 0; i < count; ++i) delete loops[i];
  std::free(loops);
}

hc_status hc_stokes_polynomial(const hc_loop* loop, const double* p, const double* q, int degree,
                               int resolution, hc_stokes_report* out) {
  return guard([&] {
    require(loop && p && q && out, "null argument");
    require(degree >= 0 && degree <= 12, "polynomial degree must be in [0, 12]");
    const std::size_t n = plane::polynomial_size(degree);
    const auto w = plane::PlaneOneForm::polynomial(std::vector<double>(p, p + n),
                                                   std::vector<double>(q, q + n));
    *out = to_c(plane::stokes_residual(loop->loop, w, resolution));
  });
}

hc_status hc_stokes_callback(const hc_loop* loop, hc_field P, hc_field Q, hc_field dw, void* user,
                             int resolution, hc_stokes_report* out) {
  return guard([&] {
    require(loop && P && Q && dw && out, "null argument");
    const plane::PlaneOneForm w([=](double x, double y) { return P(x, y, user); },
                                [=](double x, double y) { return Q(x, y, user); },
                                [=](double x, double y) { return dw(x, y, user); });
    *out = to_c(plane::stokes_residual(loop->loop, w, resolution));
  });
}

hc_status hc_winding_weighted_integral(const hc_loop* loop, hc_field density, void* user,
                                       int resolution, double* out) {
  return guard([&] {
    require(loop && density && out, "null argument");
    *out = plane::winding_weighted_integral(
        loop->loop, [=](double x, double y) { return density(x, y, user); },
        plane::Grid2D::covering(loop->loop, resolution));
  });
}

hc_status hc_stokes_report_json(const hc_stokes_report* report, char** json) {
  return guard([&] {
    require(report && json, "null argument");
    const nlohmann::json j = {{"lhs", report->lhs},
                              {"rhs", report->rhs},
                              {"residual", report->residual},
                              {"resolution", report->resolution}};
    *json = copy_string(j.dump(2));
  });
}

/* ---- cusp ends ---- */

void hc_quadrature_defaults(hc_quadrature* q) {
  if (!q) return;
  const cusp::QuadratureSettings s;
  *q = {s.loop_samples, s.resolution, s.lateral_step, s.slice_step};
}

hc_status hc_family_epicycle(const char* id, double rho0, double rho_rate, int n, double mu0,
                             double mu_rate, int m, double t_min, double t_max, hc_family** out) {
  return guard([&] {
    require(id && out, "null argument");
    *out = nullptr;
    *out = new hc_family{
        cusp::epicycle_family(id, rho0, rho_rate, n, mu0, mu_rate, m, t_min, t_max)};
  });
}

hc_status hc_family_from_profile(const char* id, const hc_profile* p, int n, double nominal_rate,
                                 hc_family** out) {
  return guard([&] {
    require(id && p && out, "null argument");
    *out = nullptr;
    *out = new hc_family{cusp::profile_family(id, p->p, n, nominal_rate)};
  });
}

void hc_family_free(hc_family* family) { delete family; }

hc_status hc_V_of_t(const hc_family* family, hc_primitive prim, double T, double t,
                    const hc_quadrature* q, double* out) {
  return guard([&] {
    require(family && out, "null argument");
    *out = cusp::V_of_t(family->family, primitive(prim), T, t, settings(q));
  });
}

hc_status hc_winding_dvol(const hc_family* family, double T, double t, const hc_quadrature* q,
                          double* out) {
  return guard([&] {
    require(family && out, "null argument");
    *out = cusp::winding_dvol_integral(family->family, T, t, settings(q));
  });
}

hc_status hc_decay_validator_json(const hc_family* family, double k, double delta, size_t slices,
                                  char** json, int* holds) {
  return guard([&] {
    require(family && json, "null argument");
    const auto r = cusp::decay_validator(family->family, profile::CurvatureLevel(k), delta, slices);
    *json = copy_string(r.to_json().dump(2));
    if (holds) *holds = r.holds ? 1 : 0;
  });
}

hc_status hc_convergence_report_json(const hc_family* family, hc_primitive prim, double T,
                                     double horizon, size_t steps, const hc_quadrature* q,
                                     char** json, int* converged) {
  return guard([&] {
    require(family && json, "null argument");
    const auto r =
        cusp::convergence_report(family->family, primitive(prim), T, horizon, steps, settings(q));
    *json = copy_string(r.to_json().dump(2));
    if (converged) *converged = r.converged ? 1 : 0;
  });
}

hc_status hc_verify_ledger_json(double tolerance_override, uint64_t seed, int resolution, char** json,
                                int* all_pass) {
  return guard([&] {
    require(json, "null argument");
    require(!(tolerance_override < 0.0), "tolerance override must be >= 0");
    verify::VerifyOptions o;
    o.tolerance_override = tolerance_override;
    o.seed = seed;
    o.resolution = resolution;
    const auto entries = verify::run_all(o);
    const auto j = verify::ledger_json(entries, o);
    *json = copy_string(j.dump(2));
    if (all_pass) *all_pass = j.at("all_pass").get<bool>() ? 1 : 0;
  });
}

}  // extern "C"
