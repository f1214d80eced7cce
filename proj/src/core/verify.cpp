#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "cusp_integrals.hpp"
#include "error.hpp"
#include "hyper3.hpp"
#include "profile_ode.hpp"

namespace hypcusp::verify {

namespace {

constexpr double kPi = std::numbers::pi;

LedgerEntry make_entry(std::string name, std::string identity, double residual, double tolerance) {
  LedgerEntry e;
  e.name = std::move(name);
  e.identity = std::move(identity);
  e.residual = residual;
  e.tolerance = tolerance;
  e.passed = std::isfinite(residual) && residual <= tolerance;
  return e;
}

double relative_gap(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

}  // namespace

nlohmann::json LedgerEntry::to_json() const {
  return {{"name", name},         {"identity", identity}, {"residual", residual},
          {"tolerance", tolerance}, {"pass", passed},       {"detail", detail}};
}

LedgerEntry check_polar_metric(Rng& rng, int points, double tolerance) {
  double worst = 0.0, worst_off = 0.0;
  for (int i = 0; i < points; ++i) {
    const hyper3::ChartCoords c{rng.uniform(-3.0, 3.0), rng.uniform(0.05, 5.0),
                                rng.uniform(0.0, 2.0 * kPi)};
    const auto oracle = hyper3::pullback_metric_oracle(c);
    const auto exact = hyper3::metric_polar(c.R);
    worst = std::max({worst, relative_gap(oracle.diag.gtt, exact.gtt),
                      relative_gap(oracle.diag.gRR, exact.gRR),
                      relative_gap(oracle.diag.gthth, exact.gthth)});
    worst_off = std::max(worst_off, oracle.offdiag_residual);
  }
  LedgerEntry e = make_entry("polar_metric", "pullback of t^-2 delta through psi = diag(1+R^2, 1/(1+R^2), R^2)",
                             std::max(worst, worst_off), tolerance);
  e.detail = {{"points", points}, {"diagonal", worst}, {"off_diagonal", worst_off}};
  return e;
}

LedgerEntry check_connection(Rng& rng, int points, double tolerance) {
  double worst = 0.0, torsion = 0.0;
  for (int i = 0; i < points; ++i) {
    const double R = rng.uniform(0.05, 5.0);
    const auto oracle = hyper3::christoffel_oracle(R);
    const auto exact = hyper3::connection_table(R);
    worst = std::max(worst, oracle.max_difference(exact) / std::max(1.0, R * (1.0 + R * R)));
    torsion = std::max(torsion, oracle.torsion_residual());
  }
  LedgerEntry e = make_entry("levi_civita_connection", "Koszul formula on the polar metric = connection table",
                             std::max(worst, torsion), tolerance);
  e.detail = {{"points", points}, {"coefficients", worst}, {"torsion", torsion}};
  return e;
}

LedgerEntry check_revolution_curvature(const std::vector<double>& levels, int points, double tolerance) {
  double worst = 0.0;
  nlohmann::json per_level = nlohmann::json::array();
  for (double k : levels) {
    const profile::CurvatureLevel level(k);
    const double eps = 1e-6;
    const double T = std::log(0.5 / eps) / level.lambda();
    const auto p = profile::integrate_backward(eps, T, level, 1e-3, profile::OnBlowUp::Truncate);
    double level_worst = 0.0;
    for (int i = 1; i <= points; ++i) {
      // Interior points over the first half, where f dwarfs the oracle step.
      const double t = p.t0() + 0.5 * (p.t_end() - p.t0()) * i / (points + 1.0);
      level_worst = std::max(level_worst, std::abs(profile::extrinsic_curvature_oracle(p, t, 1e-4) - k));
    }
    per_level.push_back({{"k", k}, {"max_error", level_worst}});
    worst = std::max(worst, level_worst);
  }
  LedgerEntry e = make_entry("revolution_curvature",
                             "det II / det I of the revolution surface = k along ODE profiles", worst,
                             tolerance);
  e.detail = {{"points_per_level", points}, {"levels", per_level}};
  return e;
}

ConvexEpicycle random_convex_epicycle(Rng& rng) {
  while (true) {
    ConvexEpicycle c{};
    c.n = rng.integer(1, 4);
    do {
      c.m = rng.integer(1, 6);
    } while (c.m == c.n);
    c.a = rng.uniform(0.5, 2.0);
    c.b = rng.uniform(0.0, 0.95) * c.a * c.n * c.n / (c.m * c.m);
    c.phase = rng.uniform(0.0, 2.0 * kPi);
    const auto curve = plane::epicycle(c.a, c.n, c.b, c.m);
    if (plane::is_convex(plane::SampledLoop::sample(curve, 1024, 0.5))) return c;
  }
}

LedgerEntry check_winding_bound(Rng& rng, int curves, int points) {
  long violations = 0, evaluated = 0, skipped = 0;
  int max_index = 0;
  for (int i = 0; i < curves; ++i) {
    const ConvexEpicycle c = random_convex_epicycle(rng);
    const double ca = std::cos(c.phase), sa = std::sin(c.phase);
    const auto base = plane::epicycle(c.a, c.n, c.b, c.m);
    const auto loop = plane::SampledLoop::sample(
        [&](double s) {
          const auto p = base(s);
          return plane::Point2{ca * p.x - sa * p.y, sa * p.x + ca * p.y};
        },
        1024, 0.5);
    const int index = plane::turning_index(loop);
    max_index = std::max(max_index, index);
    const auto box = loop.bounds();
    const double pad = 0.2 * std::max(box.xmax - box.xmin, box.ymax - box.ymin);
    for (int j = 0; j < points; ++j) {
      const plane::Point2 p{rng.uniform(box.xmin - pad, box.xmax + pad),
                            rng.uniform(box.ymin - pad, box.ymax + pad)};
      int w = 0;
      try {
        w = plane::winding_number(loop, p);
      } catch (const Error&) {
        ++skipped;  // on the curve
        continue;
      }
      ++evaluated;
      if (w < 0 || w > index) ++violations;
    }
  }
  LedgerEntry e = make_entry("winding_index_bound", "0 <= Wind(c, p) <= Ind(c) for convex c",
                             static_cast<double>(violations), 0.0);
  e.detail = {{"curves", curves}, {"points_evaluated", evaluated}, {"points_on_curve", skipped},
              {"violations", violations}, {"max_index", max_index}};
  return e;
}

plane::SampledLoop random_transversal_curve(Rng& rng, std::size_t samples) {
  while (true) {
    double r[3], phi[3];
    int n[3];
    n[0] = rng.integer(1, 3);
    r[0] = rng.uniform(0.6, 1.2);
    for (int k = 1; k < 3; ++k) {
      do {
        n[k] = rng.integer(-4, 4);
      } while (n[k] == 0 || n[k] == n[0]);
      r[k] = rng.uniform(0.1, 0.6);
    }
    for (double& p : phi) p = rng.uniform(0.0, 2.0 * kPi);
    try {
      auto loop = plane::SampledLoop::sample(
          [&](double s) {
            plane::Point2 out{0.0, 0.0};
            for (int k = 0; k < 3; ++k) {
              out = out + plane::Point2{r[k] * std::cos(n[k] * s + phi[k]),
                                        r[k] * std::sin(n[k] * s + phi[k])};
            }
            return out;
          },
          samples, 0.5 / std::numbers::sqrt2);
      plane::turning_index(loop);
      plane::self_intersections(loop);
      return loop;
    } catch (const Error&) {
      // degenerate tangent or near-tangential crossing: redraw
    }
  }
}

plane::PlaneOneForm random_polynomial_form(Rng& rng) {
  std::vector<double> p(plane::polynomial_size(3)), q(plane::polynomial_size(3));
  for (double& c : p) c = rng.uniform(-1.0, 1.0);
  for (double& c : q) c = rng.uniform(-1.0, 1.0);
  return plane::PlaneOneForm::polynomial(std::move(p), std::move(q));
}

LedgerEntry check_stokes(Rng& rng, int curves, int resolution, double tolerance) {
  const auto limacon = plane::SampledLoop::sample(plane::limacon, 4096, 0.5);
  const auto lim = plane::stokes_residual(limacon, plane::PlaneOneForm::x_dy(), resolution);
  double worst = lim.residual;
  double worst_random = 0.0;
  for (int i = 0; i < curves; ++i) {
    const auto c = random_transversal_curve(rng);
    const auto w = random_polynomial_form(rng);
    const auto r = plane::stokes_residual(c, w, resolution);
    worst_random = std::max(worst_random, r.residual);
  }
  worst = std::max(worst, worst_random);
  LedgerEntry e = make_entry("generalized_stokes", "line integral of w = integral of Wind(c, x) dw",
                             worst, tolerance);
  e.detail = {{"limacon_lhs", lim.lhs},         {"limacon_rhs", lim.rhs},
              {"limacon_residual", lim.residual}, {"random_curves", curves},
              {"random_max_residual", worst_random}, {"resolution", resolution}};
  return e;
}

LedgerEntry check_winding_derivative(int resolution, double tolerance) {
  const auto one = [](double, double) { return 1.0; };
  const double h = 1e-3;
  plane::LoopFamily grow{[](double s, double t) {
                           const double r = 1.0 + t;
                           return plane::Point2{r * std::cos(s), r * std::sin(s)};
                         },
                         -0.5, 0.5};
  plane::LoopFamily shift{[](double s, double t) {
                            const auto p = plane::limacon(s);
                            return plane::Point2{p.x + 0.7 * t, p.y - 0.3 * t};
                          },
                          -0.5, 0.5};
  plane::LoopFamily shrink{[](double s, double t) {
                             const double r = std::exp(-t);
                             return plane::Point2{r * std::cos(2 * s), r * std::sin(2 * s)};
                           },
                           -0.5, 0.5};
  const auto a = plane::winding_derivative_residual(grow, one, 0.0, h, resolution);
  const auto b = plane::winding_derivative_residual(shift, one, 0.0, h, resolution);
  const auto c = plane::winding_derivative_residual(shrink, one, 0.0, h, resolution);
  // Against the exact derivatives 2 pi, 0 and d/dt 2 pi e^{-2t} = -4 pi.
  const double worst = std::max({a.residual, b.residual, c.residual, std::abs(a.lhs - 2 * kPi),
                                 std::abs(b.lhs), std::abs(c.lhs + 4 * kPi)});
  LedgerEntry e = make_entry("winding_derivative",
                             "d/dt integral of Wind(c_t, x) beta = line integral of i_{d_t c_t} beta",
                             worst, tolerance);
  e.detail = {{"growing_circle", {{"lhs", a.lhs}, {"rhs", a.rhs}, {"residual", a.residual}}},
              {"translated_limacon", {{"lhs", b.lhs}, {"rhs", b.rhs}, {"residual", b.residual}}},
              {"twofold_shrinking", {{"lhs", c.lhs}, {"rhs", c.rhs}, {"residual", c.residual}}},
              {"resolution", resolution}};
  return e;
}

LedgerEntry check_winding_volume(std::uint64_t seed, int families, int resolution, double tolerance) {
  const auto corpus = cusp::epicycle_corpus(static_cast<std::size_t>(families), seed);
  cusp::QuadratureSettings q;
  q.resolution = resolution;
  const auto A = cusp::chart_primitive_A();
  const auto B = cusp::chart_primitive_B();
  double identity = 0.0, independence = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto F = cusp::make_family(corpus[i], i, 0.0, 4.0);
    const double va = cusp::V_of_t(F, A, 0.0, 3.0, q);
    const double vb = cusp::V_of_t(F, B, 0.0, 3.0, q);
    const double w = cusp::winding_dvol_integral(F, 0.0, 3.0, q);
    const double scale = std::max(1.0, std::abs(w));
    identity = std::max({identity, std::abs(va - w) / scale, std::abs(vb - w) / scale});
    independence = std::max(independence, std::abs(va - vb) / std::max(1.0, std::abs(va)));
  }
  LedgerEntry e = make_entry("winding_volume_identity",
                             "V(t) = integral over [T, t] x R^2 of Wind(c_s, x) dVol, for both primitives",
                             std::max(identity, independence), tolerance);
  e.detail = {{"families", families}, {"identity", identity}, {"primitive_independence", independence},
              {"resolution", resolution}};
  return e;
}

std::vector<LedgerEntry> run_all(const VerifyOptions& o) {
  if (o.resolution < 16) throw Error(ErrorCode::InvalidArgument, "verify resolution must be >= 16");
  const double ov = o.tolerance_override;
  auto tol = [ov](double d) { return ov > 0.0 ? ov : d; };
  Rng rng(o.seed);
  std::vector<LedgerEntry> out;
  out.push_back(check_polar_metric(rng, 100, tol(kMetricTolerance)));
  out.push_back(check_connection(rng, 100, tol(kConnectionTolerance)));
  out.push_back(check_revolution_curvature({0.25, 0.5, 0.75, 0.9}, 10, tol(kCurvatureTolerance)));
  out.push_back(check_winding_bound(rng, 200, 50));
  out.push_back(check_stokes(rng, 20, o.resolution, tol(kStokesTolerance)));
  out.push_back(check_winding_derivative(o.resolution, tol(kWindingDerivativeTolerance)));
  out.push_back(check_winding_volume(o.seed, 20, o.resolution, tol(kVolumeIdentityTolerance)));
  return out;
}

nlohmann::json ledger_json(const std::vector<LedgerEntry>& entries, const VerifyOptions& o) {
  nlohmann::json list = nlohmann::json::array();
  bool all = true;
  for (const auto& e : entries) {
    list.push_back(e.to_json());
    all = all && e.passed;
  }
  return {{"seed", o.seed}, {"resolution", o.resolution}, {"all_pass", all}, {"entries", list}};
}

}  // namespace hypcusp::verify
