#include "cusp_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "error.hpp"
#include "random.hpp"

namespace hypcusp::cusp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Residual above which the exponential tail closure is refused.
constexpr double kTailFitResidual = 1e-3;

// 3-point Gauss-Legendre on [a, b].
template <class F>
double gauss3(F&& g, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double off = half * std::sqrt(3.0 / 5.0);
  return half * (5.0 / 9.0 * g(mid - off) + 8.0 / 9.0 * g(mid) + 5.0 / 9.0 * g(mid + off));
}

// int_t^{t_end} integrand(f, f') by composite Simpson on grid samples, with
// the off-grid leading piece and any odd trailing interval on the Hermite
// interpolant.
template <class F>
double grid_integral(const profile::Profile& p, double t, F&& integrand) {
  if (!p.contains(t)) {
    std::ostringstream msg;
    msg << "tail integral start t=" << t << " outside the profile grid [" << p.t0() << ", "
        << p.t_end() << "]";
    throw Error(ErrorCode::Domain, msg.str());
  }
  const std::size_t last = p.size() - 1;
  auto first = static_cast<std::size_t>(std::ceil((t - p.t0()) / p.dt() - 1e-9));
  first = std::min(first, last);
  auto at = [&](double u) {
    const auto s = p.interpolate(u);
    return integrand(s.f, s.fp);
  };
  auto sample = [&](std::size_t i) { return integrand(p.f()[i], p.fp()[i]); };

  double total = 0.0;
  const double t_first = p.t_at(first);
  if (t_first > t) total += gauss3(at, t, t_first);

  std::size_t end = last;
  if ((end - first) % 2 == 1) {
    total += gauss3(at, p.t_at(end - 1), p.t_at(end));
    --end;
  }
  double simpson = 0.0;
  for (std::size_t i = first; i + 2 <= end; i += 2) {
    simpson += sample(i) + 4.0 * sample(i + 1) + sample(i + 2);
  }
  return total + simpson * p.dt() / 3.0;
}

profile::DecayFit closing_fit(const profile::Profile& p) {
  const std::size_t n = std::max<std::size_t>(10, p.size() / 5);
  if (p.size() < n) throw Error(ErrorCode::InvalidArgument, "profile too short to close the tail");
  const double start = p.t_at(p.size() - n);
  const profile::DecayFit fit = profile::decay_fit(p, {start, p.t_end()});
  if (!(fit.rate > 0.0) || fit.residual > kTailFitResidual) {
    std::ostringstream msg;
    msg << "exponential tail closure refused: fitted rate " << fit.rate << ", residual "
        << fit.residual << " (limit " << kTailFitResidual << ")";
    throw Error(ErrorCode::Numerical, msg.str());
  }
  return fit;
}

double area_density(double f, double fp) {
  const double a = 1.0 + f * f;
  return kTwoPi * f * std::sqrt(a + fp * fp / a);
}

double volume_density(double f, double) { return kPi * f * f; }

double simpson_nodes(double a, double b, double step) {
  const double len = b - a;
  auto m = static_cast<std::size_t>(std::ceil(len / step - 1e-9));
  m = std::max<std::size_t>(2, m + (m % 2));
  return static_cast<double>(m);
}

// Composite Simpson of g over [a, b] with an even count of intervals near `step`.
template <class G>
double simpson(G&& g, double a, double b, double step) {
  if (b <= a) return 0.0;
  const auto m = static_cast<std::size_t>(simpson_nodes(a, b, step));
  const double h = (b - a) / static_cast<double>(m);
  double acc = g(a) + g(b);
  for (std::size_t i = 1; i < m; ++i) {
    acc += (i % 2 == 1 ? 4.0 : 2.0) * g(a + h * static_cast<double>(i));
  }
  return acc * h / 3.0;
}

void check_range(const CuspFamily& family, double T, double t) {
  if (!(T <= t) || T < family.t_min - 1e-12 || t > family.t_max + 1e-12) {
    std::ostringstream msg;
    msg << "family '" << family.id << "': need t_min <= T <= t <= t_max, got T=" << T << ", t=" << t
        << " on [" << family.t_min << ", " << family.t_max << "]";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

// Density integrated over the thin regions between each polygon edge of the
// slice and the arc it cuts off, with signs so that polygon plus correction
// approximates the smooth slice.
double arc_segment_correction(const CuspFamily& family, double t, std::size_t samples,
                              const std::function<double(double, double)>& density) {
  const double h = kTwoPi / static_cast<double>(samples);
  double acc = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double s0 = h * static_cast<double>(i), sm = s0 + 0.5 * h, s1 = s0 + h;
    const Point2 c0 = family.eval(s0, t), cm = family.eval(sm, t), c1 = family.eval(s1, t);
    // (1/2) int cross(c - c0, c') ds over the arc, by Simpson.
    const double area =
        h / 12.0 * (4.0 * plane::cross(cm - c0, family.partial_s(sm, t)) +
                    plane::cross(c1 - c0, family.partial_s(s1, t)));
    const Point2 at = 0.5 * (cm + 0.5 * (c0 + c1));
    acc += area * density(at.x, at.y);
  }
  return acc;
}

double slice_integral(const CuspFamily& family, double t, const QuadratureSettings& q,
                      const std::function<double(double, double)>& density) {
  const plane::SampledLoop loop = family.slice(t, q.loop_samples);
  const plane::Grid2D grid = plane::Grid2D::covering(loop, q.resolution);
  return plane::winding_weighted_integral(loop, density, grid) +
         arc_segment_correction(family, t, q.loop_samples, density);
}

double slice_term(const CuspFamily& family, const ChartPrimitive& alpha, double t,
                  const QuadratureSettings& q) {
  return slice_integral(family, t, q, [&](double x, double y) { return alpha.cartesian(t, x, y).S; });
}

// int_0^{2 pi} of the ds^dt coefficient of the pulled-back primitive.
double lateral_density(const CuspFamily& family, const ChartPrimitive& alpha, double t,
                       std::size_t samples) {
  double acc = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = kTwoPi * static_cast<double>(i) / static_cast<double>(samples);
    const Point2 c = family.eval(s, t);
    const Point2 cs = family.partial_s(s, t);
    const Point2 ct = family.partial_t(s, t);
    const auto a = alpha.cartesian(t, c.x, c.y);
    // dt^dx -> -x_s ds^dt, dt^dy -> -y_s ds^dt, dx^dy -> (x_s y_t - x_t y_s) ds^dt
    acc += -a.P * cs.x - a.Q * cs.y + a.S * (cs.x * ct.y - ct.x * cs.y);
  }
  return acc * kTwoPi / static_cast<double>(samples);
}

double v_of_t_unchecked(const CuspFamily& family, const ChartPrimitive& alpha, double T, double t,
                        const QuadratureSettings& q) {
  if (t == T) return 0.0;
  const double lateral = simpson(
      [&](double u) { return lateral_density(family, alpha, u, q.loop_samples); }, T, t,
      q.lateral_step);
  return lateral - slice_term(family, alpha, T, q) + slice_term(family, alpha, t, q);
}

// Least-squares slope and intercept of y against x.
std::pair<double, double> affine_fit(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double xm = sx / n, ym = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  const double slope = sxy / sxx;
  return {slope, ym - slope * xm};
}

}  // namespace

double area_tail(const profile::Profile& p, double t) {
  const profile::DecayFit fit = closing_fit(p);
  const double end = area_density(p.f().back(), p.fp().back()) / fit.rate;
  return grid_integral(p, t, area_density) + end;
}

double volume_tail_revolution(const profile::Profile& p, double t) {
  const profile::DecayFit fit = closing_fit(p);
  const double f_end = p.f().back();
  const double end = kPi * f_end * f_end / (2.0 * fit.rate);
  return grid_integral(p, t, volume_density) + end;
}

TailEstimates tail_estimates(const profile::Profile& p, std::span<const double> t_grid) {
  TailEstimates out;
  for (double t : t_grid) {
    out.t.push_back(t);
    out.area.push_back(area_tail(p, t));
    out.volume.push_back(volume_tail_revolution(p, t));
  }
  if (out.t.size() >= 10) {
    out.area_rate = profile::fit_log_affine(out.t, out.area).rate;
    out.volume_rate = profile::fit_log_affine(out.t, out.volume).rate;
  }
  return out;
}

ChartPrimitive::ChartPrimitive(std::string name, Coefficient dt_dR, Coefficient dR_dtheta,
                               Coefficient dt_dtheta)
    : name_(std::move(name)),
      dt_dR_(std::move(dt_dR)),
      dR_dtheta_(std::move(dR_dtheta)),
      dt_dtheta_(std::move(dt_dtheta)) {
  const double probes[][3] = {{0.0, 0.5, 0.0}, {1.3, 0.2, 2.1}, {-0.7, 1.7, 4.0}, {4.2, 0.9, -1.0}};
  for (const auto& pr : probes) {
    const double density = exterior_derivative_density(pr[0], pr[1], pr[2]);
    if (std::abs(density - pr[1]) > 1e-6 * (1.0 + pr[1])) {
      std::ostringstream msg;
      msg << "chart primitive '" << name_ << "': d(alpha) density " << density
          << " differs from the volume density R=" << pr[1];
      throw Error(ErrorCode::InvalidArgument, msg.str());
    }
  }
}

double ChartPrimitive::exterior_derivative_density(double t, double R, double theta, double h) const {
  // d(a dt^dR + b dR^dth + c dt^dth) = (d_th a + d_t b - d_R c) dt^dR^dth
  const double da = (dt_dR_(t, R, theta + h) - dt_dR_(t, R, theta - h)) / (2 * h);
  const double db = (dR_dtheta_(t + h, R, theta) - dR_dtheta_(t - h, R, theta)) / (2 * h);
  const double dc = (dt_dtheta_(t, R + h, theta) - dt_dtheta_(t, R - h, theta)) / (2 * h);
  return da + db - dc;
}

ChartPrimitive::Cartesian ChartPrimitive::cartesian(double t, double x, double y) const {
  double R = std::hypot(x, y);
  double theta = std::atan2(y, x);
  if (R < 1e-12) {
    // Limit along theta = 0 at the axis.
    R = 1e-12;
    theta = 0.0;
    x = R;
    y = 0.0;
  }
  const double a = dt_dR_(t, R, theta);
  const double b = dR_dtheta_(t, R, theta);
  const double c = dt_dtheta_(t, R, theta);
  // dR = (x dx + y dy)/R, dtheta = (x dy - y dx)/R^2, dR^dtheta = dx^dy / R
  return {a * x / R - c * y / (R * R), a * y / R + c * x / (R * R), b / R};
}

ChartPrimitive chart_primitive_A() {
  return ChartPrimitive(
      "A", [](double, double, double) { return 0.0; }, [](double, double, double) { return 0.0; },
      [](double, double R, double) { return -0.5 * R * R; });
}

ChartPrimitive chart_primitive_B() {
  return ChartPrimitive(
      "B", [](double, double, double) { return 0.0; },
      [](double t, double R, double) { return t * R; }, [](double, double, double) { return 0.0; });
}

plane::SampledLoop CuspFamily::slice(double t, std::size_t samples) const {
  if (t < t_min - 1e-12 || t > t_max + 1e-12) {
    std::ostringstream msg;
    msg << "family '" << id << "' sliced outside [" << t_min << ", " << t_max << "] at t=" << t;
    throw Error(ErrorCode::Domain, msg.str());
  }
  return plane::SampledLoop::sample([&](double s) { return eval(s, t); }, samples);
}

Point2 CuspFamily::partial_s(double s, double t) const {
  if (d_ds) return d_ds(s, t);
  constexpr double h = 1e-5;
  return (1.0 / (2 * h)) * (eval(s + h, t) - eval(s - h, t));
}

Point2 CuspFamily::partial_t(double s, double t) const {
  if (d_dt) return d_dt(s, t);
  constexpr double h = 1e-5;
  if (t - h < t_min) {
    return (1.0 / (2 * h)) * (-3.0 * eval(s, t) + 4.0 * eval(s, t + h) - eval(s, t + 2 * h));
  }
  if (t + h > t_max) {
    return (1.0 / (2 * h)) * (3.0 * eval(s, t) - 4.0 * eval(s, t - h) + eval(s, t - 2 * h));
  }
  return (1.0 / (2 * h)) * (eval(s, t + h) - eval(s, t - h));
}

CuspFamily epicycle_family(std::string id, double rho0, double rho_rate, int n, double mu0,
                           double mu_rate, int m, double t_min, double t_max) {
  if (!(t_min < t_max)) throw Error(ErrorCode::InvalidArgument, "family needs t_min < t_max");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "epicycle_family: index must be >= 1");
  if (!(rho0 > 0.0) || !(mu0 >= 0.0) || !(rho_rate > 0.0) || (mu0 > 0.0 && !(mu_rate > 0.0))) {
    throw Error(ErrorCode::InvalidArgument,
                "epicycle_family: need rho0 > 0, mu0 >= 0 and positive decay rates");
  }
  CuspFamily f;
  f.id = std::move(id);
  f.eval = [=](double s, double t) {
    const double rho = rho0 * std::exp(-rho_rate * t), mu = mu0 * std::exp(-mu_rate * t);
    return Point2{rho * std::cos(n * s) + mu * std::cos(m * s),
                  rho * std::sin(n * s) + mu * std::sin(m * s)};
  };
  f.d_ds = [=](double s, double t) {
    const double rho = rho0 * std::exp(-rho_rate * t), mu = mu0 * std::exp(-mu_rate * t);
    return Point2{-n * rho * std::sin(n * s) - m * mu * std::sin(m * s),
                  n * rho * std::cos(n * s) + m * mu * std::cos(m * s)};
  };
  f.d_dt = [=](double s, double t) {
    const double rho = rho0 * std::exp(-rho_rate * t), mu = mu0 * std::exp(-mu_rate * t);
    return Point2{-rho_rate * rho * std::cos(n * s) - mu_rate * mu * std::cos(m * s),
                  -rho_rate * rho * std::sin(n * s) - mu_rate * mu * std::sin(m * s)};
  };
  f.t_min = t_min;
  f.t_max = t_max;
  f.index = n;
  f.nominal_rate = mu0 == 0.0 ? rho_rate : std::min(rho_rate, mu_rate);
  return f;
}

CuspFamily profile_family(std::string id, std::shared_ptr<const profile::Profile> p, int n,
                          double nominal_rate) {
  if (!p) throw Error(ErrorCode::InvalidArgument, "profile_family: null profile");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "profile_family: index must be >= 1");
  CuspFamily f;
  f.id = std::move(id);
  f.eval = [p, n](double s, double t) {
    const double r = p->interpolate(t).f;
    return Point2{r * std::cos(n * s), r * std::sin(n * s)};
  };
  f.d_ds = [p, n](double s, double t) {
    const double r = p->interpolate(t).f;
    return Point2{-n * r * std::sin(n * s), n * r * std::cos(n * s)};
  };
  f.d_dt = [p, n](double s, double t) {
    const double rp = p->interpolate(t).fp;
    return Point2{rp * std::cos(n * s), rp * std::sin(n * s)};
  };
  f.t_min = p->t0();
  f.t_max = p->t_end();
  f.index = n;
  f.nominal_rate = nominal_rate;
  return f;
}

double epicycle_slice_area(double rho, int n, double mu, int m) {
  if (n == m) return kPi * n * (rho + mu) * (rho + mu);
  return kPi * (n * rho * rho + m * mu * mu);
}

std::vector<EpicycleParams> epicycle_corpus(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EpicycleParams> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    EpicycleParams p{};
    p.n = 1 + static_cast<int>(i % 3);
    p.m = p.n + rng.integer(1, 3);
    p.rho0 = rng.uniform(0.5, 1.5);
    p.rho_rate = rng.uniform(0.3, 0.8);
    // mu m^2 < rho n^2 with margin; mu decays at least as fast as rho.
    p.mu0 = rng.uniform(0.05, 0.5) * p.rho0 * p.n * p.n / (p.m * p.m);
    p.mu_rate = p.rho_rate + rng.uniform(0.0, 0.3);
    out.push_back(p);
  }
  return out;
}

CuspFamily make_family(const EpicycleParams& params, std::size_t id, double t_min, double t_max) {
  return epicycle_family("epicycle-" + std::to_string(id), params.rho0, params.rho_rate, params.n,
                         params.mu0, params.mu_rate, params.m, t_min, t_max);
}

void orientation_self_test() {
  static std::once_flag once;
  std::call_once(once, [] {
    const CuspFamily unit = epicycle_family("self-test", 1.0, 0.5, 1, 0.0, 0.0, 2, 0.0, 1.0);
    QuadratureSettings coarse;
    coarse.loop_samples = 256;
    coarse.resolution = 128;
    const double expected = kPi * (1.0 - std::exp(-1.0));
    for (const ChartPrimitive& alpha : {chart_primitive_A(), chart_primitive_B()}) {
      const double v = v_of_t_unchecked(unit, alpha, 0.0, 1.0, coarse);
      if (!(std::abs(v - expected) < 1e-2 * expected)) {
        std::ostringstream msg;
        msg << "V(t) orientation self-test failed for primitive " << alpha.name() << ": got " << v
            << ", expected " << expected;
        throw Error(ErrorCode::Numerical, msg.str());
      }
    }
  });
}

double V_of_t(const CuspFamily& family, const ChartPrimitive& alpha, double T, double t,
              const QuadratureSettings& q) {
  orientation_self_test();
  check_range(family, T, t);
  return v_of_t_unchecked(family, alpha, T, t, q);
}

double winding_dvol_integral(const CuspFamily& family, double T, double t,
                             const QuadratureSettings& q) {
  check_range(family, T, t);
  return simpson(
      [&](double u) { return slice_integral(family, u, q, [](double, double) { return 1.0; }); }, T, t,
      q.slice_step);
}

nlohmann::json DecayEnvelopeReport::to_json() const {
  return {{"A", A},
          {"fitted_rate", fitted_rate},
          {"threshold_rate", threshold_rate},
          {"holds", holds},
          {"slices", slices}};
}

DecayEnvelopeReport decay_validator(const CuspFamily& family, const profile::CurvatureLevel& k,
                                    double delta, std::size_t slices, std::size_t samples) {
  if (slices < 20) throw Error(ErrorCode::InvalidArgument, "decay_validator needs >= 20 slices");
  DecayEnvelopeReport r;
  r.slices = slices;
  r.threshold_rate = k.lambda() - delta;
  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < slices; ++i) {
    const double t = family.t_min + (family.t_max - family.t_min) * static_cast<double>(i) /
                                        static_cast<double>(slices - 1);
    double biggest = 0.0;
    for (std::size_t j = 0; j < samples; ++j) {
      const double s = kTwoPi * static_cast<double>(j) / static_cast<double>(samples);
      biggest = std::max(biggest, plane::norm(family.eval(s, t)));
    }
    ts.push_back(t);
    logs.push_back(std::log(biggest));
    r.A = std::max(r.A, biggest * std::exp(r.threshold_rate * t));
  }
  r.fitted_rate = -affine_fit(ts, logs).first;
  r.holds = r.fitted_rate >= r.threshold_rate - 1e-9 * std::max(1.0, std::abs(r.threshold_rate));
  return r;
}

nlohmann::json ConvergenceReport::to_json() const {
  return {{"family_id", family_id},
          {"primitive", primitive},
          {"T", T},
          {"t_ladder", t_ladder},
          {"V_values", V_values},
          {"diffs", diffs},
          {"fitted_rate", fitted_rate},
          {"extrapolated_limit", extrapolated_limit},
          {"tail_fraction", tail_fraction}};
}

ConvergenceReport convergence_report(const CuspFamily& family, const ChartPrimitive& alpha, double T,
                                     double horizon, std::size_t steps, const QuadratureSettings& q) {
  if (steps < 3) throw Error(ErrorCode::InvalidArgument, "convergence ladder needs >= 3 steps");
  if (!(horizon > T)) throw Error(ErrorCode::InvalidArgument, "convergence ladder needs horizon > T");
  check_range(family, T, horizon);

  ConvergenceReport r;
  r.family_id = family.id;
  r.primitive = alpha.name();
  r.T = T;
  const double dt = (horizon - T) / static_cast<double>(steps);
  for (std::size_t j = 0; j <= steps; ++j) {
    const double t = j == steps ? horizon : T + dt * static_cast<double>(j);
    r.t_ladder.push_back(t);
    r.V_values.push_back(V_of_t(family, alpha, T, t, q));
  }

  // Differences below the summation floor carry no rate information.
  const double floor = 1e-12 * std::max(1.0, std::abs(r.V_values.back()));
  r.monotone = true;
  double previous = 0.0;
  std::vector<double> mids, logs;
  for (std::size_t j = 1; j <= steps; ++j) {
    const double d = r.V_values[j] - r.V_values[j - 1];
    r.diffs.push_back(d);
    if (std::abs(d) <= floor) continue;
    if (d < 0.0 || (!mids.empty() && d > previous * (1.0 + 1e-9))) r.monotone = false;
    if (d > 0.0) {
      mids.push_back(0.5 * (r.t_ladder[j] + r.t_ladder[j - 1]));
      logs.push_back(std::log(d));
      previous = d;
    }
  }

  const double v_last = r.V_values.back();
  if (mids.size() >= 2) {
    r.fitted_rate = -affine_fit(mids, logs).first;
    const double ratio = std::exp(-r.fitted_rate * dt);
    const double last = std::abs(r.diffs.back()) <= floor ? 0.0 : r.diffs.back();
    r.extrapolated_limit = ratio < 1.0 ? v_last + last * ratio / (1.0 - ratio) : v_last;
  } else {
    r.extrapolated_limit = v_last;
  }
  r.tail_fraction = r.extrapolated_limit != 0.0
                        ? std::abs(r.extrapolated_limit - v_last) / std::abs(r.extrapolated_limit)
                        : 1.0;
  r.rate_matches = family.nominal_rate <= 0.0 ||
                   std::abs(r.fitted_rate - 2.0 * family.nominal_rate) <= 0.1 * 2.0 * family.nominal_rate;
  r.converged = r.monotone && r.rate_matches && r.tail_fraction < 0.01;
  return r;
}

}  // namespace hypcusp::cusp
