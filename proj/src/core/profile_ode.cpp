#include "profile_ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "hyper3.hpp"

namespace hypcusp::profile {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool regular(double f, double fp) {
  return std::isfinite(f) && std::isfinite(fp) && f <= kBlowUpValue &&
         std::abs(fp) <= kBlowUpSlope;
}

}  // namespace

CurvatureLevel::CurvatureLevel(double k) : k_(k), lambda_(std::sqrt(1.0 - k)) {
  if (!(k > 0.0 && k < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "curvature level must lie in (0, 1), got " + fmt17(k));
  }
}

Profile::Profile(double t0, double dt, std::vector<double> f, std::vector<double> fp,
                 std::string diagnostic)
    : t0_(t0), dt_(dt), f_(std::move(f)), fp_(std::move(fp)), diagnostic_(std::move(diagnostic)) {
  if (!(dt_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "profile step must be positive");
  if (f_.size() != fp_.size() || f_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "profile needs two or more (f, f') samples");
  }
  for (double v : f_) {
    if (!(v > 0.0)) throw Error(ErrorCode::Domain, "profile values must be strictly positive");
  }
}

bool Profile::contains(double t) const {
  const double slack = 1e-9 * dt_;
  return t >= t0_ - slack && t <= t_end() + slack;
}

Profile::Sample Profile::interpolate(double t) const {
  if (!contains(t)) {
    throw Error(ErrorCode::Domain, "profile evaluated outside its grid at t=" + fmt17(t));
  }
  const double u = (t - t0_) / dt_;
  auto i = static_cast<std::size_t>(std::clamp(std::floor(u), 0.0, double(size() - 2)));
  const double s = u - static_cast<double>(i);
  const double f0 = f_[i], f1 = f_[i + 1];
  const double m0 = fp_[i] * dt_, m1 = fp_[i + 1] * dt_;

  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  return {h00 * f0 + h10 * m0 + h01 * f1 + h11 * m1,
          (d00 * f0 + d10 * m0 + d01 * f1 + d11 * m1) / dt_};
}

double curvature_from_profile(double f, double fp, double fpp) {
  if (!(f > 0.0)) throw Error(ErrorCode::Domain, "curvature_from_profile: f must be positive");
  const double a = 1.0 + f * f;
  const double q = a + fp * fp / a;
  return (-fpp * a + f * a * a + 3.0 * f * fp * fp) / (f * q * q);
}

double fpp_from_curvature(double f, double fp, const CurvatureLevel& k) {
  if (!(f > 0.0)) throw Error(ErrorCode::Domain, "fpp_from_curvature: f must be positive");
  const double a = 1.0 + f * f;
  const double q = a + fp * fp / a;
  return (f * a * a + 3.0 * f * fp * fp - k.k() * f * q * q) / a;
}

Trajectory integrate_rk4(double t0, double f0, double fp0, const CurvatureLevel& k, double dt,
                         std::size_t steps) {
  Trajectory out;
  out.t.reserve(steps + 1);
  out.f.reserve(steps + 1);
  out.fp.reserve(steps + 1);
  out.t.push_back(t0);
  out.f.push_back(f0);
  out.fp.push_back(fp0);

  auto rhs = [&](double f, double fp) -> std::array<double, 2> {
    return {fp, fpp_from_curvature(f, fp, k)};
  };

  double f = f0, fp = fp0;
  for (std::size_t n = 1; n <= steps; ++n) {
    if (f < kCuspFloor) {
      out.hit_floor = true;
      break;
    }
    const auto k1 = rhs(f, fp);
    const double f2 = f + 0.5 * dt * k1[0];
    if (!(f2 > 0.0)) { out.hit_floor = true; break; }
    const auto k2 = rhs(f2, fp + 0.5 * dt * k1[1]);
    const double f3 = f + 0.5 * dt * k2[0];
    if (!(f3 > 0.0)) { out.hit_floor = true; break; }
    const auto k3 = rhs(f3, fp + 0.5 * dt * k2[1]);
    const double f4 = f + dt * k3[0];
    if (!(f4 > 0.0)) { out.hit_floor = true; break; }
    const auto k4 = rhs(f4, fp + dt * k3[1]);
    const double fn = f + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    const double fpn = fp + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    if (!regular(fn, fpn)) {
      out.blew_up = true;
      break;
    }
    if (!(fn >= kCuspFloor)) {
      out.hit_floor = true;
      break;
    }
    f = fn;
    fp = fpn;
    out.t.push_back(t0 + dt * static_cast<double>(n));
    out.f.push_back(f);
    out.fp.push_back(fp);
  }
  return out;
}

Profile integrate_backward(double eps, double T, const CurvatureLevel& k, double dt,
                           OnBlowUp policy) {
  if (!(eps > 0.0 && eps < 0.1)) {
    throw Error(ErrorCode::InvalidArgument, "integrate_backward: seed eps must lie in (0, 0.1)");
  }
  if (!(T > 0.0) || !(dt > 0.0) || dt > T) {
    throw Error(ErrorCode::InvalidArgument, "integrate_backward: requires T > 0 and 0 < dt <= T");
  }
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const double step = T / static_cast<double>(steps);

  Trajectory tr = integrate_rk4(T, eps, -k.lambda() * eps, k, -step, steps);
  if (tr.f.size() < steps + 1) {
    const double reached = tr.t.back();
    std::ostringstream msg;
    msg << "integrate_backward: profile left the regular range (f <= " << kBlowUpValue
        << ", |f'| <= " << kBlowUpSlope << ") before t=0; last regular sample at t=" << reached;
    if (policy == OnBlowUp::Throw || tr.f.size() < 2) throw BlowUpError(msg.str(), reached);
    std::reverse(tr.f.begin(), tr.f.end());
    std::reverse(tr.fp.begin(), tr.fp.end());
    const double t0 = T - step * static_cast<double>(tr.f.size() - 1);
    return Profile(t0, step, std::move(tr.f), std::move(tr.fp), msg.str());
  }
  std::reverse(tr.f.begin(), tr.f.end());
  std::reverse(tr.fp.begin(), tr.fp.end());
  return Profile(0.0, step, std::move(tr.f), std::move(tr.fp));
}

Profile shoot_forward(double f0, const CurvatureLevel& k, double T, double dt) {
  if (!(f0 > 0.0 && f0 <= 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "shoot_forward: f0 must lie in (0, 0.5]");
  }
  if (!(T > 0.0) || !(dt > 0.0) || dt > T) {
    throw Error(ErrorCode::InvalidArgument, "shoot_forward: requires T > 0 and 0 < dt <= T");
  }
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const double step = T / static_cast<double>(steps);

  // +1: the shot turns upward (slope too shallow); -1: reaches the cusp floor
  // (slope too steep); 0: stayed positive, decreasing and bounded up to T.
  auto classify = [&](double slope) {
    const Trajectory tr = integrate_rk4(0.0, f0, slope, k, step, steps);
    if (tr.hit_floor) return -1;
    if (tr.blew_up) return +1;
    for (double v : tr.fp) {
      if (v > 0.0) return +1;
    }
    return 0;
  };

  double lo = -(k.lambda() + 1.0) * f0;
  double hi = 0.0;
  if (classify(lo) != -1 || classify(hi) != +1) {
    throw Error(ErrorCode::IntegrationFailure,
                "shoot_forward: bracket [-(lambda+1) f0, 0] does not separate the two branches");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const int c = classify(mid);
    if (c < 0) {
      lo = mid;
    } else if (c > 0) {
      hi = mid;
    } else {
      lo = hi = mid;
      break;
    }
  }

  const Trajectory low = integrate_rk4(0.0, f0, lo, k, step, steps);
  const Trajectory high = integrate_rk4(0.0, f0, hi, k, step, steps);
  const Trajectory mid = integrate_rk4(0.0, f0, 0.5 * (lo + hi), k, step, steps);
  std::size_t n = std::min({low.f.size(), high.f.size(), mid.f.size()});
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(high.f[i] - low.f[i]) > 1e-6 * mid.f[i] || mid.fp[i] >= 0.0) {
      n = i;
      break;
    }
  }
  if (n < 2) {
    throw Error(ErrorCode::IntegrationFailure, "shoot_forward: bisection did not resolve a profile");
  }
  std::string diagnostic;
  if (n < steps + 1) {
    std::ostringstream msg;
    msg << "shoot_forward: bracketing shots separate at t=" << step * static_cast<double>(n - 1)
        << "; profile truncated before T=" << T;
    diagnostic = msg.str();
  }
  std::vector<double> f(mid.f.begin(), mid.f.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<double> fp(mid.fp.begin(), mid.fp.begin() + static_cast<std::ptrdiff_t>(n));
  return Profile(0.0, step, std::move(f), std::move(fp), std::move(diagnostic));
}

FitWindow default_fit_window(const Profile& p) {
  const double length = p.t_end() - p.t0();
  return {p.t0() + length / 3.0, p.t_end() - 0.1 * length};
}

DecayFit fit_log_affine(std::span<const double> t, std::span<const double> values) {
  if (t.size() != values.size() || t.size() < 10) {
    throw Error(ErrorCode::InvalidArgument, "decay fit needs at least 10 samples");
  }
  const auto n = static_cast<double>(t.size());
  double st = 0, sy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(values[i] > 0.0)) throw Error(ErrorCode::Domain, "decay fit needs positive values");
    st += t[i];
    sy += std::log(values[i]);
  }
  const double tm = st / n, ym = sy / n;
  double stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double dt = t[i] - tm;
    stt += dt * dt;
    sty += dt * (std::log(values[i]) - ym);
  }
  const double slope = sty / stt;
  const double intercept = ym - slope * tm;

  DecayFit fit;
  fit.rate = -slope;
  fit.amplitude = std::exp(intercept);
  fit.window = {t.front(), t.back()};
  for (std::size_t i = 0; i < t.size(); ++i) {
    fit.residual = std::max(fit.residual, std::abs(std::log(values[i]) - (intercept + slope * t[i])));
  }
  return fit;
}

namespace {

// Grid indices [first, last] inside the window.
std::pair<std::size_t, std::size_t> window_indices(const Profile& p, FitWindow w) {
  if (!(w.start < w.end) || !p.contains(w.start) || !p.contains(w.end)) {
    throw Error(ErrorCode::InvalidArgument, "fit window must be an increasing range inside the grid");
  }
  const auto first = static_cast<std::size_t>(std::ceil((w.start - p.t0()) / p.dt() - 1e-9));
  const auto last = std::min(p.size() - 1,
                             static_cast<std::size_t>(std::floor((w.end - p.t0()) / p.dt() + 1e-9)));
  if (last < first || last - first + 1 < 10) {
    throw Error(ErrorCode::InvalidArgument, "fit window shorter than 10 samples");
  }
  return {first, last};
}

}  // namespace

DecayFit decay_fit(const Profile& p, FitWindow window) {
  const auto [first, last] = window_indices(p, window);
  std::vector<double> t, v;
  for (std::size_t i = first; i <= last; ++i) {
    t.push_back(p.t_at(i));
    v.push_back(p.f()[i]);
  }
  return fit_log_affine(t, v);
}

DerivativeCheck derivative_rate_check(const Profile& p, const CurvatureLevel& k, int order,
                                      FitWindow window) {
  if (order < 0 || order > 4) {
    throw Error(ErrorCode::InvalidArgument, "derivative_rate_check: order must lie in [0, 4]");
  }
  const auto [first, last] = window_indices(p, window);
  const std::size_t reach = order >= 2 ? 1 : 0;
  if (first < reach || last + reach >= p.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "derivative_rate_check: stencil runs past the grid ends; shrink the window");
  }

  const auto f = p.f();
  const auto fp = p.fp();
  auto fpp = [&](std::size_t i) { return fpp_from_curvature(f[i], fp[i], k); };
  const double h = p.dt();

  DerivativeCheck out;
  std::vector<double> t, v;
  bool signs = true;
  for (std::size_t i = first; i <= last; ++i) {
    double d = 0.0;
    switch (order) {
      case 0: d = f[i]; break;
      case 1: d = fp[i]; break;
      case 2: d = fpp(i); break;
      case 3: d = (fpp(i + 1) - fpp(i - 1)) / (2.0 * h); break;
      case 4: d = (fpp(i + 1) - 2.0 * fpp(i) + fpp(i - 1)) / (h * h); break;
    }
    const double signed_value = (order % 2 == 0) ? d : -d;
    if (!(signed_value > 0.0)) signs = false;
    t.push_back(p.t_at(i));
    v.push_back(std::abs(d));

    if (order >= 2 && i > 0 && i + 1 < p.size()) {
      const double fd = (fp[i + 1] - fp[i - 1]) / (2.0 * h);
      out.fd_cross_check = std::max(out.fd_cross_check, std::abs(fd - fpp(i)) / std::abs(fpp(i)));
    }
  }
  out.sign_pattern = signs;
  out.fit = fit_log_affine(t, v);
  return out;
}

double extrinsic_curvature_oracle(const std::function<double(double)>& f, double t, double h,
                                  double theta) {
  using Vec3 = std::array<double, 3>;
  const double f0 = f(t);
  if (!(h > 0.0) || !(f0 > h)) {
    throw Error(ErrorCode::Numerical,
                "extrinsic_curvature_oracle: first fundamental form degenerate (f <= h)");
  }

  auto embed = [&](double u, double th) -> Vec3 {
    const auto p = hyper3::psi_gamma({u, f(u), th});
    return {p.x, p.y, p.t};
  };
  auto comb = [](const Vec3& a, double ca, const Vec3& b, double cb) {
    return Vec3{ca * a[0] + cb * b[0], ca * a[1] + cb * b[1], ca * a[2] + cb * b[2]};
  };
  auto dot = [](const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; };

  const Vec3 x0 = embed(t, theta);
  const Vec3 xup = embed(t + h, theta), xum = embed(t - h, theta);
  const Vec3 xvp = embed(t, theta + h), xvm = embed(t, theta - h);
  const Vec3 xpp = embed(t + h, theta + h), xpm = embed(t + h, theta - h);
  const Vec3 xmp = embed(t - h, theta + h), xmm = embed(t - h, theta - h);

  Vec3 xu, xv, xuu, xvv, xuv;
  for (int d = 0; d < 3; ++d) {
    xu[d] = (xup[d] - xum[d]) / (2 * h);
    xv[d] = (xvp[d] - xvm[d]) / (2 * h);
    xuu[d] = (xup[d] - 2 * x0[d] + xum[d]) / (h * h);
    xvv[d] = (xvp[d] - 2 * x0[d] + xvm[d]) / (h * h);
    xuv[d] = (xpp[d] - xpm[d] - xmp[d] + xmm[d]) / (4 * h * h);
  }

  // Half-space metric e^{2 phi} delta with phi = -log z; its Christoffel
  // symbols give Gamma(U, V) = U (dphi.V) + V (dphi.U) - (U.V) grad phi.
  const double z = x0[2];
  const Vec3 dphi{0.0, 0.0, -1.0 / z};
  auto christoffel = [&](const Vec3& u, const Vec3& v) {
    Vec3 out = comb(u, dot(dphi, v), v, dot(dphi, u));
    const double uv = dot(u, v);
    for (int d = 0; d < 3; ++d) out[d] -= uv * dphi[d];
    return out;
  };
  auto g = [&](const Vec3& u, const Vec3& v) { return dot(u, v) / (z * z); };

  // Conformal metric: the Euclidean normal is also g-orthogonal.
  Vec3 n{xu[1] * xv[2] - xu[2] * xv[1], xu[2] * xv[0] - xu[0] * xv[2],
         xu[0] * xv[1] - xu[1] * xv[0]};
  const double nn = std::sqrt(dot(n, n));
  for (double& c : n) c *= z / nn;

  auto second = [&](const Vec3& xij, const Vec3& xi, const Vec3& xj) {
    const Vec3 cov = comb(xij, 1.0, christoffel(xi, xj), 1.0);
    return g(cov, n);
  };
  const double E = g(xu, xu), F = g(xu, xv), G = g(xv, xv);
  const double L = second(xuu, xu, xu), M = second(xuv, xu, xv), N = second(xvv, xv, xv);
  const double detI = E * G - F * F;
  if (!(detI > 0.0)) {
    throw Error(ErrorCode::Numerical, "extrinsic_curvature_oracle: degenerate first fundamental form");
  }
  return (L * N - M * M) / detI;
}

double extrinsic_curvature_oracle(const Profile& p, double t, double h, double theta) {
  if (!p.contains(t - h) || !p.contains(t + h)) {
    throw Error(ErrorCode::InvalidArgument, "extrinsic_curvature_oracle: t must be interior to the grid");
  }
  return extrinsic_curvature_oracle([&p](double u) { return p.interpolate(u).f; }, t, h, theta);
}

std::string profile_csv(const Profile& p) {
  std::string out = "t,f,fp\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out += fmt17(p.t_at(i));
    out += ',';
    out += fmt17(p.f()[i]);
    out += ',';
    out += fmt17(p.fp()[i]);
    out += '\n';
  }
  return out;
}

void write_profile_csv(const Profile& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  os << profile_csv(p);
  if (!os) throw Error(ErrorCode::Io, "failed writing " + path);
}

}  // namespace hypcusp::profile
