#include "hyper3.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace hypcusp::hyper3 {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 as_vec(const HalfSpacePoint& p) { return {p.x, p.y, p.t}; }

std::array<double, 3> metric_entries(double R) {
  const MetricDiag m = metric_polar(R);
  return {m.gtt, m.gRR, m.gthth};
}

}  // namespace

double ConnectionTable::ttheta_norm() const {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += std::abs(gamma_[k][0][2]);
  return s;
}

double ConnectionTable::torsion_residual() const {
  double worst = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        worst = std::max(worst, std::abs(gamma_[k][i][j] - gamma_[k][j][i]));
  return worst;
}

double ConnectionTable::max_difference(const ConnectionTable& other) const {
  double worst = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        worst = std::max(worst, std::abs(gamma_[k][i][j] - other.gamma_[k][i][j]));
  return worst;
}

HalfSpacePoint phi_gamma(double t, double r, double theta) {
  const double scale = std::exp(t);
  const double radial = scale * std::tanh(r);
  return {radial * std::cos(theta), radial * std::sin(theta), scale / std::cosh(r)};
}

HalfSpacePoint psi_gamma(const ChartCoords& c) {
  if (!(c.R >= 0.0)) {
    throw Error(ErrorCode::Domain, "psi_gamma: R must be nonnegative");
  }
  return phi_gamma(c.t, std::asinh(c.R), c.theta);
}

MetricDiag metric_polar(double R) {
  if (!(R >= 0.0)) {
    throw Error(ErrorCode::Domain, "metric_polar: R must be nonnegative");
  }
  const double a = 1.0 + R * R;
  return {a, 1.0 / a, R * R};
}

ConnectionTable connection_table(double R) {
  if (!(R > 0.0)) {
    throw Error(ErrorCode::Domain, "connection_table: R must be positive");
  }
  constexpr auto t = Direction::t;
  constexpr auto r = Direction::R;
  constexpr auto th = Direction::theta;
  const double a = 1.0 + R * R;

  ConnectionTable table;
  table.gamma(r, t, t) = -R * a;
  table.gamma(t, t, r) = R / a;
  table.gamma(t, r, t) = R / a;
  table.gamma(r, r, r) = -R / a;
  table.gamma(th, r, th) = 1.0 / R;
  table.gamma(th, th, r) = 1.0 / R;
  table.gamma(r, th, th) = -R * a;
  return table;
}

double halfspace_inner(const HalfSpacePoint& at, const Vec3& u, const Vec3& v) {
  return (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (at.t * at.t);
}

PullbackResult pullback_metric_oracle(const ChartCoords& c, double h) {
  if (!(h > 0.0) || !(c.R > h)) {
    std::ostringstream msg;
    msg << "pullback_metric_oracle: step h=" << h << " must satisfy 0 < h < R=" << c.R;
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }

  std::array<Vec3, 3> jac{};
  for (int axis = 0; axis < 3; ++axis) {
    ChartCoords plus = c;
    ChartCoords minus = c;
    double* p = axis == 0 ? &plus.t : axis == 1 ? &plus.R : &plus.theta;
    double* m = axis == 0 ? &minus.t : axis == 1 ? &minus.R : &minus.theta;
    *p += h;
    *m -= h;
    const Vec3 xp = as_vec(psi_gamma(plus));
    const Vec3 xm = as_vec(psi_gamma(minus));
    for (int d = 0; d < 3; ++d) jac[axis][d] = (xp[d] - xm[d]) / (2.0 * h);
  }

  const HalfSpacePoint at = psi_gamma(c);
  PullbackResult out;
  out.diag.gtt = halfspace_inner(at, jac[0], jac[0]);
  out.diag.gRR = halfspace_inner(at, jac[1], jac[1]);
  out.diag.gthth = halfspace_inner(at, jac[2], jac[2]);
  out.offdiag_residual = std::max({std::abs(halfspace_inner(at, jac[0], jac[1])),
                                   std::abs(halfspace_inner(at, jac[0], jac[2])),
                                   std::abs(halfspace_inner(at, jac[1], jac[2]))});
  return out;
}

ConnectionTable christoffel_oracle(double R, double h) {
  if (!(h > 0.0) || !(R > h)) {
    throw Error(ErrorCode::InvalidArgument, "christoffel_oracle: requires 0 < h < R");
  }

  // dg[k][i] = d_k g_ii. metric_polar depends on R alone, so only the R row
  // is differenced; the t and theta rows stay zero.
  const auto gp = metric_entries(R + h);
  const auto gm = metric_entries(R - h);
  const auto g0 = metric_entries(R);
  double dg[3][3] = {};
  for (int i = 0; i < 3; ++i) dg[1][i] = (gp[i] - gm[i]) / (2.0 * h);

  auto g = [&](int i, int j) { return i == j ? g0[i] : 0.0; };
  auto dmetric = [&](int k, int i, int j) { return i == j ? dg[k][i] : 0.0; };

  ConnectionTable::Array gamma{};
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        // Koszul: Gamma_{kij} = 1/2 (d_i g_jk + d_j g_ik - d_k g_ij)
        const double lowered =
            0.5 * (dmetric(i, j, k) + dmetric(j, i, k) - dmetric(k, i, j));
        gamma[k][i][j] = lowered / g(k, k);
      }
    }
  }
  return ConnectionTable(gamma);
}

double metric_compatibility_residual(double R, const ConnectionTable& table, double h) {
  const auto gp = metric_entries(R + h);
  const auto gm = metric_entries(R - h);
  const auto g0 = metric_entries(R);
  const auto& gamma = table.array();
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double lhs = 0.0;
        if (k == 1 && i == j) lhs = (gp[i] - gm[i]) / (2.0 * h);
        const double rhs = gamma[j][k][i] * g0[j] + gamma[i][k][j] * g0[i];
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return worst;
}

}  // namespace hypcusp::hyper3
