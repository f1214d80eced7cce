#pragma once

// Upper half-space model of hyperbolic 3-space and geodesic polar charts
// about the canonical geodesic from 0 to infinity with gamma(0) = (0, 0, 1).

#include <array>

namespace hypcusp::hyper3 {

struct HalfSpacePoint {
  double x = 0.0;
  double y = 0.0;
  double t = 1.0;  // height above the boundary plane, > 0
};

// (t, R, theta): arclength along the geodesic, sinh of the distance to it, angle.
struct ChartCoords {
  double t = 0.0;
  double R = 0.0;
  double theta = 0.0;
};

// Diagonal metric entries in the (d_t, d_R, d_theta) basis.
struct MetricDiag {
  double gtt = 0.0;
  double gRR = 0.0;
  double gthth = 0.0;
};

enum class Direction { t = 0, R = 1, theta = 2 };

// Levi-Civita connection of the polar chart metric, stored as the full
// Christoffel array gamma[k][i][j] = coefficient of e_k in nabla_{e_i} e_j.
class ConnectionTable {
 public:
  using Array = std::array<std::array<std::array<double, 3>, 3>, 3>;

  ConnectionTable() : gamma_{} {}
  explicit ConnectionTable(const Array& gamma) : gamma_(gamma) {}

  double gamma(Direction k, Direction i, Direction j) const {
    return gamma_[idx(k)][idx(i)][idx(j)];
  }
  double& gamma(Direction k, Direction i, Direction j) {
    return gamma_[idx(k)][idx(i)][idx(j)];
  }
  const Array& array() const { return gamma_; }

  // The six defining relations, each on its single nonzero direction.
  double tt_on_R() const { return gamma(Direction::R, Direction::t, Direction::t); }
  double tR_on_t() const { return gamma(Direction::t, Direction::t, Direction::R); }
  double ttheta_norm() const;  // magnitude of nabla_{d_t} d_theta, zero
  double RR_on_R() const { return gamma(Direction::R, Direction::R, Direction::R); }
  double Rtheta_on_theta() const {
    return gamma(Direction::theta, Direction::R, Direction::theta);
  }
  double thetatheta_on_R() const {
    return gamma(Direction::R, Direction::theta, Direction::theta);
  }

  // max_k,i,j |gamma[k][i][j] - gamma[k][j][i]|
  double torsion_residual() const;
  // max_k,i,j |gamma - other.gamma|
  double max_difference(const ConnectionTable& other) const;

 private:
  static int idx(Direction d) { return static_cast<int>(d); }
  Array gamma_;
};

HalfSpacePoint phi_gamma(double t, double r, double theta);
HalfSpacePoint psi_gamma(const ChartCoords& c);

MetricDiag metric_polar(double R);
ConnectionTable connection_table(double R);

// Half-space metric t^-2 delta_ij evaluated on two model-space vectors.
double halfspace_inner(const HalfSpacePoint& at, const std::array<double, 3>& u,
                       const std::array<double, 3>& v);

struct PullbackResult {
  MetricDiag diag;
  double offdiag_residual = 0.0;  // largest |g_ij|, i != j
};

// Central-difference Jacobian of psi_gamma pulled back through the half-space metric.
PullbackResult pullback_metric_oracle(const ChartCoords& c, double h = 1e-4);

// Koszul formula applied to central-difference derivatives of metric_polar.
ConnectionTable christoffel_oracle(double R, double h = 1e-5);

// Largest violation of d_k g_ij = Gamma^l_ki g_lj + Gamma^l_kj g_il, with the
// metric derivative taken by central differences of metric_polar.
double metric_compatibility_residual(double R, const ConnectionTable& table, double h = 1e-5);

}  // namespace hypcusp::hyper3
