#pragma once

// Area and volume of cusp ends: revolution tails, chart primitives of the
// volume form, the boundary-integral volume V(t) and its convergence.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "plane_curves.hpp"
#include "profile_ode.hpp"

namespace hypcusp::cusp {

using plane::Point2;

// Area of the revolution surface over [t, inf): integral of
// 2 pi f sqrt((1+f^2) + f'^2 (1+f^2)^-1), Simpson on the grid plus an
// exponential tail past the grid end.
double area_tail(const profile::Profile& p, double t);

// Volume enclosed over [t, inf): integral of pi f^2, closed the same way.
double volume_tail_revolution(const profile::Profile& p, double t);

struct TailEstimates {
  std::vector<double> t;
  std::vector<double> area;
  std::vector<double> volume;
  double area_rate = 0.0;
  double volume_rate = 0.0;
};

TailEstimates tail_estimates(const profile::Profile& p, std::span<const double> t_grid);

// 2-form on chart coordinates (t, R, theta), given by its dt^dR, dR^dtheta
// and dt^dtheta coefficients. d(alpha) must equal R dt^dR^dtheta.
class ChartPrimitive {
 public:
  using Coefficient = std::function<double(double, double, double)>;

  // Checks the exterior derivative against R at fixed probe points.
  ChartPrimitive(std::string name, Coefficient dt_dR, Coefficient dR_dtheta, Coefficient dt_dtheta);

  const std::string& name() const { return name_; }

  // Density of d(alpha) against dt^dR^dtheta, by central differences.
  double exterior_derivative_density(double t, double R, double theta, double h = 1e-5) const;

  // Components in (t, x, y) = (t, R cos theta, R sin theta):
  // alpha = P dt^dx + Q dt^dy + S dx^dy.
  struct Cartesian {
    double P, Q, S;
  };
  Cartesian cartesian(double t, double x, double y) const;

 private:
  std::string name_;
  Coefficient dt_dR_, dR_dtheta_, dt_dtheta_;
};

ChartPrimitive chart_primitive_A();  // -(R^2 / 2) dt^dtheta
ChartPrimitive chart_primitive_B();  // t R dR^dtheta

// Graph function f(s, t) of a cusp end in chart coordinates (R cos, R sin).
struct CuspFamily {
  std::string id;
  std::function<Point2(double, double)> eval;
  // Optional exact partial derivatives; central differences otherwise.
  std::function<Point2(double, double)> d_ds;
  std::function<Point2(double, double)> d_dt;
  double t_min = 0.0;
  double t_max = 0.0;
  int index = 1;
  double nominal_rate = 0.0;  // decay rate of the slice size, 0 if unknown

  plane::SampledLoop slice(double t, std::size_t samples) const;
  Point2 partial_s(double s, double t) const;
  Point2 partial_t(double s, double t) const;
};

// rho0 e^{-rho_rate t} e^{i n s} + mu0 e^{-mu_rate t} e^{i m s}.
CuspFamily epicycle_family(std::string id, double rho0, double rho_rate, int n, double mu0,
                           double mu_rate, int m, double t_min, double t_max);

// p(t) e^{i n s}: the n-fold cover of a revolution profile.
CuspFamily profile_family(std::string id, std::shared_ptr<const profile::Profile> p, int n,
                          double nominal_rate);

// Winding-weighted area pi (n rho^2 + m mu^2) of an epicycle slice.
double epicycle_slice_area(double rho, int n, double mu, int m);

struct EpicycleParams {
  double rho0, rho_rate;
  int n;
  double mu0, mu_rate;
  int m;
};

// Families with indices 1..3 and convex slices (mu m^2 < rho n^2 for all t).
std::vector<EpicycleParams> epicycle_corpus(std::size_t count, std::uint64_t seed);
CuspFamily make_family(const EpicycleParams& params, std::size_t id, double t_min, double t_max);

struct QuadratureSettings {
  std::size_t loop_samples = 1024;
  int resolution = 512;
  double lateral_step = 0.05;  // Simpson step in t for the lateral integral
  double slice_step = 0.1;     // Simpson step in t for slab quadrature
};

// Lateral pullback of alpha plus winding-weighted slice terms:
//   V(t) = int_{S^1 x [T,t]} f^* alpha - int Wind(c_T) alpha_T + int Wind(c_t) alpha_t,
// with the lateral surface oriented by (s, t) and slices by dx^dy. The first
// call runs a sign self-test against the rotationally symmetric closed form.
double V_of_t(const CuspFamily& family, const ChartPrimitive& alpha, double T, double t,
              const QuadratureSettings& q = {});

// int_T^t int Wind(c_s, x) dx dy ds by slicing in s.
double winding_dvol_integral(const CuspFamily& family, double T, double t,
                             const QuadratureSettings& q = {});

// Throws if V_of_t disagrees in sign or size with pi (1 - e^{-1}) for the unit
// circle family of rate 1/2 on [0, 1]. Idempotent.
void orientation_self_test();

struct DecayEnvelopeReport {
  double A = 0.0;             // smallest A with max|f(., t)| <= A e^{-(lambda-delta) t} on samples
  double fitted_rate = 0.0;   // decay rate of max|f(., t)|
  double threshold_rate = 0.0;  // lambda - delta
  bool holds = false;
  std::size_t slices = 0;

  nlohmann::json to_json() const;
};

DecayEnvelopeReport decay_validator(const CuspFamily& family, const profile::CurvatureLevel& k,
                                    double delta, std::size_t slices = 40,
                                    std::size_t samples = 512);

struct ConvergenceReport {
  std::string family_id;
  std::string primitive;
  double T = 0.0;
  std::vector<double> t_ladder;
  std::vector<double> V_values;
  std::vector<double> diffs;
  double fitted_rate = 0.0;
  double extrapolated_limit = 0.0;
  double tail_fraction = 0.0;

  bool monotone = false;      // differences above roundoff positive and nonincreasing
  bool rate_matches = false;  // fitted rate within 10% of 2 * nominal_rate (true if unknown)
  bool converged = false;     // monotone, rate_matches and tail_fraction < 0.01

  nlohmann::json to_json() const;
};

// V_of_t on the uniform ladder T + j (horizon - T) / steps, j = 0..steps,
// with the limit extrapolated geometrically from the fitted difference ratio.
ConvergenceReport convergence_report(const CuspFamily& family, const ChartPrimitive& alpha, double T,
                                     double horizon, std::size_t steps,
                                     const QuadratureSettings& q = {});

}  // namespace hypcusp::cusp
