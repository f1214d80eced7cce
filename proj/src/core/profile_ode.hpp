#pragma once

// Profiles f of surfaces of revolution Psi(t, f(t), theta) about the canonical
// geodesic, the constant-curvature ODE they satisfy, and decay-rate fitting.

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hypcusp::profile {

// Constant extrinsic curvature k in (0, 1) and the decay rate sqrt(1 - k).
class CurvatureLevel {
 public:
  explicit CurvatureLevel(double k);

  double k() const { return k_; }
  double lambda() const { return lambda_; }

 private:
  double k_;
  double lambda_;
};

// Sampled profile on the uniform grid t0 + i*dt, ascending in t.
class Profile {
 public:
  Profile(double t0, double dt, std::vector<double> f, std::vector<double> fp,
          std::string diagnostic = {});

  std::size_t size() const { return f_.size(); }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double t_end() const { return t0_ + dt_ * static_cast<double>(size() - 1); }
  double t_at(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }
  std::span<const double> f() const { return f_; }
  std::span<const double> fp() const { return fp_; }

  // Non-empty when the producing integrator truncated the grid.
  const std::string& diagnostic() const { return diagnostic_; }

  bool contains(double t) const;

  struct Sample {
    double f;
    double fp;
  };
  // Cubic Hermite interpolation of (f, f'); throws outside [t0, t_end].
  Sample interpolate(double t) const;

 private:
  double t0_;
  double dt_;
  std::vector<double> f_;
  std::vector<double> fp_;
  std::string diagnostic_;
};

// Extrinsic Gaussian curvature of the surface of revolution with profile
// derivatives (f, f', f''). The relation used is
//   kappa f ((1+f^2) + f'^2 (1+f^2)^-1)^2 = -f''(1+f^2) + f(1+f^2)^2 + 3 f f'^2,
// i.e. det II / det I with the unit normal; a tube (f' = f'' = 0) has kappa = 1.
double curvature_from_profile(double f, double fp, double fpp);

// Inverse of curvature_from_profile in f''.
double fpp_from_curvature(double f, double fp, const CurvatureLevel& k);

enum class OnBlowUp { Throw, Truncate };

// Profile leaves the regular range when f or |f'| exceeds these bounds.
inline constexpr double kBlowUpValue = 1e2;
inline constexpr double kBlowUpSlope = 1e4;
// Forward integration stops once f drops below this value.
inline constexpr double kCuspFloor = 1e-12;

// Integrates the decaying branch backward from f(T) = eps, f'(T) = -lambda eps
// with classical RK4 at step dt and returns the profile on [0, T].
Profile integrate_backward(double eps, double T, const CurvatureLevel& k, double dt = 1e-3,
                           OnBlowUp policy = OnBlowUp::Throw);

// Plain RK4 from (f, f') at t0 over n steps of signed size dt; samples are
// returned in integration order. Stops early on blow-up or f < kCuspFloor.
struct Trajectory {
  std::vector<double> t;
  std::vector<double> f;
  std::vector<double> fp;
  bool blew_up = false;
  bool hit_floor = false;
};
Trajectory integrate_rk4(double t0, double f0, double fp0, const CurvatureLevel& k, double dt,
                         std::size_t steps);

// Bisects on f'(0) in [-(lambda+1) f0, 0] for the bounded decaying solution.
// The returned profile stops where the two bracketing shots separate by more
// than a relative 1e-6; the diagnostic records any such truncation.
Profile shoot_forward(double f0, const CurvatureLevel& k, double T, double dt = 1e-3);

struct FitWindow {
  double start;
  double end;
};

struct DecayFit {
  double rate = 0.0;
  double amplitude = 0.0;
  FitWindow window{0.0, 0.0};
  double residual = 0.0;  // max |log f - affine fit|
};

// Last two-thirds of the grid, minus the final 10%.
FitWindow default_fit_window(const Profile& p);

// Least-squares affine fit of log(values) against t on uniformly spaced samples.
DecayFit fit_log_affine(std::span<const double> t, std::span<const double> values);

DecayFit decay_fit(const Profile& p, FitWindow window);

struct DerivativeCheck {
  DecayFit fit;
  bool sign_pattern = false;    // (-1)^order f^(order) > 0 on the whole window
  double fd_cross_check = 0.0;  // max relative gap between ODE f'' and d/dt f'
};

// f^(order), order <= 4: f and f' from the grid, f'' from the ODE, higher
// orders by central differences of the ODE-derived f''.
DerivativeCheck derivative_rate_check(const Profile& p, const CurvatureLevel& k, int order,
                                      FitWindow window);

// Embeds (u, theta) -> psi_gamma(u, f(u), theta) into the half-space model and
// returns det II / det I from central-difference fundamental forms.
double extrinsic_curvature_oracle(const std::function<double(double)>& f, double t, double h,
                                  double theta = 0.0);
double extrinsic_curvature_oracle(const Profile& p, double t, double h, double theta = 0.0);

// CSV with header t,f,fp and 17 significant digits.
void write_profile_csv(const Profile& p, const std::string& path);
std::string profile_csv(const Profile& p);

}  // namespace hypcusp::profile
