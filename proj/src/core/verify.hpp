#pragma once

// Numerical checks of the geometric identities, each reduced to one measured
// residual against a tolerance.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "plane_curves.hpp"
#include "random.hpp"

namespace hypcusp::verify {

struct LedgerEntry {
  std::string name;
  std::string identity;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const;
};

struct VerifyOptions {
  double tolerance_override = 0.0;  // replaces every default tolerance when > 0
  std::uint64_t seed = 1;
  int resolution = 512;
};

// Default tolerances.
inline constexpr double kMetricTolerance = 1e-5;
inline constexpr double kConnectionTolerance = 1e-5;
inline constexpr double kCurvatureTolerance = 1e-3;
inline constexpr double kStokesTolerance = 1e-3;
inline constexpr double kWindingDerivativeTolerance = 1e-3;
inline constexpr double kVolumeIdentityTolerance = 1e-3;

// Pullback metric against the closed form at `points` random chart points.
LedgerEntry check_polar_metric(Rng& rng, int points, double tolerance = kMetricTolerance);
// Koszul oracle against the connection table at `points` random radii.
LedgerEntry check_connection(Rng& rng, int points, double tolerance = kConnectionTolerance);
// Extrinsic curvature of backward-integrated profiles against their level.
LedgerEntry check_revolution_curvature(const std::vector<double>& levels, int points,
                                       double tolerance = kCurvatureTolerance);
// 0 <= Wind <= Ind on random convex epicycles; the residual counts violations.
LedgerEntry check_winding_bound(Rng& rng, int curves, int points);
// Line integral against winding-weighted area integral: the limacon with x dy
// and random transversal curves with random cubic one-forms.
LedgerEntry check_stokes(Rng& rng, int curves, int resolution, double tolerance = kStokesTolerance);
// Derivative of winding-weighted integrals on growing, translating and
// shrinking two-fold families.
LedgerEntry check_winding_derivative(int resolution,
                                     double tolerance = kWindingDerivativeTolerance);
// V(t) under both primitives against the slab integral of Wind dVol.
LedgerEntry check_winding_volume(std::uint64_t seed, int families, int resolution,
                                 double tolerance = kVolumeIdentityTolerance);

std::vector<LedgerEntry> run_all(const VerifyOptions& options);
nlohmann::json ledger_json(const std::vector<LedgerEntry>& entries, const VerifyOptions& options);

// Random convex epicycle a e^{ins} + b e^{ims} with n in 1..4.
struct ConvexEpicycle {
  double a, b;
  int n, m;
  double phase;
};
ConvexEpicycle random_convex_epicycle(Rng& rng);

// Random curve sum_k r_k e^{i (n_k s + phi_k)} with three terms, sampled with
// an irrational offset; rejected and redrawn until its self-crossings are
// transversal.
plane::SampledLoop random_transversal_curve(Rng& rng, std::size_t samples = 2048);

// Random polynomial one-form of total degree <= 3 with coefficients in [-1, 1].
plane::PlaneOneForm random_polynomial_form(Rng& rng);

}  // namespace hypcusp::verify
