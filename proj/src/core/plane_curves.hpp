#pragma once

// Closed immersed planar curves: winding and turning numbers, convexity,
// decomposition into simple loops, and winding-weighted quadrature.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hypcusp::plane {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
double norm(Point2 a);

// Closed polygon through the samples; the edge from the last sample back to
// the first closes the loop.
class SampledLoop {
 public:
  static constexpr std::size_t kMinSamples = 16;

  // Uniform parameter samples of a closed curve; at least kMinSamples.
  explicit SampledLoop(std::vector<Point2> points);

  // Polygonal loop with at least three vertices (pieces of a decomposition).
  static SampledLoop polygon(std::vector<Point2> points);

  // Samples c(s) at s = 2 pi (i + offset) / n.
  static SampledLoop sample(const std::function<Point2(double)>& curve, std::size_t n,
                            double offset = 0.0);

  std::size_t size() const { return points_.size(); }
  const Point2& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point2> points() const { return points_; }
  Point2 edge(std::size_t i) const { return points_[(i + 1) % size()] - points_[i]; }

  struct Box {
    double xmin, xmax, ymin, ymax;
  };
  Box bounds() const;

 private:
  SampledLoop(std::vector<Point2> points, std::size_t min_samples);
  std::vector<Point2> points_;
};

// Named test curves, sampled with a half-step parameter offset so that
// symmetric crossings do not land on sample vertices.
Point2 limacon(double s);       // ((1 + 2 cos s) cos s, (1 + 2 cos s) sin s)
Point2 figure_eight(double s);  // (sin s, sin s cos s)
// a e^{i n s} + b e^{i m s}
std::function<Point2(double)> epicycle(double a, int n, double b, int m,
                                       Point2 center = {0.0, 0.0});

// Winding number of the loop about p by accumulated signed angle.
// Throws when p lies within `tolerance` of the polygon, or when the angle sum
// is not within 1e-6 * 2 pi of a multiple of 2 pi.
int winding_number(const SampledLoop& c, Point2 p, double tolerance = 1e-9);

// Winding number by the crossing rule (upward edges crossing the ray to +x).
int crossing_winding_number(const SampledLoop& c, Point2 p);

// Signed turning number of the edge directions.
int turning_index(const SampledLoop& c);

// True iff every discrete signed curvature (cross product of consecutive
// edges) has the same sign, treating |cross| <= tolerance |e1||e2| as zero.
bool is_convex(const SampledLoop& c, double tolerance = 1e-12);

struct Crossing {
  std::size_t segment_a;
  double param_a;  // position along segment_a in (0, 1)
  std::size_t segment_b;
  double param_b;
  Point2 point;
};

// All transversal crossings between non-adjacent edges. Throws TangencyError
// when two edges meet at an angle with |sin| < tangency_tolerance, overlap, or
// meet at a sample vertex.
std::vector<Crossing> self_intersections(const SampledLoop& c, double tangency_tolerance = 1e-9);

// Splits the loop at its self-crossings into simple closed loops whose edges
// partition the edges of c (with the crossing points inserted).
std::vector<SampledLoop> decompose_simple_loops(const SampledLoop& c,
                                                double tangency_tolerance = 1e-9);

// P dx + Q dy together with its exterior-derivative density dQ/dx - dP/dy.
class PlaneOneForm {
 public:
  using Field = std::function<double(double, double)>;

  // Validates the density against central differences of P and Q at fixed
  // sample points of [-2, 2]^2; throws on disagreement.
  PlaneOneForm(Field p, Field q, Field d);

  // sum_{i+j<=deg} p[idx] x^i y^j with idx enumerating (i, j) by total degree,
  // then by descending i: 1, x, y, x^2, xy, y^2, ...
  static PlaneOneForm polynomial(std::vector<double> p_coeffs, std::vector<double> q_coeffs);
  static PlaneOneForm x_dy();
  // dh for a potential h with gradient (hx, hy).
  static PlaneOneForm exact(Field hx, Field hy);

  double p(double x, double y) const { return p_(x, y); }
  double q(double x, double y) const { return q_(x, y); }
  double d(double x, double y) const { return d_(x, y); }

 private:
  Field p_, q_, d_;
};

// Number of coefficients of a bivariate polynomial of total degree deg.
std::size_t polynomial_size(int degree);
double eval_polynomial(std::span<const double> coeffs, double x, double y);

// Uniform cell grid over a rectangle.
struct Grid2D {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  int nx = 1, ny = 1;

  // Square-celled grid over the loops' common bounding box, padded by
  // margin * (largest box side) on each side, with `resolution` cells along
  // the longer axis.
  static Grid2D covering(std::span<const SampledLoop* const> loops, int resolution,
                         double margin = 0.05);
  static Grid2D covering(const SampledLoop& loop, int resolution, double margin = 0.05);

  double hx() const { return (xmax - xmin) / nx; }
  double hy() const { return (ymax - ymin) / ny; }
};

struct QuadratureStats {
  std::size_t boundary_cells = 0;
  // Second-difference estimate of the density error left in boundary cells.
  double error_bound = 0.0;
};

// Integral of Wind(c, x) * density(x) over the grid. Cells the curve misses use
// the centre value; cells it touches use exact winding-weighted moments of the
// polygon inside the cell against a linear model of the density. The grid must
// contain the loop.
double winding_weighted_integral(const SampledLoop& c, const std::function<double(double, double)>& density,
                                 const Grid2D& grid, QuadratureStats* stats = nullptr);

// Line integral of P dx + Q dy along the polygon by the midpoint rule per edge.
double line_integral(const SampledLoop& c, const PlaneOneForm& w);

struct StokesReport {
  double lhs = 0.0;  // line integral
  double rhs = 0.0;  // winding-weighted area integral of dw
  double residual = 0.0;
  int resolution = 0;
  double error_bound = 0.0;
};

StokesReport stokes_residual(const SampledLoop& c, const PlaneOneForm& w, const Grid2D& grid);
StokesReport stokes_residual(const SampledLoop& c, const PlaneOneForm& w, int resolution = 512);

// Smooth family (s, t) -> c_t(s) of closed curves, sampled at `samples` points.
struct LoopFamily {
  std::function<Point2(double, double)> eval;
  double t_min = 0.0;
  double t_max = 1.0;
  std::size_t samples = 1024;

  SampledLoop slice(double t) const;
};

struct WindingDerivativeReport {
  double lhs = 0.0;  // central difference of the winding-weighted integral
  double rhs = 0.0;  // line integral of the contraction i_{d_t c_t} beta
  double residual = 0.0;
};

// beta = density dx^dy. Both slices t +- h share one grid.
WindingDerivativeReport winding_derivative_residual(
    const LoopFamily& family, const std::function<double(double, double)>& beta_density, double t,
    double h, int resolution = 512);

// CSV with header s,x,y (s = 2 pi i / n).
std::string loop_csv(const SampledLoop& c);
void write_loop_csv(const SampledLoop& c, const std::string& path);
SampledLoop read_loop_csv(const std::string& path);

}  // namespace hypcusp::plane
