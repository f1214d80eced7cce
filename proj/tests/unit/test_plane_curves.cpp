#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "error.hpp"
#include "plane_curves.hpp"
#include "random.hpp"

using namespace hypcusp;
using namespace hypcusp::plane;

namespace {

constexpr double kPi = std::numbers::pi;

SampledLoop circle(std::size_t n, double r = 1.0, int turns = 1) {
  return SampledLoop::sample(
      [=](double s) { return Point2{r * std::cos(turns * s), r * std::sin(turns * s)}; }, n, 0.5);
}

// Angle swept by c(s) - p over a fine uniform parameter grid.
template <class Curve>
double brute_force_turns(Curve c, Point2 p, int samples = 100000) {
  double total = 0.0;
  Point2 prev = c(0.0) - p;
  for (int i = 1; i <= samples; ++i) {
    const Point2 cur = c(2 * kPi * i / samples) - p;
    total += std::atan2(cross(prev, cur), dot(prev, cur));
    prev = cur;
  }
  return total / (2 * kPi);
}

double shoelace(const SampledLoop& c) {
  double a = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) a += cross(c[i], c[(i + 1) % c.size()]);
  return 0.5 * a;
}

double perimeter(const SampledLoop& c) {
  double l = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) l += norm(c.edge(i));
  return l;
}

struct Wave {
  double r[3];
  int n[3];
  double phi[3];
  Point2 operator()(double s) const {
    Point2 out{0, 0};
    for (int k = 0; k < 3; ++k) {
      out = out + Point2{r[k] * std::cos(n[k] * s + phi[k]), r[k] * std::sin(n[k] * s + phi[k])};
    }
    return out;
  }
  Point2 derivative(double s) const {
    Point2 out{0, 0};
    for (int k = 0; k < 3; ++k) {
      out = out + Point2{-n[k] * r[k] * std::sin(n[k] * s + phi[k]),
                         n[k] * r[k] * std::cos(n[k] * s + phi[k])};
    }
    return out;
  }
};

// Draws three-term trigonometric curves until the sampled loop is immersed
// with transversal self-crossings.
std::pair<Wave, SampledLoop> random_wave(Rng& rng, std::size_t samples = 2048) {
  while (true) {
    Wave w{};
    w.n[0] = rng.integer(1, 3);
    w.r[0] = rng.uniform(0.6, 1.2);
    for (int k = 1; k < 3; ++k) {
      do {
        w.n[k] = rng.integer(-4, 4);
      } while (w.n[k] == 0 || w.n[k] == w.n[0]);
      w.r[k] = rng.uniform(0.1, 0.6);
    }
    for (double& p : w.phi) p = rng.uniform(0, 2 * kPi);
    try {
      SampledLoop loop = SampledLoop::sample(w, samples, 0.3);
      turning_index(loop);
      self_intersections(loop);
      return {w, loop};
    } catch (const Error&) {
    }
  }
}

std::vector<double> random_coeffs(Rng& rng, std::size_t n) {
  std::vector<double> c(n);
  for (double& v : c) v = rng.uniform(-1, 1);
  return c;
}

}  // namespace

TEST_CASE("SampledLoop invariants") {
  std::vector<Point2> few(10, Point2{0.0, 0.0});
  CHECK_THROWS_AS(SampledLoop{few}, Error);
  std::vector<Point2> repeated;
  for (int i = 0; i < 20; ++i) repeated.push_back({std::cos(i * 0.3), std::sin(i * 0.3)});
  repeated[5] = repeated[4];
  CHECK_THROWS_AS(SampledLoop{repeated}, Error);
  CHECK_NOTHROW(SampledLoop::polygon({{0, 0}, {1, 0}, {0, 1}}));
  CHECK_THROWS_AS(SampledLoop::polygon({{0, 0}, {1, 0}}), Error);
}

TEST_CASE("winding numbers of simple examples") {
  const auto c = circle(256);
  CHECK(winding_number(c, {0, 0}) == 1);
  CHECK(winding_number(c, {0.3, -0.2}) == 1);
  CHECK(winding_number(c, {5, 5}) == 0);
  CHECK(winding_number(c, {-1.5, 0}) == 0);
  CHECK_THROWS_AS(winding_number(c, c[3]), Error);

  const auto lim = SampledLoop::sample(limacon, 4096, 0.5);
  // The limacon passes through the origin; (0.5, 0) lies inside the inner loop.
  const double turns = brute_force_turns(limacon, {0.5, 0.0});
  CHECK(std::abs(turns - 2.0) < 1e-6);
  CHECK(std::abs(brute_force_turns(limacon, {2.0, 0.0}) - 1.0) < 1e-6);
  CHECK(winding_number(lim, {0.5, 0.0}) == 2);
  CHECK(winding_number(lim, {2.0, 0.0}) == 1);
  CHECK(winding_number(lim, {-2.0, 0.0}) == 0);
}

TEST_CASE("turning index") {
  CHECK(turning_index(circle(256)) == 1);
  for (int n = 1; n <= 5; ++n) CHECK(turning_index(circle(256 * n, 1.0, n)) == n);
  CHECK(turning_index(SampledLoop::sample(
            [](double s) { return Point2{std::cos(-s), std::sin(-s)}; }, 128)) == -1);
  const auto lim = SampledLoop::sample(limacon, 4096, 0.5);
  // Tangent of the limacon: derivative of (1 + 2 cos s) e^{is}.
  const double tangent_turns = brute_force_turns(
      [](double s) {
        const double r = 1 + 2 * std::cos(s), dr = -2 * std::sin(s);
        return Point2{dr * std::cos(s) - r * std::sin(s), dr * std::sin(s) + r * std::cos(s)};
      },
      {0, 0});
  CHECK(std::abs(tangent_turns - 2.0) < 1e-6);
  CHECK(turning_index(lim) == 2);
  CHECK(turning_index(SampledLoop::sample(figure_eight, 1024, 0.5)) == 0);
}

TEST_CASE("turning index is invariant under resampling") {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto [w, loop] = random_wave(rng, 1024);
    CHECK(turning_index(loop) == turning_index(SampledLoop::sample(w, 2048, 0.3)));
  }
}

TEST_CASE("convexity") {
  CHECK(is_convex(circle(128)));
  CHECK(is_convex(circle(512, 2.0, 3)));
  CHECK_FALSE(is_convex(SampledLoop::sample(figure_eight, 1024, 0.5)));
  CHECK(is_convex(SampledLoop::sample(epicycle(1.0, 2, 0.2, 4), 2048, 0.5)));   // 0.2*16 < 4
  CHECK_FALSE(is_convex(SampledLoop::sample(epicycle(1.0, 1, 0.3, 3), 2048, 0.5)));  // 0.3*9 > 1
  // b m^2 < a n^2 alone is not enough when m < n: here 3 < 4 but b/a > n/m.
  CHECK_FALSE(is_convex(SampledLoop::sample(epicycle(1.0, 2, 3.0, 1), 2048, 0.5)));
  CHECK(is_convex(SampledLoop::sample(epicycle(1.0, 2, 1.9, 1), 2048, 0.5)));
}

TEST_CASE("winding bound for convex loops") {
  Rng rng(606);
  int checked = 0;
  for (int c = 0; c < 200; ++c) {
    const int n = rng.integer(1, 4);
    int m;
    do {
      m = rng.integer(1, 6);
    } while (m == n);
    const double a = rng.uniform(0.5, 2.0);
    // Signed curvature is positive iff b/a < min(n/m, n^2/m^2).
    const double ratio = std::min(static_cast<double>(n) / m, static_cast<double>(n * n) / (m * m));
    const double b = rng.uniform(0.0, 0.95) * a * ratio;
    const auto loop = SampledLoop::sample(epicycle(a, n, b, m), 1024, 0.5);
    REQUIRE(is_convex(loop));
    const int index = turning_index(loop);
    REQUIRE(index == n);
    const auto box = loop.bounds();
    for (int j = 0; j < 50; ++j) {
      const Point2 p{rng.uniform(box.xmin - 0.5, box.xmax + 0.5), rng.uniform(box.ymin - 0.5, box.ymax + 0.5)};
      int w;
      try {
        w = winding_number(loop, p);
      } catch (const Error&) {
        continue;
      }
      ++checked;
      CHECK(w >= 0);
      CHECK(w <= index);
    }
  }
  CHECK(checked > 9000);
}

TEST_CASE("angle-sum and crossing-count winding numbers agree and are locally constant") {
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    const auto [w, loop] = random_wave(rng, 1024);
    const auto box = loop.bounds();
    for (int j = 0; j < 100; ++j) {
      const Point2 p{rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)};
      int a;
      try {
        a = winding_number(loop, p);
      } catch (const Error&) {
        continue;
      }
      CHECK(a == crossing_winding_number(loop, p));
      const Point2 q = p + Point2{rng.uniform(-1e-7, 1e-7), rng.uniform(-1e-7, 1e-7)};
      try {
        CHECK(winding_number(loop, q) == a);
      } catch (const Error&) {
      }
    }
  }
}

TEST_CASE("self intersections and simple loop decomposition") {
  const auto c = circle(256);
  CHECK(self_intersections(c).empty());
  const auto one = decompose_simple_loops(c);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == c.size());

  const auto eight = SampledLoop::sample(figure_eight, 1024, 0.5);
  const auto crossings = self_intersections(eight);
  REQUIRE(crossings.size() == 1);
  CHECK(norm(crossings[0].point) < 1e-6);
  const auto lobes = decompose_simple_loops(eight);
  REQUIRE(lobes.size() == 2);
  CHECK(turning_index(lobes[0]) + turning_index(lobes[1]) == 0);

  const auto lim = SampledLoop::sample(limacon, 4096, 0.5);
  const auto lx = self_intersections(lim);
  REQUIRE(lx.size() == 1);
  CHECK(std::abs(lx[0].point.x) < 1e-6);
  CHECK(std::abs(lx[0].point.y) < 1e-6);
  const auto loops = decompose_simple_loops(lim);
  REQUIRE(loops.size() == 2);
  double length = 0.0, area = 0.0;
  for (const auto& l : loops) {
    CHECK(self_intersections(l).empty());
    CHECK(turning_index(l) == 1);
    length += perimeter(l);
    area += shoelace(l);
  }
  CHECK(length == doctest::Approx(perimeter(lim)).epsilon(1e-12));
  CHECK(area == doctest::Approx(shoelace(lim)).epsilon(1e-12));
}

TEST_CASE("decomposition preserves turning and edges on random curves") {
  Rng rng(99);
  for (int i = 0; i < 25; ++i) {
    const auto [w, loop] = random_wave(rng);
    const auto loops = decompose_simple_loops(loop);
    int total = 0;
    double length = 0.0, area = 0.0;
    for (const auto& l : loops) {
      CHECK(self_intersections(l).empty());
      total += turning_index(l);
      length += perimeter(l);
      area += shoelace(l);
    }
    CHECK(total == turning_index(loop));
    CHECK(loops.size() >= 1);
    CHECK(loops.size() <= self_intersections(loop).size() + 1);
    CHECK(length == doctest::Approx(perimeter(loop)).epsilon(1e-12));
    CHECK(area == doctest::Approx(shoelace(loop)).epsilon(1e-10));
  }
}

TEST_CASE("convex curves decompose into loops contributing +1 each") {
  for (int n = 2; n <= 4; ++n) {
    const auto loop = SampledLoop::sample(epicycle(1.0, n, 0.05, n + 1), 4096, 0.5);
    REQUIRE(is_convex(loop));
    const auto loops = decompose_simple_loops(loop);
    int positive = 0;
    for (const auto& l : loops) positive += turning_index(l) == 1;
    CHECK(positive == static_cast<int>(loops.size()));
  }
}

TEST_CASE("tangential contact is rejected") {
  // A circle traversed twice: every crossing of the two laps is degenerate.
  const auto twice = SampledLoop::sample(
      [](double s) { return Point2{std::cos(2 * s), std::sin(2 * s)}; }, 256);
  CHECK_THROWS_AS(decompose_simple_loops(twice), TangencyError);
}

TEST_CASE("PlaneOneForm validates its exterior derivative") {
  CHECK_THROWS_AS(PlaneOneForm([](double, double y) { return -y; }, [](double x, double) { return x; },
                               [](double, double) { return 1.0; }),
                  Error);
  CHECK_NOTHROW(PlaneOneForm([](double, double y) { return -y; }, [](double x, double) { return x; },
                             [](double, double) { return 2.0; }));
  CHECK(polynomial_size(0) == 1);
  CHECK(polynomial_size(3) == 10);
  const std::vector<double> c = {1, 2, 3, 4, 5, 6};  // 1 + 2x + 3y + 4x^2 + 5xy + 6y^2
  CHECK(eval_polynomial(c, 2.0, -1.0) == doctest::Approx(1 + 4 - 3 + 16 - 10 + 6));
}

TEST_CASE("winding-weighted integral against closed forms") {
  const auto c = circle(4096);
  const Grid2D g = Grid2D::covering(c, 512);
  CHECK(winding_weighted_integral(c, [](double, double) { return 1.0; }, g) ==
        doctest::Approx(shoelace(c)).epsilon(1e-12));
  CHECK(winding_weighted_integral(c, [](double x, double) { return x * x; }, g) ==
        doctest::Approx(kPi / 4).epsilon(1e-5));
  const auto lim = SampledLoop::sample(limacon, 4096, 0.5);
  CHECK(winding_weighted_integral(lim, [](double, double) { return 1.0; }, Grid2D::covering(lim, 256)) ==
        doctest::Approx(shoelace(lim)).epsilon(1e-12));
  CHECK_THROWS_AS(winding_weighted_integral(c, [](double, double) { return 1.0; },
                                            Grid2D{-0.5, 0.5, -0.5, 0.5, 16, 16}),
                  Error);
}

TEST_CASE("Stokes on the circle, exact forms and the limacon") {
  const auto c = circle(4096);
  const auto r = stokes_residual(c, PlaneOneForm::x_dy(), 512);
  CHECK(std::abs(r.lhs - kPi) < 1e-3);
  CHECK(std::abs(r.rhs - kPi) < 1e-3);
  CHECK(r.residual < 1e-3);
  CHECK(r.resolution == 512);

  const auto exact = PlaneOneForm::exact([](double x, double y) { return 2 * x * y + std::cos(x); },
                                         [](double x, double) { return x * x; });
  const auto e = stokes_residual(SampledLoop::sample(limacon, 8192, 0.5), exact, 512);
  CHECK(std::abs(e.lhs) < 1e-6);
  CHECK(std::abs(e.rhs) < 1e-9);

  const auto lim = SampledLoop::sample(limacon, 4096, 0.5);
  const auto l = stokes_residual(lim, PlaneOneForm::x_dy(), 512);
  CHECK(l.residual < 1e-2);
  CHECK(l.rhs == doctest::Approx(3 * kPi).epsilon(1e-5));  // inner loop counted twice
  double per_loop = 0.0;
  for (const auto& piece : decompose_simple_loops(lim)) {
    per_loop += stokes_residual(piece, PlaneOneForm::x_dy(), 512).rhs;
  }
  CHECK(per_loop == doctest::Approx(l.rhs).epsilon(1e-6));
}

TEST_CASE("Stokes with random cubic forms on random transversal curves") {
  Rng rng(4242);
  for (int i = 0; i < 20; ++i) {
    const auto [wave, loop] = random_wave(rng);
    const auto p = random_coeffs(rng, 10), q = random_coeffs(rng, 10);
    const auto form = PlaneOneForm::polynomial(p, q);
    const auto r = stokes_residual(loop, form, 512);
    CHECK(r.residual < 1e-3);

    // Line integral on the smooth curve (periodic trapezoid, spectrally accurate).
    double smooth = 0.0;
    const int N = 20000;
    for (int j = 0; j < N; ++j) {
      const double s = 2 * kPi * j / N;
      const Point2 x = wave(s), d = wave.derivative(s);
      smooth += eval_polynomial(p, x.x, x.y) * d.x + eval_polynomial(q, x.x, x.y) * d.y;
    }
    smooth *= 2 * kPi / N;
    CHECK(std::abs(r.rhs - smooth) < 1e-3 * std::max(1.0, std::abs(smooth)));

    // Additivity over the simple-loop decomposition.
    double lhs = 0.0, rhs = 0.0, residuals = 0.0;
    for (const auto& piece : decompose_simple_loops(loop)) {
      const auto pr = stokes_residual(piece, form, 512);
      lhs += pr.lhs;
      rhs += pr.rhs;
      residuals += pr.residual;
    }
    CHECK(std::abs(lhs - r.lhs) < 1e-6);
    CHECK(std::abs(rhs - r.rhs) < 1e-4);
    CHECK(r.residual <= residuals + 1e-4);
  }
}

TEST_CASE("winding derivative on the three reference families") {
  const auto one = [](double, double) { return 1.0; };
  const LoopFamily grow{[](double s, double t) { return Point2{(1 + t) * std::cos(s), (1 + t) * std::sin(s)}; },
                        -0.5, 0.5};
  const auto a = winding_derivative_residual(grow, one, 0.0, 1e-3);
  CHECK(a.residual < 1e-3);
  CHECK(std::abs(a.lhs - 2 * kPi) < 1e-3);

  const LoopFamily shift{[](double s, double t) {
                           const Point2 p = limacon(s);
                           return Point2{p.x + 0.7 * t, p.y - 0.3 * t};
                         },
                         -0.5, 0.5};
  const auto b = winding_derivative_residual(shift, one, 0.0, 1e-3);
  CHECK(std::abs(b.lhs) < 1e-3);
  CHECK(std::abs(b.rhs) < 1e-3);

  const LoopFamily shrink{[](double s, double t) {
                            const double r = std::exp(-t);
                            return Point2{r * std::cos(2 * s), r * std::sin(2 * s)};
                          },
                          -0.5, 0.5};
  const auto c = winding_derivative_residual(shrink, one, 0.0, 1e-3);
  CHECK(c.residual < 1e-3);
  CHECK(std::abs(c.lhs + 4 * kPi) < 1e-3);

  // A non-constant density: d/dr of the disc integral of x^2 is pi r^3.
  const auto d = winding_derivative_residual(grow, [](double x, double) { return x * x; }, 0.0, 1e-3);
  CHECK(d.residual < 1e-3);
  CHECK(std::abs(d.rhs - kPi) < 1e-3);
  CHECK_THROWS_AS(winding_derivative_residual(grow, one, 0.0, 0.0), Error);
  CHECK_THROWS_AS(winding_derivative_residual(grow, one, 0.6, 1e-3), Error);
}

TEST_CASE("loop CSV round trip") {
  const auto lim = SampledLoop::sample(limacon, 64, 0.5);
  const auto path = std::filesystem::temp_directory_path() / "hypcusp_loop_roundtrip.csv";
  write_loop_csv(lim, path.string());
  const auto back = read_loop_csv(path.string());
  REQUIRE(back.size() == lim.size());
  for (std::size_t i = 0; i < lim.size(); ++i) {
    CHECK(back[i].x == lim[i].x);
    CHECK(back[i].y == lim[i].y);
  }
  CHECK(loop_csv(lim).rfind("s,x,y\n", 0) == 0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_loop_csv(path.string()), Error);
}
