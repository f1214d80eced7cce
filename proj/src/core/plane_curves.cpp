#include "plane_curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "error.hpp"

namespace hypcusp::plane {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double box_diagonal(const SampledLoop::Box& b) {
  return std::hypot(b.xmax - b.xmin, b.ymax - b.ymin);
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm(p - (a + s * ab));
}

// Neumaier compensated summation, order-dependent only through the input order.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Signed crossings of the horizontal line at height y, sorted by x, with
// suffix sums so that winding(x) = suffix[first index with x_c > x].
struct RowCrossings {
  std::vector<double> xs;
  std::vector<int> suffix;

  void build(const SampledLoop& c, double y) {
    std::vector<std::pair<double, int>> hits;
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = c[i];
      const Point2 b = c[(i + 1) % n];
      int sign = 0;
      if (a.y <= y && b.y > y) {
        sign = +1;
      } else if (b.y <= y && a.y > y) {
        sign = -1;
      }
      if (sign != 0) {
        const double x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
        hits.emplace_back(x, sign);
      }
    }
    std::sort(hits.begin(), hits.end());
    xs.resize(hits.size());
    suffix.assign(hits.size() + 1, 0);
    for (std::size_t i = hits.size(); i-- > 0;) {
      xs[i] = hits[i].first;
      suffix[i] = suffix[i + 1] + hits[i].second;
    }
  }

  int winding_at(double x) const {
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    return suffix[static_cast<std::size_t>(it - xs.begin())];
  }
};

}  // namespace

double norm(Point2 a) { return std::hypot(a.x, a.y); }

SampledLoop::SampledLoop(std::vector<Point2> points) : SampledLoop(std::move(points), kMinSamples) {}

SampledLoop::SampledLoop(std::vector<Point2> points, std::size_t min_samples)
    : points_(std::move(points)) {
  if (points_.size() < min_samples) {
    throw Error(ErrorCode::InvalidArgument, "loop needs at least " + std::to_string(min_samples) +
                                                " samples, got " + std::to_string(points_.size()));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Point2 p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::InvalidArgument, "loop sample " + std::to_string(i) + " is not finite");
    }
    const Point2 q = points_[(i + 1) % points_.size()];
    if (p.x == q.x && p.y == q.y) {
      throw Error(ErrorCode::InvalidArgument,
                  "consecutive loop samples " + std::to_string(i) + " coincide (not an immersion)");
    }
  }
}

SampledLoop SampledLoop::polygon(std::vector<Point2> points) {
  return SampledLoop(std::move(points), 3);
}

SampledLoop SampledLoop::sample(const std::function<Point2(double)>& curve, std::size_t n,
                                double offset) {
  std::vector<Point2> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(curve(kTwoPi * (static_cast<double>(i) + offset) / static_cast<double>(n)));
  }
  return SampledLoop(std::move(pts));
}

SampledLoop::Box SampledLoop::bounds() const {
  Box b{points_[0].x, points_[0].x, points_[0].y, points_[0].y};
  for (const Point2& p : points_) {
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  return b;
}

Point2 limacon(double s) {
  const double r = 1.0 + 2.0 * std::cos(s);
  return {r * std::cos(s), r * std::sin(s)};
}

Point2 figure_eight(double s) { return {std::sin(s), std::sin(s) * std::cos(s)}; }

std::function<Point2(double)> epicycle(double a, int n, double b, int m, Point2 center) {
  return [=](double s) {
    return Point2{center.x + a * std::cos(n * s) + b * std::cos(m * s),
                  center.y + a * std::sin(n * s) + b * std::sin(m * s)};
  };
}

int winding_number(const SampledLoop& c, Point2 p, double tolerance) {
  const double scale = std::max(1.0, box_diagonal(c.bounds()));
  const std::size_t n = c.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = c[i];
    const Point2 b = c[(i + 1) % n];
    if (point_segment_distance(p, a, b) <= tolerance * scale) {
      throw Error(ErrorCode::Domain, "winding_number: point lies within tolerance of edge " +
                                         std::to_string(i));
    }
    const Point2 u = a - p;
    const Point2 v = b - p;
    total += std::atan2(cross(u, v), dot(u, v));
  }
  const double turns = total / kTwoPi;
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 1e-6) {
    throw Error(ErrorCode::Numerical, "winding_number: angle sum " + fmt17(total) +
                                          " is not a multiple of 2 pi");
  }
  return static_cast<int>(rounded);
}

int crossing_winding_number(const SampledLoop& c, Point2 p) {
  RowCrossings row;
  row.build(c, p.y);
  return row.winding_at(p.x);
}

int turning_index(const SampledLoop& c) {
  const std::size_t n = c.size();
  const double scale = box_diagonal(c.bounds());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e0 = c.edge(i);
    const Point2 e1 = c.edge((i + 1) % n);
    const double l0 = norm(e0), l1 = norm(e1);
    if (!(l0 > 1e-15 * scale) || !(l1 > 1e-15 * scale)) {
      throw Error(ErrorCode::Numerical, "turning_index: degenerate tangent at sample " +
                                            std::to_string((i + 1) % n));
    }
    const double cr = cross(e0, e1), dt = dot(e0, e1);
    if (dt < 0.0 && std::abs(cr) <= 1e-12 * l0 * l1) {
      throw Error(ErrorCode::Numerical, "turning_index: tangent reverses at sample " +
                                            std::to_string((i + 1) % n));
    }
    total += std::atan2(cr, dt);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

bool is_convex(const SampledLoop& c, double tolerance) {
  const std::size_t n = c.size();
  bool positive = false, negative = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e0 = c.edge(i);
    const Point2 e1 = c.edge((i + 1) % n);
    const double cr = cross(e0, e1);
    if (std::abs(cr) <= tolerance * norm(e0) * norm(e1)) continue;
    (cr > 0.0 ? positive : negative) = true;
  }
  return !(positive && negative);
}

std::vector<Crossing> self_intersections(const SampledLoop& c, double tangency_tolerance) {
  const std::size_t n = c.size();
  constexpr double kVertexEps = 1e-12;

  struct EdgeBox {
    double xmin, xmax, ymin, ymax;
  };
  std::vector<EdgeBox> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = c[i], b = c[(i + 1) % n];
    boxes[i] = {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)};
  }

  std::vector<Crossing> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      const EdgeBox& bi = boxes[i];
      const EdgeBox& bj = boxes[j];
      if (bi.xmax < bj.xmin || bj.xmax < bi.xmin || bi.ymax < bj.ymin || bj.ymax < bi.ymin) continue;

      const Point2 p = c[i], d1 = c.edge(i);
      const Point2 q = c[j], d2 = c.edge(j);
      const Point2 r = q - p;
      const double denom = cross(d1, d2);
      const double l1 = norm(d1), l2 = norm(d2);
      if (std::abs(denom) <= tangency_tolerance * l1 * l2) {
        // Near-parallel: any contact is a tangency or an overlap.
        const double off = std::abs(cross(r, d1)) / l1;
        if (off <= tangency_tolerance * std::max(l1, l2)) {
          const double s0 = dot(r, d1) / (l1 * l1);
          const double s1 = dot(r + d2, d1) / (l1 * l1);
          if (std::max(s0, s1) >= 0.0 && std::min(s0, s1) <= 1.0) {
            throw TangencyError("self-intersection: edges " + std::to_string(i) + " and " +
                                    std::to_string(j) + " overlap",
                                i, j);
          }
        }
        continue;
      }
      const double u = cross(r, d2) / denom;
      const double v = cross(r, d1) / denom;
      if (u < -kVertexEps || u > 1.0 + kVertexEps || v < -kVertexEps || v > 1.0 + kVertexEps) continue;
      if (u <= kVertexEps || u >= 1.0 - kVertexEps || v <= kVertexEps || v >= 1.0 - kVertexEps) {
        throw TangencyError("self-intersection at a sample vertex between edges " +
                                std::to_string(i) + " and " + std::to_string(j) + "; resample",
                            i, j);
      }
      out.push_back({i, u, j, v, p + u * d1});
    }
  }
  return out;
}

std::vector<SampledLoop> decompose_simple_loops(const SampledLoop& c, double tangency_tolerance) {
  const std::vector<Crossing> crossings = self_intersections(c, tangency_tolerance);
  const std::size_t n = c.size();

  // Walk order: vertex i, then the crossings on edge i by increasing parameter.
  struct Node {
    Point2 point;
    long crossing;  // -1 for an original vertex
  };
  std::vector<std::vector<std::pair<double, long>>> on_edge(n);
  for (std::size_t k = 0; k < crossings.size(); ++k) {
    on_edge[crossings[k].segment_a].emplace_back(crossings[k].param_a, static_cast<long>(k));
    on_edge[crossings[k].segment_b].emplace_back(crossings[k].param_b, static_cast<long>(k));
  }

  std::vector<SampledLoop> loops;
  std::vector<Node> stack;
  std::vector<long> position(crossings.size(), -1);

  auto visit = [&](const Node& node) {
    if (node.crossing >= 0 && position[node.crossing] >= 0) {
      const auto start = static_cast<std::size_t>(position[node.crossing]);
      std::vector<Point2> pts;
      for (std::size_t i = start; i < stack.size(); ++i) pts.push_back(stack[i].point);
      for (std::size_t i = start + 1; i < stack.size(); ++i) {
        if (stack[i].crossing >= 0) position[stack[i].crossing] = -1;
      }
      stack.resize(start + 1);
      loops.push_back(SampledLoop::polygon(std::move(pts)));
      return;
    }
    if (node.crossing >= 0) position[node.crossing] = static_cast<long>(stack.size());
    stack.push_back(node);
  };

  for (std::size_t i = 0; i < n; ++i) {
    visit({c[i], -1});
    auto& hits = on_edge[i];
    std::sort(hits.begin(), hits.end());
    for (const auto& [param, id] : hits) visit({crossings[id].point, id});
  }
  std::vector<Point2> rest;
  for (const Node& node : stack) rest.push_back(node.point);
  loops.push_back(SampledLoop::polygon(std::move(rest)));
  return loops;
}

std::size_t polynomial_size(int degree) {
  return static_cast<std::size_t>((degree + 1) * (degree + 2) / 2);
}

double eval_polynomial(std::span<const double> coeffs, double x, double y) {
  double total = 0.0;
  std::size_t idx = 0;
  for (int deg = 0; idx < coeffs.size(); ++deg) {
    for (int i = deg; i >= 0 && idx < coeffs.size(); --i, ++idx) {
      total += coeffs[idx] * std::pow(x, i) * std::pow(y, deg - i);
    }
  }
  return total;
}

namespace {

int degree_for(std::size_t ncoeffs) {
  int deg = 0;
  while (polynomial_size(deg) < ncoeffs) ++deg;
  if (polynomial_size(deg) != ncoeffs) {
    throw Error(ErrorCode::InvalidArgument, "polynomial coefficient count must be (d+1)(d+2)/2");
  }
  return deg;
}

// Coefficients of d/dx (axis 0) or d/dy (axis 1) in the same ordering.
std::vector<double> differentiate(const std::vector<double>& coeffs, int axis) {
  const int deg = degree_for(coeffs.size());
  std::vector<double> out(polynomial_size(std::max(deg - 1, 0)), 0.0);
  std::size_t idx = 0;
  for (int d = 0; d <= deg; ++d) {
    for (int i = d; i >= 0; --i, ++idx) {
      const int j = d - i;
      const int power = axis == 0 ? i : j;
      if (power == 0 || d == 0) continue;
      // x^i y^j -> power * x^(i-1) y^j (axis 0) or x^i y^(j-1) (axis 1)
      const int ni = axis == 0 ? i - 1 : i;
      const int nd = d - 1;
      const std::size_t target = polynomial_size(nd - 1) + static_cast<std::size_t>(nd - ni);
      out[target] += power * coeffs[idx];
    }
  }
  return out;
}

}  // namespace

PlaneOneForm::PlaneOneForm(Field p, Field q, Field d)
    : p_(std::move(p)), q_(std::move(q)), d_(std::move(d)) {
  constexpr double h = 1e-4;
  const Point2 probes[] = {{0.3, -0.7}, {-1.1, 0.4}, {1.7, 1.3}, {-0.5, -1.9}, {0.0, 0.9}};
  for (const Point2 pt : probes) {
    const double dqdx = (q_(pt.x + h, pt.y) - q_(pt.x - h, pt.y)) / (2 * h);
    const double dpdy = (p_(pt.x, pt.y + h) - p_(pt.x, pt.y - h)) / (2 * h);
    const double fd = dqdx - dpdy;
    const double given = d_(pt.x, pt.y);
    if (std::abs(fd - given) > 1e-5 * (1.0 + std::abs(fd))) {
      throw Error(ErrorCode::InvalidArgument,
                  "one-form exterior derivative disagrees with central differences at (" +
                      fmt17(pt.x) + ", " + fmt17(pt.y) + ")");
    }
  }
}

PlaneOneForm PlaneOneForm::polynomial(std::vector<double> p_coeffs, std::vector<double> q_coeffs) {
  degree_for(p_coeffs.size());
  degree_for(q_coeffs.size());
  const std::vector<double> dq_dx = differentiate(q_coeffs, 0);
  const std::vector<double> dp_dy = differentiate(p_coeffs, 1);
  return PlaneOneForm(
      [p = std::move(p_coeffs)](double x, double y) { return eval_polynomial(p, x, y); },
      [q = std::move(q_coeffs)](double x, double y) { return eval_polynomial(q, x, y); },
      [dq_dx, dp_dy](double x, double y) {
        return eval_polynomial(dq_dx, x, y) - eval_polynomial(dp_dy, x, y);
      });
}

PlaneOneForm PlaneOneForm::x_dy() {
  return PlaneOneForm([](double, double) { return 0.0; }, [](double x, double) { return x; },
                      [](double, double) { return 1.0; });
}

PlaneOneForm PlaneOneForm::exact(Field hx, Field hy) {
  return PlaneOneForm(std::move(hx), std::move(hy), [](double, double) { return 0.0; });
}

Grid2D Grid2D::covering(std::span<const SampledLoop* const> loops, int resolution, double margin) {
  if (loops.empty() || resolution < 2) {
    throw Error(ErrorCode::InvalidArgument, "grid needs at least one loop and resolution >= 2");
  }
  SampledLoop::Box b = loops[0]->bounds();
  for (const SampledLoop* l : loops) {
    const auto o = l->bounds();
    b.xmin = std::min(b.xmin, o.xmin);
    b.xmax = std::max(b.xmax, o.xmax);
    b.ymin = std::min(b.ymin, o.ymin);
    b.ymax = std::max(b.ymax, o.ymax);
  }
  const double side = std::max(b.xmax - b.xmin, b.ymax - b.ymin);
  const double pad = margin * side;
  const double full = side + 2.0 * pad;
  const double h = full / resolution;
  const double cx = 0.5 * (b.xmin + b.xmax), cy = 0.5 * (b.ymin + b.ymax);

  Grid2D g;
  g.nx = std::max(1, static_cast<int>(std::ceil((b.xmax - b.xmin + 2.0 * pad) / h - 1e-9)));
  g.ny = std::max(1, static_cast<int>(std::ceil((b.ymax - b.ymin + 2.0 * pad) / h - 1e-9)));
  g.xmin = cx - 0.5 * h * g.nx;
  g.xmax = cx + 0.5 * h * g.nx;
  g.ymin = cy - 0.5 * h * g.ny;
  g.ymax = cy + 0.5 * h * g.ny;
  return g;
}

Grid2D Grid2D::covering(const SampledLoop& loop, int resolution, double margin) {
  const SampledLoop* one[] = {&loop};
  return covering(one, resolution, margin);
}

double winding_weighted_integral(const SampledLoop& c,
                                 const std::function<double(double, double)>& density,
                                 const Grid2D& grid, QuadratureStats* stats) {
  const int nx = grid.nx, ny = grid.ny;
  const double hx = grid.hx(), hy = grid.hy();
  const auto box = c.bounds();
  if (box.xmin < grid.xmin || box.xmax > grid.xmax || box.ymin < grid.ymin || box.ymax > grid.ymax) {
    throw Error(ErrorCode::InvalidArgument, "quadrature grid does not cover the loop");
  }

  // Per cell: integrals of Wind, Wind (x - xc) and Wind (y - yc), exact for
  // the polygon. Wind(x, y) sums +-1 over edges crossing height y to the
  // right of x, so an edge piece adds the part of each cell to its left.
  const std::size_t cells = static_cast<std::size_t>(nx) * ny;
  std::vector<double> m0(cells, 0.0), mx(cells, 0.0), my(cells, 0.0);
  std::vector<double> carry0(cells, 0.0), carry_y(cells, 0.0);
  std::vector<unsigned char> touched(cells, 0);

  auto column = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x - grid.xmin) / hx)), 0, nx - 1);
  };
  auto row_of = [&](double y) {
    return std::clamp(static_cast<int>(std::floor((y - grid.ymin) / hy)), 0, ny - 1);
  };

  // Piece (xa, ya) -> (xb, yb) lying inside cell (i, j).
  auto deposit = [&](int i, int j, double xa, double ya, double xb, double yb) {
    const double dy = yb - ya;
    const std::size_t k = static_cast<std::size_t>(j) * nx + i;
    touched[k] = 1;
    if (dy == 0.0) return;
    const double x0 = grid.xmin + i * hx, xc = x0 + 0.5 * hx;
    const double yc = grid.ymin + (j + 0.5) * hy;
    const double ua = xa - x0, ub = xb - x0;
    const double da = xa - xc, db = xb - xc;
    const double va = ya - yc, vb = yb - yc;
    m0[k] += 0.5 * (ua + ub) * dy;
    mx[k] += 0.5 * dy * ((da * da + da * db + db * db) / 3.0 - 0.25 * hx * hx);
    my[k] += dy * (2.0 * ua * va + ua * vb + ub * va + 2.0 * ub * vb) / 6.0;
    carry0[k] += hx * dy;
    carry_y[k] += hx * dy * 0.5 * (va + vb);
  };

  const std::size_t n = c.size();
  std::vector<double> cuts;
  for (std::size_t e = 0; e < n; ++e) {
    const Point2 a = c[e], b = c[(e + 1) % n];
    if (a.y == b.y) {
      const int j = row_of(a.y);
      for (int i = column(std::min(a.x, b.x)); i <= column(std::max(a.x, b.x)); ++i) {
        touched[static_cast<std::size_t>(j) * nx + i] = 1;
      }
      continue;
    }
    const int j0 = row_of(std::min(a.y, b.y)), j1 = row_of(std::max(a.y, b.y));
    for (int j = j0; j <= j1; ++j) {
      const double y0 = grid.ymin + j * hy, y1 = y0 + hy;
      // Clip the edge to the row band by its parameter.
      double s0 = (y0 - a.y) / (b.y - a.y), s1 = (y1 - a.y) / (b.y - a.y);
      if (s0 > s1) std::swap(s0, s1);
      s0 = std::max(s0, 0.0);
      s1 = std::min(s1, 1.0);
      if (!(s1 > s0)) continue;
      // Split at vertical grid lines, in parameter order.
      const double xs0 = a.x + s0 * (b.x - a.x), xs1 = a.x + s1 * (b.x - a.x);
      cuts.assign({s0, s1});
      if (b.x != a.x) {
        const int ia = column(std::min(xs0, xs1)), ib = column(std::max(xs0, xs1));
        for (int i = ia + 1; i <= ib; ++i) {
          const double s = (grid.xmin + i * hx - a.x) / (b.x - a.x);
          if (s > s0 && s < s1) cuts.push_back(s);
        }
        std::sort(cuts.begin(), cuts.end());
      }
      for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
        const double sa = cuts[q], sb = cuts[q + 1];
        const double xa = a.x + sa * (b.x - a.x), ya = a.y + sa * (b.y - a.y);
        const double xb = a.x + sb * (b.x - a.x), yb = a.y + sb * (b.y - a.y);
        deposit(column(0.5 * (xa + xb)), j, xa, ya, xb, yb);
      }
    }
  }

  const double cell_area = hx * hy;
  CompensatedSum total;
  QuadratureStats local;
  for (int j = 0; j < ny; ++j) {
    const double yc = grid.ymin + (j + 0.5) * hy;
    double run0 = 0.0, run_y = 0.0;
    for (int i = nx - 1; i >= 0; --i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      const double w0 = m0[k] + run0, wy = my[k] + run_y;
      run0 += carry0[k];
      run_y += carry_y[k];
      const double xc = grid.xmin + (i + 0.5) * hx;
      if (!touched[k]) {
        // The curve misses this cell, so Wind is constant on it.
        const double w = std::round(w0 / cell_area);
        if (w != 0.0) total.add(w * density(xc, yc) * cell_area);
        continue;
      }
      const double centre = density(xc, yc);
      const double east = density(xc + 0.5 * hx, yc), west = density(xc - 0.5 * hx, yc);
      const double north = density(xc, yc + 0.5 * hy), south = density(xc, yc - 0.5 * hy);
      total.add(centre * w0 + (east - west) / hx * mx[k] + (north - south) / hy * wy);
      ++local.boundary_cells;
      local.error_bound += (std::abs(east - 2.0 * centre + west) + std::abs(north - 2.0 * centre + south)) *
                           std::abs(w0) / 2.0;
    }
  }
  if (stats) *stats = local;
  return total.value();
}

double line_integral(const SampledLoop& c, const PlaneOneForm& w) {
  CompensatedSum total;
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = c[i], e = c.edge(i);
    const Point2 m = a + 0.5 * e;
    total.add(w.p(m.x, m.y) * e.x + w.q(m.x, m.y) * e.y);
  }
  return total.value();
}

StokesReport stokes_residual(const SampledLoop& c, const PlaneOneForm& w, const Grid2D& grid) {
  StokesReport r;
  QuadratureStats stats;
  r.lhs = line_integral(c, w);
  r.rhs = winding_weighted_integral(
      c, [&w](double x, double y) { return w.d(x, y); }, grid, &stats);
  r.residual = std::abs(r.lhs - r.rhs);
  r.resolution = std::max(grid.nx, grid.ny);
  r.error_bound = stats.error_bound;
  return r;
}

StokesReport stokes_residual(const SampledLoop& c, const PlaneOneForm& w, int resolution) {
  return stokes_residual(c, w, Grid2D::covering(c, resolution));
}

SampledLoop LoopFamily::slice(double t) const {
  if (t < t_min || t > t_max) {
    throw Error(ErrorCode::Domain, "loop family evaluated outside its t-range at t=" + fmt17(t));
  }
  return SampledLoop::sample([&](double s) { return eval(s, t); }, samples);
}

WindingDerivativeReport winding_derivative_residual(
    const LoopFamily& family, const std::function<double(double, double)>& beta_density, double t,
    double h, int resolution) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "winding derivative step must be positive");
  const SampledLoop minus = family.slice(t - h);
  const SampledLoop plus = family.slice(t + h);
  const SampledLoop mid = family.slice(t);
  const SampledLoop* loops[] = {&minus, &plus, &mid};
  const Grid2D grid = Grid2D::covering(loops, resolution);

  WindingDerivativeReport r;
  const double ip = winding_weighted_integral(plus, beta_density, grid);
  const double im = winding_weighted_integral(minus, beta_density, grid);
  r.lhs = (ip - im) / (2.0 * h);

  // i_V (b dx^dy) = b (V_x dy - V_y dx), V = d_t c_t by central differences.
  const std::size_t n = mid.size();
  auto velocity = [&](std::size_t i) { return (1.0 / (2.0 * h)) * (plus[i] - minus[i]); };
  CompensatedSum rhs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t next = (i + 1) % n;
    const Point2 e = mid.edge(i);
    const Point2 m = mid[i] + 0.5 * e;
    const Point2 v = 0.5 * (velocity(i) + velocity(next));
    rhs.add(beta_density(m.x, m.y) * cross(v, e));
  }
  r.rhs = rhs.value();
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

std::string loop_csv(const SampledLoop& c) {
  std::string out = "s,x,y\n";
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    out += fmt17(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    out += ',';
    out += fmt17(c[i].x);
    out += ',';
    out += fmt17(c[i].y);
    out += '\n';
  }
  return out;
}

void write_loop_csv(const SampledLoop& c, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
  os << loop_csv(c);
  if (!os) throw Error(ErrorCode::Io, "failed writing " + path);
}

SampledLoop read_loop_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path);
  std::string line;
  std::vector<Point2> pts;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("s,x,y", 0) == 0) continue;
      throw Error(ErrorCode::Io, path + ": expected header s,x,y");
    }
    std::istringstream ls(line);
    std::string s, x, y;
    if (!std::getline(ls, s, ',') || !std::getline(ls, x, ',') || !std::getline(ls, y)) {
      throw Error(ErrorCode::Io, path + ": malformed row '" + line + "'");
    }
    try {
      pts.push_back({std::stod(x), std::stod(y)});
    } catch (const std::exception&) {
      throw Error(ErrorCode::Io, path + ": malformed number in row '" + line + "'");
    }
  }
  return SampledLoop(std::move(pts));
}

}  // namespace hypcusp::plane
