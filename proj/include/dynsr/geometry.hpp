#pragma once

// Exact supports of the reconstruction variables for Omega = [0,1]^d and
// measurement times centred in [-T, T], plus affine grids on those supports.

#include "dynsr/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dynsr {

/// Measurement times (symmetric around 0) and the additional reconstruction times.
struct TimeGrid {
  std::vector<double> measurement_times;
  std::vector<double> extra_times;
  double half_width = 0.0;

  static TimeGrid make(std::vector<double> measurement, std::vector<double> extra = {}) {
    if (measurement.empty()) throw std::invalid_argument("TimeGrid: no measurement times");
    std::sort(measurement.begin(), measurement.end());
    const double T = std::max(std::abs(measurement.front()), std::abs(measurement.back()));
    if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: measurement times must span a nonzero interval");
    if (std::abs(measurement.front() + T) > 1e-12 || std::abs(measurement.back() - T) > 1e-12) {
      throw std::invalid_argument("TimeGrid: measurement times must be centred (min = -max)");
    }
    for (double e : extra) {
      for (double t : measurement) {
        if (std::abs(e - t) <= 1e-12) throw std::invalid_argument("TimeGrid: extra time duplicates a measurement time");
      }
    }
    TimeGrid g;
    g.measurement_times = std::move(measurement);
    g.extra_times = std::move(extra);
    g.half_width = T;
    return g;
  }

  /// Measurement times followed by extra times.
  std::vector<double> all_times() const {
    std::vector<double> out = measurement_times;
    out.insert(out.end(), extra_times.begin(), extra_times.end());
    return out;
  }
};

/// The measurement times {k/K : k = -K..K}.
inline std::vector<double> centred_times(int K) {
  if (K < 1) throw std::invalid_argument("centred_times: K must be >= 1");
  std::vector<double> out;
  for (int k = -K; k <= K; ++k) out.push_back(static_cast<double>(k) / K);
  return out;
}

/// Unit vector in R^D.
template <int D>
class Direction {
 public:
  explicit Direction(const Point<D>& u) : u_(u) {
    if (std::abs(u_.norm() - 1.0) > 1e-12) throw std::invalid_argument("Direction: vector is not unit length");
  }

  static Direction normalized(const Point<D>& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("Direction: zero vector");
    return Direction(Point<D>(v / n));
  }

  static Direction from_angle(double phi)
    requires(D == 2)
  {
    return Direction(Point<2>(std::cos(phi), std::sin(phi)));
  }

  const Point<D>& vector() const { return u_; }
  double operator[](int i) const { return u_[i]; }
  double dot(const Point<D>& x) const { return u_.dot(x); }

  /// Sum of positive and of negative components.
  double s_plus() const { return (u_.array() > 0.0).select(u_.array(), 0.0).sum(); }
  double s_minus() const { return (u_.array() < 0.0).select(u_.array(), 0.0).sum(); }

 private:
  Point<D> u_;
};

using Direction2 = Direction<2>;

/// True iff x + t v stays in [0,1]^D for t = -T and t = +T. Straight
/// trajectories and a convex domain make the two endpoint checks sufficient.
template <int D>
bool phase_domain_contains(const Point<D>& x, const Point<D>& v, double T) {
  const Point<D> lo = x - T * v;
  const Point<D> hi = x + T * v;
  return (lo.array() >= 0.0).all() && (lo.array() <= 1.0).all() && (hi.array() >= 0.0).all() &&
         (hi.array() <= 1.0).all();
}

/// Four vertices, in the order (s-,0), (s+,0), top, bottom.
struct Parallelogram {
  std::array<Vec2, 4> vertices;

  double area() const {
    // Diagonals are (v0,v1) and (v2,v3).
    const Vec2 d1 = vertices[1] - vertices[0];
    const Vec2 d2 = vertices[2] - vertices[3];
    return 0.5 * std::abs(d1.x() * d2.y() - d1.y() * d2.x());
  }

  /// Counter-clockwise boundary: left, bottom, right, top.
  std::array<Vec2, 4> boundary() const { return {vertices[0], vertices[3], vertices[1], vertices[2]}; }

  bool contains(const Vec2& p, double tol = 1e-12) const {
    const auto b = boundary();
    for (int i = 0; i < 4; ++i) {
      const Vec2 e = b[(i + 1) % 4] - b[i];
      const Vec2 r = p - b[i];
      if (e.x() * r.y() - e.y() * r.x() < -tol * std::max(1.0, e.norm())) return false;
    }
    return true;
  }
};

/// Support of the position-velocity projection along theta: image of the
/// phase domain under (x, v) -> (theta.x, theta.v).
template <int D>
Parallelogram projected_phase_domain(const Direction<D>& theta, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("projected_phase_domain: T must be positive");
  const double sp = theta.s_plus();
  const double sm = theta.s_minus();
  const double mid = 0.5 * (sp + sm);
  const double h = (sp - sm) / (2.0 * T);
  return Parallelogram{{Vec2(sm, 0.0), Vec2(sp, 0.0), Vec2(mid, h), Vec2(mid, -h)}};
}

template <int D>
struct Box {
  Point<D> lower;
  Point<D> upper;

  bool contains(const Point<D>& p, double tol = 0.0) const {
    return ((p - lower).array() >= -tol).all() && ((upper - p).array() >= -tol).all();
  }
};

/// Support of the snapshot at time t.
template <int D>
Box<D> snapshot_domain(double t, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("snapshot_domain: T must be positive");
  if (std::abs(t) <= T) return {Point<D>::Zero(), Point<D>::Ones()};
  const double r = std::abs(t) / (2.0 * T);
  return {Point<D>::Constant(0.5 - r), Point<D>::Constant(0.5 + r)};
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double s, double tol = 0.0) const { return s >= lo - tol && s <= hi + tol; }
};

/// Support of the projected snapshot theta.(x + t v): the span of the vertex
/// images of the projected phase domain under (y, w) -> y + t w.
template <int D>
Interval bin_interval(const Direction<D>& theta, double t, double T) {
  const Parallelogram p = projected_phase_domain(theta, T);
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2& v : p.vertices) {
    const double s = v.x() + t * v.y();
    out.lo = std::min(out.lo, s);
    out.hi = std::max(out.hi, s);
  }
  return out;
}

/// Affine image z -> A z + b of a regular M^k grid on the unit cube (k = 1, 2).
/// Cells are numbered row-major over the reference square: j = row * M + col,
/// where col runs along the first reference axis.
class GridSpec {
 public:
  GridSpec(int dim, int resolution, const Eigen::Matrix2d& A, const Vec2& b)
      : dim_(dim), M_(resolution), A_(A), b_(b) {
    if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("GridSpec: dimension must be 1 or 2");
    if (M_ < 1) throw std::invalid_argument("GridSpec: resolution must be >= 1");
    const double vol = dim_ == 1 ? std::abs(A_(0, 0)) : std::abs(A_.determinant());
    if (!(vol > 0.0) || !std::isfinite(vol)) throw std::invalid_argument("GridSpec: degenerate domain");
    if (dim_ == 1) {
      A_(0, 1) = A_(1, 0) = A_(1, 1) = 0.0;
      b_(1) = 0.0;
    }
  }

  int dim() const { return dim_; }
  int resolution() const { return M_; }
  const Eigen::Matrix2d& linear() const { return A_; }
  const Vec2& offset() const { return b_; }

  Eigen::Index cell_count() const { return dim_ == 1 ? M_ : static_cast<Eigen::Index>(M_) * M_; }
  double domain_volume() const { return dim_ == 1 ? std::abs(A_(0, 0)) : std::abs(A_.determinant()); }
  double cell_volume() const { return dim_ == 1 ? domain_volume() / M_ : domain_volume() / (double(M_) * M_); }

  Vec2 map(const Vec2& z) const { return A_ * z + b_; }

  /// Centre of cell j (2-D grids).
  Vec2 cell_center(Eigen::Index j) const {
    if (dim_ == 1) return Vec2(center_1d(j), 0.0);
    const auto [row, col] = row_col(j);
    return map(Vec2((col + 0.5) / M_, (row + 0.5) / M_));
  }

  /// Counter-clockwise vertices of cell j (2-D grids).
  std::array<Vec2, 4> cell_vertices(Eigen::Index j) const {
    const auto [row, col] = row_col(j);
    const double z0 = double(col) / M_, z1 = double(col + 1) / M_;
    const double w0 = double(row) / M_, w1 = double(row + 1) / M_;
    std::array<Vec2, 4> v = {map(Vec2(z0, w0)), map(Vec2(z1, w0)), map(Vec2(z1, w1)), map(Vec2(z0, w1))};
    if (A_.determinant() < 0.0) std::swap(v[1], v[3]);
    return v;
  }

  std::pair<int, int> row_col(Eigen::Index j) const {
    return {static_cast<int>(j / M_), static_cast<int>(j % M_)};
  }

  /// Breakpoints r_0 < ... < r_M of a 1-D grid.
  std::vector<double> breakpoints() const {
    std::vector<double> r(M_ + 1);
    for (int i = 0; i <= M_; ++i) r[i] = b_(0) + A_(0, 0) * (double(i) / M_);
    if (A_(0, 0) < 0.0) std::reverse(r.begin(), r.end());
    return r;
  }

  double center_1d(Eigen::Index i) const { return b_(0) + A_(0, 0) * ((i + 0.5) / M_); }

  Interval interval() const {
    const double a = b_(0), c = b_(0) + A_(0, 0);
    return {std::min(a, c), std::max(a, c)};
  }

  /// Index of the cell containing p; points on a shared edge go to the lower
  /// index. Returns nullopt outside the domain (tolerance `tol` in reference
  /// coordinates).
  std::optional<Eigen::Index> locate(const Vec2& p, double tol = 1e-12) const {
    if (dim_ == 1) {
      const double z = (p(0) - b_(0)) / A_(0, 0);
      const auto c = axis_index(z, tol);
      if (!c) return std::nullopt;
      return *c;
    }
    const Vec2 z = A_.lu().solve(p - b_);
    const auto col = axis_index(z(0), tol);
    const auto row = axis_index(z(1), tol);
    if (!col || !row) return std::nullopt;
    return static_cast<Eigen::Index>(*row) * M_ + *col;
  }

 private:
  std::optional<int> axis_index(double z, double tol) const {
    if (z < -tol || z > 1.0 + tol) return std::nullopt;
    const int c = static_cast<int>(std::ceil(z * M_)) - 1;
    return std::clamp(c, 0, M_ - 1);
  }

  int dim_;
  int M_;
  Eigen::Matrix2d A_;
  Vec2 b_;
};

/// Sheared grid: reference square mapped onto the parallelogram so that the
/// corners (0,0), (1,0), (0,1), (1,1) land on left, bottom, top, right.
inline GridSpec make_grid(const Parallelogram& p, int M) {
  const Vec2& left = p.vertices[0];
  Eigen::Matrix2d A;
  A.col(0) = p.vertices[3] - left;
  A.col(1) = p.vertices[2] - left;
  if (!(std::abs(A.determinant()) > 0.0)) throw std::invalid_argument("make_grid: degenerate parallelogram");
  return GridSpec(2, M, A, left);
}

inline GridSpec make_grid(const Box<2>& box, int M) {
  const Vec2 ext = box.upper - box.lower;
  if (!(ext.x() > 0.0 && ext.y() > 0.0)) throw std::invalid_argument("make_grid: degenerate box");
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  A(0, 0) = ext.x();
  A(1, 1) = ext.y();
  return GridSpec(2, M, A, box.lower);
}

inline GridSpec make_grid(const Interval& iv, int M) {
  if (!(iv.hi > iv.lo)) throw std::invalid_argument("make_grid: degenerate interval");
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  A(0, 0) = iv.hi - iv.lo;
  return GridSpec(1, M, A, Vec2(iv.lo, 0.0));
}

}  // namespace dynsr
