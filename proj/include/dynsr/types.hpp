#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynsr {

template <int K>
using Point = Eigen::Matrix<double, K, 1>;
using Vec2 = Point<2>;

/// Coordinates closer than this (absolute, per axis) are treated as one atom.
inline constexpr double kMergeTolerance = 1e-12;

/// Weighted point list in K dimensions with nonnegative weights.
template <int K>
struct DiscreteMeasure {
  std::vector<Point<K>> points;
  std::vector<double> weights;

  DiscreteMeasure() = default;
  DiscreteMeasure(std::vector<Point<K>> pts, std::vector<double> ws)
      : points(std::move(pts)), weights(std::move(ws)) {
    validate();
  }

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void add(const Point<K>& p, double w) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("DiscreteMeasure: weights must be finite and nonnegative");
    }
    points.push_back(p);
    weights.push_back(w);
  }

  double total_mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

  void validate() const {
    if (points.size() != weights.size()) {
      throw std::invalid_argument("DiscreteMeasure: points and weights differ in length");
    }
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("DiscreteMeasure: weights must be finite and nonnegative");
      }
    }
  }
};

namespace detail {

template <int K>
bool lex_less(const Point<K>& a, const Point<K>& b) {
  for (int k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return true;
    if (a[k] > b[k]) return false;
  }
  return false;
}

template <int K>
bool within_tolerance(const Point<K>& a, const Point<K>& b, double tol) {
  return ((a - b).cwiseAbs().array() <= tol).all();
}

}  // namespace detail

/// Canonical form: atoms sorted lexicographically, atoms whose coordinates agree
/// within `tol` merged (weights summed, first representative kept).
template <int K>
DiscreteMeasure<K> canonicalize(const DiscreteMeasure<K>& in, double tol = kMergeTolerance) {
  in.validate();
  std::vector<std::size_t> order(in.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::lex_less<K>(in.points[a], in.points[b]);
  });

  DiscreteMeasure<K> out;
  std::vector<bool> used(in.size(), false);
  for (std::size_t a = 0; a < order.size(); ++a) {
    const std::size_t ia = order[a];
    if (used[ia]) continue;
    used[ia] = true;
    double w = in.weights[ia];
    // Candidates for merging share the first coordinate within tol, and are
    // contiguous in the sorted order.
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const std::size_t ib = order[b];
      if (in.points[ib][0] - in.points[ia][0] > tol) break;
      if (!used[ib] && detail::within_tolerance<K>(in.points[ia], in.points[ib], tol)) {
        used[ib] = true;
        w += in.weights[ib];
      }
    }
    out.points.push_back(in.points[ia]);
    out.weights.push_back(w);
  }
  return out;
}

/// One particle: initial position, velocity, mass.
template <int D>
struct Particle {
  Point<D> x;
  Point<D> v;
  double m = 1.0;
};

/// Ground-truth phase-space configuration (sum of weighted Diracs at (x, v)).
template <int D>
struct ParticleConfig {
  std::vector<Particle<D>> particles;

  std::size_t size() const { return particles.size(); }
  bool empty() const { return particles.empty(); }

  double total_mass() const {
    double s = 0.0;
    for (const auto& p : particles) s += p.m;
    return s;
  }

  void validate() const {
    for (std::size_t i = 0; i < particles.size(); ++i) {
      const auto& p = particles[i];
      if (!(p.m > 0.0) || !std::isfinite(p.m)) {
        throw std::invalid_argument("ParticleConfig: masses must be positive and finite");
      }
      if (!p.x.allFinite() || !p.v.allFinite()) {
        throw std::invalid_argument("ParticleConfig: non-finite position or velocity");
      }
      for (std::size_t j = 0; j < i; ++j) {
        const auto& q = particles[j];
        if (p.x == q.x && p.v == q.v) {
          throw std::invalid_argument("ParticleConfig: duplicate (position, velocity) pair at " +
                                      std::to_string(j) + " and " + std::to_string(i));
        }
      }
    }
  }
};

}  // namespace dynsr
