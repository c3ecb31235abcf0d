#pragma once

// Exact operators on finitely supported measures: pushforwards (Radon, joint
// Radon, move), Fourier transforms and separation statistics.

#include "dynsr/geometry.hpp"
#include "dynsr/types.hpp"

#include <complex>
#include <limits>
#include <span>

namespace dynsr {

/// Pushforward of a measure under a point map; coinciding images are merged.
template <int Kout, int Kin, typename Map>
DiscreteMeasure<Kout> pushforward(const DiscreteMeasure<Kin>& nu, Map&& map) {
  DiscreteMeasure<Kout> out;
  out.points.reserve(nu.size());
  out.weights = nu.weights;
  for (const auto& p : nu.points) out.points.push_back(map(p));
  return canonicalize(out);
}

/// Phase-space measure sum m_i delta_(x_i, v_i) for 1-D particles.
inline DiscreteMeasure<2> phase_measure(const ParticleConfig<1>& cfg) {
  DiscreteMeasure<2> out;
  for (const auto& p : cfg.particles) out.add(Vec2(p.x[0], p.v[0]), p.m);
  return canonicalize(out);
}

/// Radon transform: pushforward under x -> theta.x.
template <int D>
DiscreteMeasure<1> radon_project(const DiscreteMeasure<D>& nu, const Direction<D>& theta) {
  return pushforward<1>(nu, [&](const Point<D>& x) { return Point<1>(theta.dot(x)); });
}

/// Joint Radon transform: pushforward under (x, v) -> (theta.x, theta.v).
template <int D>
DiscreteMeasure<2> joint_radon(const ParticleConfig<D>& lambda, const Direction<D>& theta) {
  DiscreteMeasure<2> out;
  for (const auto& p : lambda.particles) out.add(Vec2(theta.dot(p.x), theta.dot(p.v)), p.m);
  return canonicalize(out);
}

/// Move operator: pushforward under (x, v) -> x + t v (the time-t snapshot).
template <int D>
DiscreteMeasure<D> move(const ParticleConfig<D>& lambda, double t) {
  DiscreteMeasure<D> out;
  for (const auto& p : lambda.particles) out.add(Point<D>(p.x + t * p.v), p.m);
  return canonicalize(out);
}

/// One-dimensional move operator on a position-velocity measure: (y, w) -> y + t w.
inline DiscreteMeasure<1> move1d(const DiscreteMeasure<2>& gamma, double t) {
  return pushforward<1>(gamma, [t](const Vec2& p) { return Point<1>(p.x() + t * p.y()); });
}

/// Fourier transform sum m_i exp(-i x_i . xi).
template <int K>
std::complex<double> fourier(const DiscreteMeasure<K>& nu, const Point<K>& xi) {
  std::complex<double> acc(0.0, 0.0);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const double phase = nu.points[i].dot(xi);
    acc += nu.weights[i] * std::complex<double>(std::cos(phase), -std::sin(phase));
  }
  return acc;
}

/// Minimal pairwise distance over the given times; +inf for fewer than two particles.
template <int D>
double dynamic_separation(const ParticleConfig<D>& S, std::span<const double> times) {
  double best = std::numeric_limits<double>::infinity();
  const auto& ps = S.particles;
  for (double t : times) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const Point<D> xi = ps[i].x + t * ps[i].v;
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        best = std::min(best, (xi - (ps[j].x + t * ps[j].v)).norm());
      }
    }
  }
  return best;
}

template <int D>
double dynamic_separation(const ParticleConfig<D>& S, const std::vector<double>& times) {
  return dynamic_separation(S, std::span<const double>(times));
}

/// Positions of the particles at time t, particle identity preserved (no merging).
template <int D>
std::vector<Point<D>> positions_at(const ParticleConfig<D>& S, double t) {
  std::vector<Point<D>> out;
  out.reserve(S.size());
  for (const auto& p : S.particles) out.push_back(p.x + t * p.v);
  return out;
}

/// Per-particle projection (theta.x_i, theta.v_i) as a 1-D configuration;
/// particle identity preserved (no merging).
template <int D>
ParticleConfig<1> project_config(const ParticleConfig<D>& S, const Direction<D>& theta) {
  ParticleConfig<1> out;
  for (const auto& p : S.particles) {
    out.particles.push_back({Point<1>(theta.dot(p.x)), Point<1>(theta.dot(p.v)), p.m});
  }
  return out;
}

}  // namespace dynsr
