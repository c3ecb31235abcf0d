#pragma once

// Degeneracy analysis: coincidences, ghost particles and their
// Delta-relaxations, for particle trajectories observed at several times and
// for snapshots observed along several directions.
//
// Both settings are instances of one probe system. Given probes a_k in R^2 and
// points p_i in R^2, a ghost is a point q not among the p_i with
// a_k . q = a_k . p_{i_k} for every k and pairwise distinct i_k. For a 1-D
// trajectory configuration the probes are (1, t) and the points are (x_i, v_i),
// so a_k . q = x + t v. For a snapshot observed along directions the probes are
// the directions and the points the particle positions.

#include "dynsr/geometry.hpp"
#include "dynsr/measures.hpp"
#include "dynsr/metrics.hpp"
#include "dynsr/types.hpp"

#include <json.hpp>

#include <functional>
#include <limits>
#include <vector>

namespace dynsr {

struct ProbeSystem {
  std::vector<Vec2> probes;
  std::vector<Vec2> points;
  std::vector<double> labels;  // time or direction angle of each probe, for reporting
};

inline ProbeSystem time_probes(const ParticleConfig<1>& S, const std::vector<double>& times) {
  ProbeSystem ps;
  for (double t : times) {
    ps.probes.emplace_back(1.0, t);
    ps.labels.push_back(t);
  }
  for (const auto& p : S.particles) ps.points.emplace_back(p.x[0], p.v[0]);
  return ps;
}

inline ProbeSystem direction_probes(const DiscreteMeasure<2>& snapshot, const std::vector<Direction2>& dirs) {
  ProbeSystem ps;
  for (const auto& d : dirs) {
    ps.probes.push_back(d.vector());
    ps.labels.push_back(std::atan2(d[1], d[0]));
  }
  ps.points = snapshot.points;
  return ps;
}

struct Coincidence {
  double label;  // time or direction angle
  int i;
  int j;
  double distance;
};

struct Ghost {
  Vec2 point;  // (x, v) in the time setting, a position in the direction setting
  std::vector<int> assignment;
};

/// Distinct particle pairs within distance delta at some time, for
/// trajectories in any dimension.
template <int D>
std::vector<Coincidence> find_coincidences(const ParticleConfig<D>& S, const std::vector<double>& times, double delta) {
  std::vector<Coincidence> out;
  const auto& ps = S.particles;
  for (double t : times) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        const double d = ((ps[i].x - ps[j].x) + t * (ps[i].v - ps[j].v)).norm();
        if (d <= delta) out.push_back({t, static_cast<int>(i), static_cast<int>(j), d});
      }
    }
  }
  return out;
}

inline std::vector<Coincidence> find_coincidences(const ProbeSystem& ps, double delta) {
  std::vector<Coincidence> out;
  for (std::size_t k = 0; k < ps.probes.size(); ++k) {
    for (std::size_t i = 0; i < ps.points.size(); ++i) {
      for (std::size_t j = i + 1; j < ps.points.size(); ++j) {
        const double d = std::abs(ps.probes[k].dot(ps.points[i] - ps.points[j]));
        if (d <= delta) out.push_back({ps.labels[k], static_cast<int>(i), static_cast<int>(j), d});
      }
    }
  }
  return out;
}

namespace detail {

/// Distinct-index assignment of probes to incident points (augmenting
/// paths), or empty if none exists.
inline std::vector<int> distinct_incidence(const std::vector<std::vector<int>>& incident, int n_points) {
  std::vector<int> match_r(n_points, -1), match_l(incident.size(), -1);
  std::function<bool(int, std::vector<char>&)> augment = [&](int l, std::vector<char>& seen) {
    for (int r : incident[l]) {
      if (seen[r]) continue;
      seen[r] = 1;
      if (match_r[r] < 0 || augment(match_r[r], seen)) {
        match_r[r] = l;
        match_l[l] = r;
        return true;
      }
    }
    return false;
  };
  for (int l = 0; l < static_cast<int>(incident.size()); ++l) {
    std::vector<char> seen(n_points, 0);
    if (!augment(l, seen)) return {};
  }
  return match_l;
}

}  // namespace detail

/// Exact ghosts of a probe system. Any ghost is incident to some point i at
/// probe 0 and some point j != i at probe 1, so candidates are the
/// intersections of those pairs of lines.
inline std::vector<Ghost> find_ghosts(const ProbeSystem& ps, double tol = 1e-9) {
  if (ps.probes.size() < 2) throw std::invalid_argument("find_ghosts: at least two probes required");
  const auto& a = ps.probes;
  const int n = static_cast<int>(ps.points.size());
  Eigen::Matrix2d B;
  B.row(0) = a[0].transpose();
  B.row(1) = a[1].transpose();
  if (std::abs(B.determinant()) < 1e-14) throw std::invalid_argument("find_ghosts: first two probes are parallel");
  const Eigen::Matrix2d Binv = B.inverse();
  std::vector<Ghost> out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vec2 q = Binv * Vec2(a[0].dot(ps.points[i]), a[1].dot(ps.points[j]));
      bool is_point = false;
      for (const auto& p : ps.points) is_point = is_point || (p - q).norm() <= tol;
      if (is_point) continue;
      bool duplicate = false;
      for (const auto& g : out) duplicate = duplicate || (g.point - q).norm() <= tol;
      if (duplicate) continue;
      std::vector<std::vector<int>> incident(a.size());
      bool all = true;
      for (std::size_t k = 0; k < a.size() && all; ++k) {
        for (int m = 0; m < n; ++m)
          if (std::abs(a[k].dot(q - ps.points[m])) <= tol * std::max(1.0, a[k].norm())) incident[k].push_back(m);
        all = !incident[k].empty();
      }
      if (!all) continue;
      auto assignment = detail::distinct_incidence(incident, n);
      if (!assignment.empty()) out.push_back({q, std::move(assignment)});
    }
  }
  return out;
}

/// Exact ghosts of a 1-D trajectory configuration at the given times.
inline std::vector<Ghost> find_ghosts(const ParticleConfig<1>& S, const std::vector<double>& times, double tol = 1e-9) {
  if (times.size() < 2) throw std::invalid_argument("find_ghosts: at least two times required");
  return find_ghosts(time_probes(S, times), tol);
}

/// Exact ghost phase points (x, v) of a D-dimensional trajectory configuration:
/// x + t v = x_{i_t} + t v_{i_t} for all t with pairwise distinct i_t.
template <int D>
std::vector<std::pair<Particle<D>, std::vector<int>>> find_ghosts(const ParticleConfig<D>& S,
                                                                  const std::vector<double>& times, double tol = 1e-9)
  requires(D > 1)
{
  if (times.size() < 2) throw std::invalid_argument("find_ghosts: at least two times required");
  const double t1 = times[0], t2 = times[1];
  if (t1 == t2) throw std::invalid_argument("find_ghosts: first two times coincide");
  const auto& ps = S.particles;
  const int n = static_cast<int>(ps.size());
  std::vector<std::pair<Particle<D>, std::vector<int>>> out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Point<D> a = ps[i].x + t1 * ps[i].v, b = ps[j].x + t2 * ps[j].v;
      const Point<D> v = (a - b) / (t1 - t2);
      const Point<D> x = a - t1 * v;
      bool skip = false;
      for (const auto& p : ps) skip = skip || ((p.x - x).norm() <= tol && (p.v - v).norm() <= tol);
      for (const auto& g : out) skip = skip || ((g.first.x - x).norm() <= tol && (g.first.v - v).norm() <= tol);
      if (skip) continue;
      std::vector<std::vector<int>> incident(times.size());
      bool all = true;
      for (std::size_t k = 0; k < times.size() && all; ++k) {
        const Point<D> pos = x + times[k] * v;
        for (int m = 0; m < n; ++m)
          if ((pos - (ps[m].x + times[k] * ps[m].v)).norm() <= tol) incident[k].push_back(m);
        all = !incident[k].empty();
      }
      if (!all) continue;
      auto assignment = detail::distinct_incidence(incident, n);
      if (!assignment.empty()) out.push_back({Particle<D>{x, v, 0.0}, std::move(assignment)});
    }
  }
  return out;
}

struct GhostDelta {
  double value = std::numeric_limits<double>::infinity();
  std::vector<int> assignment;  // minimising assignment, empty if none exists
  long long nodes = 0;          // branch-and-bound nodes visited
  bool large_search = false;    // more than 10^6 nodes were visited
};

/// Chebyshev value min_q max_k |a_k . q - c_k| of a fixed assignment.
///
/// With probes in R^2 satisfying the Haar condition (no two parallel), the
/// optimum is the largest value over probe triples of |lambda . c| / |lambda|_1,
/// where lambda spans the null space of the triple's probe matrix (de la Vallee
/// Poussin). Fewer than three probes can be met exactly.
inline double chebyshev_value(const std::vector<Vec2>& a, const std::vector<double>& c) {
  double best = 0.0;
  const std::size_t K = a.size();
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j)
      for (std::size_t k = j + 1; k < K; ++k) {
        const auto det = [](const Vec2& u, const Vec2& w) { return u.x() * w.y() - u.y() * w.x(); };
        const double li = det(a[j], a[k]), lj = det(a[k], a[i]), lk = det(a[i], a[j]);
        const double l1 = std::abs(li) + std::abs(lj) + std::abs(lk);
        if (l1 > 0.0) best = std::max(best, std::abs(li * c[i] + lj * c[j] + lk * c[k]) / l1);
      }
  return best;
}

/// Smallest Delta for which a Delta-ghost exists: minimum over assignments of
/// points to probes, not all equal, of the Chebyshev value. Branch and bound
/// over probes in order; the bound is the largest triple value among the
/// probes assigned so far.
inline GhostDelta min_ghost_delta(const ProbeSystem& ps) {
  const std::size_t K = ps.probes.size();
  const int n = static_cast<int>(ps.points.size());
  GhostDelta res;
  if (K < 1 || n < 2) return res;
  const auto& a = ps.probes;
  std::vector<std::vector<double>> proj(K, std::vector<double>(n));
  for (std::size_t k = 0; k < K; ++k)
    for (int i = 0; i < n; ++i) proj[k][i] = a[k].dot(ps.points[i]);
  auto det = [](const Vec2& u, const Vec2& w) { return u.x() * w.y() - u.y() * w.x(); };

  std::vector<int> assign(K, 0);
  std::function<void(std::size_t, double, bool)> visit = [&](std::size_t k, double bound, bool all_equal) {
    ++res.nodes;
    if (k == K) {
      if (!all_equal && bound < res.value) {
        res.value = bound;
        res.assignment = assign;
      }
      return;
    }
    for (int i = 0; i < n; ++i) {
      assign[k] = i;
      double b = bound;
      for (std::size_t p = 0; p < k && b < res.value; ++p) {
        for (std::size_t q = p + 1; q < k; ++q) {
          const double lp = det(a[q], a[k]), lq = det(a[k], a[p]), lk = det(a[p], a[q]);
          const double l1 = std::abs(lp) + std::abs(lq) + std::abs(lk);
          if (l1 > 0.0) {
            b = std::max(b, std::abs(lp * proj[p][assign[p]] + lq * proj[q][assign[q]] + lk * proj[k][i]) / l1);
          }
        }
      }
      if (b >= res.value) continue;
      visit(k + 1, b, all_equal && (k == 0 || i == assign[k - 1]));
    }
  };
  visit(0, 0.0, true);
  res.large_search = res.nodes > 1000000;
  return res;
}

inline GhostDelta min_ghost_delta(const ParticleConfig<1>& S, const std::vector<double>& times) {
  return min_ghost_delta(time_probes(S, times));
}

/// Smallest distance between two distinct points over all probes.
inline double min_coincidence_delta(const ProbeSystem& ps) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : ps.probes)
    for (std::size_t i = 0; i < ps.points.size(); ++i)
      for (std::size_t j = i + 1; j < ps.points.size(); ++j) best = std::min(best, std::abs(a.dot(ps.points[i] - ps.points[j])));
  return best;
}

template <int D>
double min_coincidence_delta(const ParticleConfig<D>& S, const std::vector<double>& times) {
  return dynamic_separation(S, times);
}

struct GhostReport {
  std::string label;  // e.g. "theta=0.5236" or "t=0"
  std::vector<Ghost> ghosts;
  std::vector<Coincidence> coincidences;
  double min_coincidence_delta = std::numeric_limits<double>::infinity();
  double min_ghost_delta = std::numeric_limits<double>::infinity();
};

inline GhostReport analyze(const ProbeSystem& ps, std::string label, double coincidence_delta = 0.0, double tol = 1e-9) {
  GhostReport r;
  r.label = std::move(label);
  if (ps.probes.size() >= 2) r.ghosts = find_ghosts(ps, tol);
  r.coincidences = find_coincidences(ps, std::max(coincidence_delta, tol));
  r.min_coincidence_delta = min_coincidence_delta(ps);
  r.min_ghost_delta = min_ghost_delta(ps).value;
  return r;
}

enum class DegeneracyMode {
  Time,       // per direction: the projected trajectories at the given times
  Direction,  // per time: the snapshot projected along the given directions
};

/// Degeneracy of a 2-D configuration in the projected problems. Time mode
/// gives one report per direction, direction mode one report per time.
inline std::vector<GhostReport> projected_degeneracy(const ParticleConfig<2>& lambda, const std::vector<Direction2>& dirs,
                                                     const std::vector<double>& times, DegeneracyMode mode,
                                                     double coincidence_delta = 0.0) {
  std::vector<GhostReport> out;
  char buf[64];
  if (mode == DegeneracyMode::Time) {
    for (const auto& theta : dirs) {
      std::snprintf(buf, sizeof buf, "theta=%.6f", std::atan2(theta[1], theta[0]));
      out.push_back(analyze(time_probes(project_config(lambda, theta), times), buf, coincidence_delta));
    }
  } else {
    for (double t : times) {
      DiscreteMeasure<2> snap;
      for (const auto& p : positions_at(lambda, t)) snap.add(p, 1.0);
      std::snprintf(buf, sizeof buf, "t=%.6f", t);
      out.push_back(analyze(direction_probes(snap, dirs), buf, coincidence_delta));
    }
  }
  return out;
}

inline nlohmann::json to_json(const GhostReport& r) {
  nlohmann::json j;
  j["label"] = r.label;
  j["ghosts"] = nlohmann::json::array();
  for (const auto& g : r.ghosts) j["ghosts"].push_back({{"point", {g.point.x(), g.point.y()}}, {"assignment", g.assignment}});
  j["coincidences"] = nlohmann::json::array();
  for (const auto& c : r.coincidences)
    j["coincidences"].push_back({{"label", c.label}, {"i", c.i}, {"j", c.j}, {"distance", c.distance}});
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  j["min_coincidence_delta"] = finite_or_null(r.min_coincidence_delta);
  j["min_ghost_delta"] = finite_or_null(r.min_ghost_delta);
  return j;
}

}  // namespace dynsr
