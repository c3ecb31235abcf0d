#pragma once

// Evaluation metrics: unbalanced Wasserstein divergence, cluster extraction
// from grid weights, and the pairing test for correct reconstruction.

#include "dynsr/geometry.hpp"
#include "dynsr/min_cost_flow.hpp"
#include "dynsr/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace dynsr {

struct TransportEntry {
  std::size_t from;
  std::size_t to;
  double mass;
};

struct UwResult {
  double value = 0.0;
  double transported = 0.0;
  double removed = 0.0;
  double created = 0.0;
  std::vector<TransportEntry> plan;
};

/// Unbalanced Wasserstein-p divergence UW_R(nu1, nu2).
///
/// The intermediate measure of the definition is eliminated: mass of nu1 is
/// either transported to an atom of nu2 or removed, and any mass of nu2 not
/// reached by transport is created at its atom. Both removal and creation cost
/// R^p / 2 per unit, so the objective is
///   sum pi_ij |x_i - y_j|^p + R^p/2 (|nu1| + |nu2| - 2 sum pi_ij)
///   = R^p/2 (|nu1| + |nu2|) + sum pi_ij (|x_i - y_j|^p - R^p)
/// subject to row sums <= m_i and column sums <= n_j. Only pairs closer than R
/// can lower the cost, and the remaining problem is a min-cost flow of free
/// amount on the bipartite graph source -> nu1 -> nu2 -> sink.
template <int K>
UwResult unbalanced_wasserstein(const DiscreteMeasure<K>& nu1, const DiscreteMeasure<K>& nu2, double R, double p = 2.0) {
  if (!(R > 0.0)) throw std::invalid_argument("unbalanced_wasserstein: R must be positive");
  nu1.validate();
  nu2.validate();
  const int n1 = static_cast<int>(nu1.size()), n2 = static_cast<int>(nu2.size());
  const double Rp = std::pow(R, p);
  const int S = 0, T = n1 + n2 + 1;
  MinCostFlow mcf(n1 + n2 + 2);
  std::vector<double> potential(n1 + n2 + 2, 0.0);

  struct Edge {
    int i, j;
    double cost;
    std::pair<int, int> handle;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < n1; ++i) {
    if (nu1.weights[i] > 0.0) mcf.add_arc(S, 1 + i, nu1.weights[i], 0.0);
  }
  for (int i = 0; i < n1; ++i) {
    if (!(nu1.weights[i] > 0.0)) continue;
    for (int j = 0; j < n2; ++j) {
      if (!(nu2.weights[j] > 0.0)) continue;
      const double c = std::pow((nu1.points[i] - nu2.points[j]).norm(), p);
      if (c >= Rp) continue;
      const auto h = mcf.add_arc(1 + i, 1 + n1 + j, std::min(nu1.weights[i], nu2.weights[j]), c - Rp);
      edges.push_back({i, j, c, h});
      potential[1 + n1 + j] = std::min(potential[1 + n1 + j], c - Rp);
    }
  }
  for (int j = 0; j < n2; ++j) {
    if (nu2.weights[j] > 0.0) mcf.add_arc(1 + n1 + j, T, nu2.weights[j], 0.0);
    potential[T] = std::min(potential[T], potential[1 + n1 + j]);
  }
  mcf.run_negative_paths(S, T, potential);

  UwResult res;
  double transport_cost = 0.0;
  for (const auto& e : edges) {
    const double m = mcf.flow(e.handle);
    if (m > 0.0) {
      res.plan.push_back({static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j), m});
      res.transported += m;
      transport_cost += m * e.cost;
    }
  }
  res.removed = std::max(0.0, nu1.total_mass() - res.transported);
  res.created = std::max(0.0, nu2.total_mass() - res.transported);
  res.value = transport_cost + 0.5 * Rp * (res.removed + res.created);
  return res;
}

struct UwMassTerms {
  double A = 0.0;  // mass of nu2 outside the R-balls around the atoms of nu1
  double B = 0.0;  // sum of |m_i - nu2(B_R(x_i))|
  double C = 0.0;  // sum of int_{B_R(x_i)} |x - x_i|^p d nu2
};

/// Mass statistics bounding UW_R(nu1, nu2) <= R^p (A + B) / 2 + C when the
/// atoms of nu1 are at least 2R apart. Balls are open.
template <int K>
UwMassTerms uw_mass_terms(const DiscreteMeasure<K>& nu1, const DiscreteMeasure<K>& nu2, double R, double p = 2.0) {
  UwMassTerms out;
  std::vector<double> ball_mass(nu1.size(), 0.0);
  for (std::size_t j = 0; j < nu2.size(); ++j) {
    bool inside = false;
    for (std::size_t i = 0; i < nu1.size(); ++i) {
      const double d = (nu2.points[j] - nu1.points[i]).norm();
      if (d < R) {
        inside = true;
        ball_mass[i] += nu2.weights[j];
        out.C += std::pow(d, p) * nu2.weights[j];
      }
    }
    if (!inside) out.A += nu2.weights[j];
  }
  for (std::size_t i = 0; i < nu1.size(); ++i) out.B += std::abs(nu1.weights[i] - ball_mass[i]);
  return out;
}

/// Grid weights as Diracs at the cell centres (zero weights dropped).
inline DiscreteMeasure<2> weights_to_measure(const Eigen::VectorXd& weights, const GridSpec& grid) {
  if (weights.size() != grid.cell_count()) throw std::invalid_argument("weights_to_measure: size mismatch");
  DiscreteMeasure<2> out;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (weights(j) > 0.0) out.add(grid.cell_center(j), weights(j));
  }
  return out;
}

/// Zero weights below w_min, group the remaining cells into 8-connected
/// components and replace each by one atom at its centre of mass.
inline DiscreteMeasure<2> cluster_extract(const Eigen::VectorXd& weights, const GridSpec& grid, double w_min = 0.1) {
  if (grid.dim() != 2) throw std::invalid_argument("cluster_extract: 2-D grid required");
  if (weights.size() != grid.cell_count()) throw std::invalid_argument("cluster_extract: size mismatch");
  const int M = grid.resolution();
  std::vector<char> active(weights.size()), seen(weights.size(), 0);
  for (Eigen::Index j = 0; j < weights.size(); ++j) active[j] = weights(j) >= w_min;

  DiscreteMeasure<2> out;
  std::vector<Eigen::Index> stack;
  for (Eigen::Index start = 0; start < weights.size(); ++start) {
    if (!active[start] || seen[start]) continue;
    double mass = 0.0;
    Vec2 moment = Vec2::Zero();
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const Eigen::Index j = stack.back();
      stack.pop_back();
      mass += weights(j);
      moment += weights(j) * grid.cell_center(j);
      const auto [row, col] = grid.row_col(j);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = row + dr, c = col + dc;
          if (r < 0 || c < 0 || r >= M || c >= M) continue;
          const Eigen::Index k = static_cast<Eigen::Index>(r) * M + c;
          if (active[k] && !seen[k]) {
            seen[k] = 1;
            stack.push_back(k);
          }
        }
      }
    }
    out.add(moment / mass, mass);
  }
  return out;
}

/// Maximum bipartite matching (Hopcroft-Karp). adj[l] lists right vertices.
inline int hopcroft_karp(const std::vector<std::vector<int>>& adj, int n_right) {
  const int n_left = static_cast<int>(adj.size());
  constexpr int inf = std::numeric_limits<int>::max();
  std::vector<int> match_l(n_left, -1), match_r(n_right, -1), dist(n_left);
  auto bfs = [&] {
    std::queue<int> q;
    bool found = false;
    for (int l = 0; l < n_left; ++l) {
      dist[l] = match_l[l] < 0 ? 0 : inf;
      if (match_l[l] < 0) q.push(l);
    }
    while (!q.empty()) {
      const int l = q.front();
      q.pop();
      for (int r : adj[l]) {
        const int l2 = match_r[r];
        if (l2 < 0) {
          found = true;
        } else if (dist[l2] == inf) {
          dist[l2] = dist[l] + 1;
          q.push(l2);
        }
      }
    }
    return found;
  };
  std::function<bool(int)> dfs = [&](int l) {
    for (int r : adj[l]) {
      const int l2 = match_r[r];
      if (l2 < 0 || (dist[l2] == dist[l] + 1 && dfs(l2))) {
        match_l[l] = r;
        match_r[r] = l;
        return true;
      }
    }
    dist[l] = inf;
    return false;
  };
  int matching = 0;
  while (bfs()) {
    for (int l = 0; l < n_left; ++l)
      if (match_l[l] < 0 && dfs(l)) ++matching;
  }
  return matching;
}

/// True iff the atoms of both measures can be paired one-to-one with every
/// pair closer than `radius`.
template <int K>
bool match_configs(const DiscreteMeasure<K>& recon, const DiscreteMeasure<K>& truth, double radius = 0.01) {
  if (recon.size() != truth.size()) return false;
  std::vector<std::vector<int>> adj(recon.size());
  for (std::size_t i = 0; i < recon.size(); ++i)
    for (std::size_t j = 0; j < truth.size(); ++j)
      if ((recon.points[i] - truth.points[j]).norm() < radius) adj[i].push_back(static_cast<int>(j));
  return hopcroft_karp(adj, static_cast<int>(truth.size())) == static_cast<int>(truth.size());
}

}  // namespace dynsr
