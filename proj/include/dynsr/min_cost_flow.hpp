#pragma once

// Successive shortest paths with Dijkstra and node potentials, real-valued
// capacities and costs. Flow is only pushed along paths of negative cost, which
// yields a minimum-cost flow of free amount.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace dynsr {

class MinCostFlow {
 public:
  struct Arc {
    int to;
    int rev;
    double cap;
    double cost;
    double flow = 0.0;
  };

  explicit MinCostFlow(int nodes) : g_(nodes) {}

  /// Returns the arc handle (node, index) usable with flow().
  std::pair<int, int> add_arc(int from, int to, double cap, double cost) {
    if (!(cap >= 0.0)) throw std::invalid_argument("MinCostFlow: negative capacity");
    g_[from].push_back({to, static_cast<int>(g_[to].size()), cap, cost});
    g_[to].push_back({from, static_cast<int>(g_[from].size()) - 1, 0.0, -cost});
    return {from, static_cast<int>(g_[from].size()) - 1};
  }

  double flow(std::pair<int, int> handle) const { return g_[handle.first][handle.second].flow; }

  /// Pushes flow from s to t while the cheapest augmenting path has negative
  /// cost. `initial_potential` must be a feasible potential for the arcs with
  /// positive capacity (reduced costs >= 0). Returns the total cost.
  double run_negative_paths(int s, int t, std::vector<double> potential, double cap_eps = 1e-15) {
    const int n = static_cast<int>(g_.size());
    constexpr double inf = std::numeric_limits<double>::infinity();
    double total = 0.0;
    std::vector<double> dist(n);
    std::vector<int> prev_node(n), prev_arc(n);
    for (;;) {
      std::fill(dist.begin(), dist.end(), inf);
      dist[s] = 0.0;
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      pq.emplace(0.0, s);
      while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (int k = 0; k < static_cast<int>(g_[u].size()); ++k) {
          const Arc& a = g_[u][k];
          if (a.cap - a.flow <= cap_eps) continue;
          const double rc = std::max(0.0, a.cost + potential[u] - potential[a.to]);
          if (dist[u] + rc < dist[a.to]) {
            dist[a.to] = dist[u] + rc;
            prev_node[a.to] = u;
            prev_arc[a.to] = k;
            pq.emplace(dist[a.to], a.to);
          }
        }
      }
      if (dist[t] == inf) break;
      for (int v = 0; v < n; ++v)
        if (dist[v] < inf) potential[v] += dist[v];
      // Actual path cost.
      double path_cost = 0.0, push = inf;
      for (int v = t; v != s; v = prev_node[v]) {
        const Arc& a = g_[prev_node[v]][prev_arc[v]];
        path_cost += a.cost;
        push = std::min(push, a.cap - a.flow);
      }
      if (path_cost >= 0.0) break;
      for (int v = t; v != s; v = prev_node[v]) {
        Arc& a = g_[prev_node[v]][prev_arc[v]];
        a.flow += push;
        g_[v][a.rev].flow -= push;
      }
      total += push * path_cost;
    }
    return total;
  }

 private:
  std::vector<std::vector<Arc>> g_;
};

}  // namespace dynsr
