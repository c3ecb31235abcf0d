#pragma once

// End-to-end reconstruction: direction and time placement, assembly of all
// grids and matrices for one discretization, the solve, and extraction of the
// t = 0 snapshot.

#include "dynsr/discretize.hpp"
#include "dynsr/geometry.hpp"
#include "dynsr/metrics.hpp"
#include "dynsr/solver.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

namespace dynsr {

/// n equidistributed directions exp(i pi (j/n - 1/2)), j = 0..n-1, on the
/// right half of the unit circle.
inline std::vector<Direction2> half_circle_directions(int n) {
  if (n < 0) throw std::invalid_argument("half_circle_directions: negative count");
  std::vector<Direction2> out;
  for (int j = 0; j < n; ++j) out.push_back(Direction2::from_angle(std::numbers::pi * (double(j) / n - 0.5)));
  return out;
}

/// Additional reconstruction times. A time t corresponds to the direction
/// (1,t)/sqrt(1+t^2), i.e. the angle atan(t) in (-pi/2, pi/2). Starting from
/// the angles of the measurement times and the two excluded endpoints
/// +-pi/2, each new time bisects the widest angular gap. Equal gaps are
/// ordered by distance of their midpoint from 0 (outer first), then by sign
/// (negative first).
inline std::vector<double> extra_times(const std::vector<double>& measurement, int count) {
  if (count < 0) throw std::invalid_argument("extra_times: negative count");
  constexpr double half_pi = std::numbers::pi / 2.0;
  std::vector<double> angles = {-half_pi, half_pi};
  for (double t : measurement) angles.push_back(std::atan(t));
  std::sort(angles.begin(), angles.end());
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    std::size_t best = 0;
    double best_gap = -1.0, best_mid = 0.0;
    for (std::size_t i = 0; i + 1 < angles.size(); ++i) {
      const double gap = angles[i + 1] - angles[i];
      const double mid = 0.5 * (angles[i] + angles[i + 1]);
      bool better = gap > best_gap + 1e-12;
      if (!better && std::abs(gap - best_gap) <= 1e-12) {
        if (std::abs(mid) > std::abs(best_mid) + 1e-12) better = true;
        else if (std::abs(std::abs(mid) - std::abs(best_mid)) <= 1e-12 && mid < best_mid) better = true;
      }
      if (better) {
        best = i;
        best_gap = gap;
        best_mid = mid;
      }
    }
    angles.insert(angles.begin() + best + 1, best_mid);
    out.push_back(std::tan(best_mid));
  }
  return out;
}

enum class Method { Static, Reduced, Adcg };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Static: return "static";
    case Method::Reduced: return "reduced";
    case Method::Adcg: return "adcg";
  }
  return "?";
}

inline Method method_from_string(const std::string& s) {
  if (s == "static") return Method::Static;
  if (s == "reduced" || s == "dimred") return Method::Reduced;
  if (s == "adcg") return Method::Adcg;
  throw std::invalid_argument("unknown method '" + s + "'");
}

struct DiscretizationSpec {
  Method method = Method::Reduced;
  int M = 50;
  int cutoff = 2;
  std::vector<double> times = centred_times(1);
  int directions = 5;
  int extra = 3;

  nlohmann::json to_json() const {
    return {{"method", to_string(method)}, {"M", M}, {"cutoff", cutoff}, {"times", times},
            {"directions", method == Method::Static ? 0 : directions}, {"extra", method == Method::Static ? 0 : extra}};
  }
  std::string key() const { return to_json().dump(); }
};

/// All grids and matrices for one discretization. Snapshot variables are
/// ordered as TimeGrid::all_times(): measurement times first, then extra
/// times. The static method keeps only the t = 0 snapshot.
struct Discretization {
  DiscretizationSpec spec;
  TimeGrid times;
  std::vector<double> snapshot_times;
  std::vector<Direction2> directions;
  std::vector<GridSpec> snapshot_grids;
  std::vector<GridSpec> gamma_grids;
  std::vector<std::size_t> observed;  // snapshot index of each observation block
  std::size_t zero_index = 0;         // snapshot index of t = 0
  std::shared_ptr<const ReducedOperator> op;
};

inline std::shared_ptr<const Discretization> build_discretization(const DiscretizationSpec& spec) {
  auto d = std::make_shared<Discretization>();
  d->spec = spec;
  d->times = TimeGrid::make(spec.times, spec.method == Method::Reduced ? extra_times(spec.times, spec.extra)
                                                                      : std::vector<double>{});
  const double T = d->times.half_width;
  auto op = std::make_shared<ReducedOperator>();

  if (spec.method == Method::Reduced) {
    d->snapshot_times = d->times.all_times();
    d->directions = half_circle_directions(spec.directions);
  } else {
    d->snapshot_times = {0.0};
  }
  bool has_zero = false;
  for (std::size_t i = 0; i < d->snapshot_times.size(); ++i) {
    if (d->snapshot_times[i] == 0.0) {
      d->zero_index = i;
      has_zero = true;
    }
  }
  if (!has_zero) throw std::invalid_argument("build_discretization: t = 0 must be a measurement time");

  for (double t : d->snapshot_times) {
    d->snapshot_grids.push_back(make_grid(snapshot_domain<2>(t, T), spec.M));
    op->snapshot_sizes.push_back(d->snapshot_grids.back().cell_count());
  }
  for (const auto& theta : d->directions) {
    d->gamma_grids.push_back(make_grid(projected_phase_domain(theta, T), spec.M));
    op->gamma_sizes.push_back(d->gamma_grids.back().cell_count());
  }
  for (std::size_t k = 0; k < d->directions.size(); ++k) {
    for (std::size_t i = 0; i < d->snapshot_times.size(); ++i) {
      const double t = d->snapshot_times[i];
      const GridSpec bins = make_grid(bin_interval(d->directions[k], t, T), spec.M);
      ConsistencyBlock c;
      c.direction = k;
      c.time = i;
      c.move = assemble_move_matrix(d->gamma_grids[k], t, bins).weights;
      c.radon = assemble_radon_matrix(d->snapshot_grids[i], d->directions[k], bins).weights;
      op->consistency.push_back(std::move(c));
    }
  }
  for (std::size_t i = 0; i < d->snapshot_times.size(); ++i) {
    const double t = d->snapshot_times[i];
    const bool measured = std::find(spec.times.begin(), spec.times.end(), t) != spec.times.end();
    if (!measured) continue;
    op->observations.push_back({i, assemble_fourier_matrix(d->snapshot_grids[i], spec.cutoff).matrix});
    d->observed.push_back(i);
  }
  op->validate();
  d->op = std::move(op);
  return d;
}

/// Build-once cache shared by concurrent workers.
class DiscretizationCache {
 public:
  std::shared_ptr<const Discretization> get(const DiscretizationSpec& spec) {
    std::lock_guard lock(mutex_);
    auto& slot = cache_[spec.key()];
    if (!slot) slot = build_discretization(spec);
    return slot;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Discretization>> cache_;
};

/// Data vectors (one per measurement time, in spec.times order) mapped onto
/// the observation blocks of the discretization.
inline std::vector<Eigen::VectorXd> observation_data(const Discretization& d, const std::vector<Eigen::VectorXd>& f) {
  if (f.size() != d.spec.times.size()) throw std::invalid_argument("observation_data: one data vector per measurement time expected");
  std::vector<Eigen::VectorXd> out;
  for (std::size_t idx : d.observed) {
    const double t = d.snapshot_times[idx];
    const auto pos = std::find(d.spec.times.begin(), d.spec.times.end(), t) - d.spec.times.begin();
    out.push_back(f[pos]);
  }
  return out;
}

struct GridReconstruction {
  Eigen::VectorXd u0;               // t = 0 snapshot weights
  GridSpec grid;                    // its grid
  std::vector<Eigen::VectorXd> u;   // all snapshot weights
  std::vector<Eigen::VectorXd> gamma;
  SolverReport report;
};

/// Grid-based reconstruction (static or dimension-reduced).
inline GridReconstruction reconstruct_grid(const Discretization& d, const std::vector<Eigen::VectorXd>& f, double alpha,
                                           double tau, const SolverOptions& opts = {}) {
  ReducedProblem prob{d.op, observation_data(d, f), alpha, d.spec.method == Method::Static ? 0.0 : tau};
  ReducedSolution s = solve_reduced(prob, opts);
  GridReconstruction out{s.u[d.zero_index], d.snapshot_grids[d.zero_index], std::move(s.u), std::move(s.gamma),
                         std::move(s.report)};
  return out;
}

}  // namespace dynsr
