#pragma once

// Random particle configurations on the phase domain, a separation-balanced
// dataset sampler, and synthetic Fourier measurements with Gaussian noise.

#include "dynsr/discretize.hpp"
#include "dynsr/geometry.hpp"
#include "dynsr/measures.hpp"
#include "dynsr/types.hpp"

#include <Eigen/Core>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynsr {

using Rng = std::mt19937_64;

struct DatasetSpec {
  int count = 100;
  int n_min = 4;
  int n_max = 20;
  double mass_lo = 0.9;
  double mass_hi = 1.1;
  std::vector<double> times = centred_times(1);
  double sep_max = 0.1;  // target: separation uniform on [0, sep_max]
  int sep_bins = 20;
  bool balance_separation = true;
  std::uint64_t seed = 1;

  void validate() const {
    if (count < 1) throw std::invalid_argument("DatasetSpec: count must be >= 1");
    if (n_min < 1 || n_max < n_min) throw std::invalid_argument("DatasetSpec: bad particle count range");
    if (!(mass_lo > 0.0) || mass_hi < mass_lo) throw std::invalid_argument("DatasetSpec: bad mass range");
    if (times.empty()) throw std::invalid_argument("DatasetSpec: no times");
    if (balance_separation && (!(sep_max > 0.0) || sep_bins < 1 || n_min < 2)) {
      throw std::invalid_argument("DatasetSpec: separation balancing needs sep_max > 0, sep_bins >= 1, n_min >= 2");
    }
  }

  double half_width() const { return TimeGrid::make(times).half_width; }
};

/// One configuration: N uniform in [n_min, n_max], (x, v) uniform on the phase
/// domain by rejection from [0,1]^2 x [-1/(2T), 1/(2T)]^2, masses uniform.
inline ParticleConfig<2> sample_config(const DatasetSpec& spec, Rng& rng) {
  const double T = spec.half_width();
  const double vmax = 1.0 / (2.0 * T);
  std::uniform_int_distribution<int> count(spec.n_min, spec.n_max);
  std::uniform_real_distribution<double> pos(0.0, 1.0), vel(-vmax, vmax), mass(spec.mass_lo, spec.mass_hi);
  ParticleConfig<2> cfg;
  const int n = count(rng);
  while (static_cast<int>(cfg.size()) < n) {
    const Vec2 x(pos(rng), pos(rng));
    const Vec2 v(vel(rng), vel(rng));
    if (!phase_domain_contains<2>(x, v, T)) continue;
    bool duplicate = false;
    for (const auto& p : cfg.particles) duplicate = duplicate || (p.x == x && p.v == v);
    if (duplicate) continue;
    cfg.particles.push_back({x, v, mass(rng)});
  }
  return cfg;
}

struct SamplingStats {
  long long attempts = 0;
  std::vector<int> histogram;
};

/// Dataset whose dynamic separations are spread evenly over [0, sep_max].
///
/// A histogram of accepted separations is kept and a candidate is accepted
/// only if its bin is among the emptiest, so bin counts never differ by more
/// than one. Candidates beyond sep_max are rejected.
inline std::vector<ParticleConfig<2>> rejection_sample_dataset(const DatasetSpec& spec, Rng& rng,
                                                               SamplingStats* stats = nullptr) {
  spec.validate();
  std::vector<ParticleConfig<2>> out;
  out.reserve(spec.count);
  if (!spec.balance_separation) {
    for (int i = 0; i < spec.count; ++i) out.push_back(sample_config(spec, rng));
    if (stats) stats->attempts = spec.count;
    return out;
  }
  std::vector<int> hist(spec.sep_bins, 0);
  const long long budget = 10000LL * spec.count;
  long long attempts = 0;
  while (static_cast<int>(out.size()) < spec.count) {
    if (++attempts > budget) {
      throw std::runtime_error("rejection_sample_dataset: iteration budget exceeded after " +
                               std::to_string(out.size()) + " of " + std::to_string(spec.count) + " configurations");
    }
    ParticleConfig<2> cfg = sample_config(spec, rng);
    const double sep = dynamic_separation(cfg, spec.times);
    if (!(sep <= spec.sep_max)) continue;
    const int b = std::min(spec.sep_bins - 1, static_cast<int>(sep / spec.sep_max * spec.sep_bins));
    if (hist[b] > *std::min_element(hist.begin(), hist.end())) continue;
    ++hist[b];
    out.push_back(std::move(cfg));
  }
  if (stats) {
    stats->attempts = attempts;
    stats->histogram = hist;
  }
  return out;
}

/// Noise-free measurements f_t of the moved configuration, one vector per time.
inline std::vector<Eigen::VectorXd> measure(const ParticleConfig<2>& cfg, const std::vector<double>& times, int cutoff) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(fourier_observation(move(cfg, t), cutoff));
  return out;
}

/// I.i.d. Gaussian noise with std sqrt(2 delta / D), D the total stacked length,
/// so that E[1/2 sum_t |f_t^delta - f_t|^2] = delta.
inline std::vector<Eigen::VectorXd> add_noise(std::vector<Eigen::VectorXd> f, double delta, Rng& rng) {
  if (!(delta >= 0.0)) throw std::invalid_argument("add_noise: delta must be nonnegative");
  if (delta == 0.0) return f;
  Eigen::Index D = 0;
  for (const auto& v : f) D += v.size();
  std::normal_distribution<double> g(0.0, std::sqrt(2.0 * delta / double(D)));
  for (auto& v : f)
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += g(rng);
  return f;
}

/// Keep n entries spread uniformly by index.
template <typename T>
std::vector<T> thin(const std::vector<T>& items, std::size_t n) {
  if (n >= items.size()) return items;
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(items[i * items.size() / n]);
  return out;
}

}  // namespace dynsr
