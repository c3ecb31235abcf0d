#pragma once

// Experiment harness: configuration, per-instance reconstruction and
// evaluation, a worker pool with a single ordered writer, and the summaries of
// the exact-recovery and noise-rate experiments.

#include "dynsr/adcg.hpp"
#include "dynsr/datagen.hpp"
#include "dynsr/io.hpp"
#include "dynsr/metrics.hpp"
#include "dynsr/pipeline.hpp"
#include "dynsr/svg.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace dynsr {

struct ExperimentConfig {
  std::vector<std::string> methods = {"static", "dimred-mid"};
  int M = 50;
  int directions = 5;  // for the plain "reduced" method
  int extra = 3;
  int K = 1;           // measurement times k/K, k = -K..K
  int cutoff = 2;
  double alpha = 0.005;    // used when delta = 0
  double C_alpha = 0.2;    // alpha = C_alpha sqrt(delta) when delta > 0
  double tau = 0.001;
  std::vector<double> deltas = {0.0};
  double w_min = 0.1;
  double radius = 0.01;
  double R = 0.05;
  // dataset generation, used when no dataset file is given
  std::string dataset;
  int count = 100;
  int n_min = 4;
  int n_max = 20;
  double sep_max = 0.1;
  bool balance = true;
  int per_level = 0;  // configurations per noise level, 0 = all
  double slope_lo = 1.0;
  double slope_hi = 100.0;
  std::uint64_t seed = 1;
  SolverOptions solver;
  AdcgParams adcg;
  // run control, not part of the identity hash
  std::string output_dir = "results";
  int threads = 1;

  std::vector<double> times() const { return centred_times(K); }

  double alpha_for(double delta) const { return delta > 0.0 ? C_alpha * std::sqrt(delta) : alpha; }

  DatasetSpec dataset_spec() const {
    DatasetSpec s;
    s.count = count;
    s.n_min = n_min;
    s.n_max = n_max;
    s.times = times();
    s.sep_max = sep_max;
    s.balance_separation = balance && n_min >= 2;
    s.seed = seed;
    return s;
  }

  void validate() const {
    if (methods.empty()) throw std::invalid_argument("config: no methods");
    if (M < 2) throw std::invalid_argument("config: M must be >= 2");
    if (K < 1) throw std::invalid_argument("config: K must be >= 1");
    if (cutoff < 0) throw std::invalid_argument("config: cutoff must be >= 0");
    if (!(alpha > 0.0) || !(C_alpha > 0.0)) throw std::invalid_argument("config: alpha and C_alpha must be positive");
    if (!(tau >= 0.0)) throw std::invalid_argument("config: tau must be >= 0");
    if (deltas.empty()) throw std::invalid_argument("config: empty delta list");
    for (double d : deltas)
      if (!(d >= 0.0)) throw std::invalid_argument("config: deltas must be >= 0");
    if (!(R > 0.0) || !(radius > 0.0)) throw std::invalid_argument("config: R and radius must be positive");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (per_level < 0) throw std::invalid_argument("config: per_level must be >= 0");
  }

  /// Everything that determines result rows (run control excluded).
  nlohmann::json identity() const {
    return {{"methods", methods},
            {"M", M},
            {"directions", directions},
            {"extra", extra},
            {"K", K},
            {"cutoff", cutoff},
            {"alpha", alpha},
            {"C_alpha", C_alpha},
            {"tau", tau},
            {"deltas", deltas},
            {"w_min", w_min},
            {"radius", radius},
            {"R", R},
            {"dataset", dataset},
            {"count", count},
            {"n_min", n_min},
            {"n_max", n_max},
            {"sep_max", sep_max},
            {"balance", balance},
            {"per_level", per_level},
            {"seed", seed},
            {"max_iters", solver.max_iters},
            {"feas_tol", solver.feas_tol},
            {"obj_tol", solver.obj_tol},
            {"adcg_max_outer", adcg.max_outer},
            {"adcg_min_gap", adcg.min_gap},
            {"adcg_min_progress", adcg.min_progress}};
  }

  nlohmann::json to_json() const {
    auto j = identity();
    j["slope_lo"] = slope_lo;
    j["slope_hi"] = slope_hi;
    j["output_dir"] = output_dir;
    j["threads"] = threads;
    return j;
  }

  /// Sets one field from its textual value. Lists are comma separated.
  void set(const std::string& key, const std::string& value) {
    auto list = [&] {
      std::vector<std::string> out;
      std::string item;
      std::istringstream is(value);
      while (std::getline(is, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
      }
      return out;
    };
    auto num = [&] {
      std::size_t pos = 0;
      const double v = std::stod(value, &pos);
      if (value.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument("bad number");
      return v;
    };
    auto integer = [&] {
      const double v = num();
      if (v != std::floor(v)) throw std::invalid_argument("expected an integer");
      return static_cast<int>(v);
    };
    auto boolean = [&] {
      if (value == "true" || value == "1" || value == "yes") return true;
      if (value == "false" || value == "0" || value == "no") return false;
      throw std::invalid_argument("expected a boolean");
    };
    try {
      if (key == "methods") methods = list();
      else if (key == "M") M = integer();
      else if (key == "directions") directions = integer();
      else if (key == "extra") extra = integer();
      else if (key == "K") K = integer();
      else if (key == "cutoff") cutoff = integer();
      else if (key == "alpha") alpha = num();
      else if (key == "C_alpha") C_alpha = num();
      else if (key == "tau") tau = num();
      else if (key == "deltas") {
        deltas.clear();
        for (const auto& s : list()) deltas.push_back(std::stod(s));
      } else if (key == "w_min") w_min = num();
      else if (key == "radius") radius = num();
      else if (key == "R") R = num();
      else if (key == "dataset") dataset = value;
      else if (key == "count") count = integer();
      else if (key == "n_min") n_min = integer();
      else if (key == "n_max") n_max = integer();
      else if (key == "sep_max") sep_max = num();
      else if (key == "balance") balance = boolean();
      else if (key == "per_level") per_level = integer();
      else if (key == "slope_lo") slope_lo = num();
      else if (key == "slope_hi") slope_hi = num();
      else if (key == "seed") seed = static_cast<std::uint64_t>(num());
      else if (key == "max_iters") solver.max_iters = integer();
      else if (key == "feas_tol") solver.feas_tol = num();
      else if (key == "obj_tol") solver.obj_tol = num();
      else if (key == "adcg_max_outer") adcg.max_outer = integer();
      else if (key == "adcg_min_gap") adcg.min_gap = num();
      else if (key == "adcg_min_progress") adcg.min_progress = num();
      else if (key == "output_dir") output_dir = value;
      else if (key == "threads") threads = integer();
      else throw std::invalid_argument("unknown key");
    } catch (const std::exception& e) {
      throw std::invalid_argument("config key '" + key + "' = '" + value + "': " + e.what());
    }
  }

  std::string hash(const std::string& dataset_bytes) const { return fnv1a_hex(identity().dump() + '\n' + dataset_bytes); }
};

/// Parses "key = value" lines; '#' starts a comment.
inline void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  apply_config_text(cfg, ss.str());
}

/// A named method with its discretization. Presets: static, reduced (alias
/// dimred, using the configured direction and extra-time counts), dimred-low
/// (3 directions, no extra times), dimred-mid (5, 3), dimred-high (10, 7), adcg.
struct MethodVariant {
  std::string name;
  Method method = Method::Reduced;
  int directions = 0;
  int extra = 0;
};

inline MethodVariant method_variant(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "static") return {name, Method::Static, 0, 0};
  if (name == "adcg") return {name, Method::Adcg, 0, 0};
  if (name == "reduced" || name == "dimred") return {name, Method::Reduced, cfg.directions, cfg.extra};
  if (name == "dimred-low") return {name, Method::Reduced, 3, 0};
  if (name == "dimred-mid") return {name, Method::Reduced, 5, 3};
  if (name == "dimred-high") return {name, Method::Reduced, 10, 7};
  throw std::invalid_argument("unknown method '" + name + "'");
}

inline DiscretizationSpec discretization_spec(const MethodVariant& m, const ExperimentConfig& cfg) {
  DiscretizationSpec s;
  s.method = m.method;
  s.M = cfg.M;
  s.cutoff = cfg.cutoff;
  s.times = cfg.times();
  s.directions = m.directions;
  s.extra = m.extra;
  return s;
}

struct InstanceResult {
  std::string config_hash;
  int id = 0;
  std::string method;
  double delta = 0.0;
  double uw = 0.0;
  bool matched = false;
  double runtime_ms = 0.0;
  double separation = 0.0;
  int particles = 0;
  int iterations = 0;
  bool converged = false;
};

inline const char* kResultsHeader = "config_hash,id,method,delta,uw,matched,runtime_ms,separation,particles,iterations,converged";

inline std::string to_csv(const InstanceResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%d,%s,%.17g,%.17g,%d,%.3f,%.17g,%d,%d,%d", r.config_hash.c_str(), r.id,
                r.method.c_str(), r.delta, r.uw, r.matched ? 1 : 0, r.runtime_ms, r.separation, r.particles,
                r.iterations, r.converged ? 1 : 0);
  return buf;
}

inline InstanceResult result_from_csv(const std::string& line) {
  const auto c = split_csv(line);
  if (c.size() != 11) throw std::invalid_argument("results row: expected 11 fields, got " + std::to_string(c.size()));
  InstanceResult r;
  r.config_hash = c[0];
  r.id = std::stoi(c[1]);
  r.method = c[2];
  r.delta = std::stod(c[3]);
  r.uw = std::stod(c[4]);
  r.matched = c[5] == "1";
  r.runtime_ms = std::stod(c[6]);
  r.separation = std::stod(c[7]);
  r.particles = std::stoi(c[8]);
  r.iterations = std::stoi(c[9]);
  r.converged = c[10] == "1";
  return r;
}

inline std::vector<InstanceResult> read_results(const std::string& path) {
  std::vector<InstanceResult> out;
  std::ifstream is(path);
  if (!is) return out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.rfind("config_hash,", 0) == 0) continue;
    out.push_back(result_from_csv(line));
  }
  return out;
}

/// Seed for the noise of one (instance, noise level) pair, independent of
/// scheduling.
inline Rng instance_rng(std::uint64_t seed, int id, std::size_t delta_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(delta_index)};
  return Rng(seq);
}

/// Reconstruction of one configuration with one method at t = 0, as a raw
/// measure (for the divergence) and as extracted atoms (for matching).
struct Reconstruction {
  DiscreteMeasure<2> raw;
  DiscreteMeasure<2> atoms;
  int iterations = 0;
  bool converged = true;
};

inline Reconstruction reconstruct(const MethodVariant& m, const ExperimentConfig& cfg, DiscretizationCache& cache,
                                  const std::vector<Eigen::VectorXd>& f, double alpha) {
  Reconstruction out;
  if (m.method == Method::Adcg) {
    const auto times = cfg.times();
    AdcgSolver solver(FourierPhaseModel(times, cfg.cutoff), TimeGrid::make(times).half_width, alpha, cfg.adcg);
    const AtomicSolution s = solver.solve(stack_measurements(f));
    out.raw = s.snapshot(0.0);
    out.atoms = s.snapshot(0.0, cfg.w_min);
    out.iterations = s.outer_iterations;
    out.converged = s.reason != "max_outer";
    return out;
  }
  const auto d = cache.get(discretization_spec(m, cfg));
  const GridReconstruction g = reconstruct_grid(*d, f, alpha, cfg.tau, cfg.solver);
  out.raw = weights_to_measure(g.u0, g.grid);
  out.atoms = cluster_extract(g.u0, g.grid, cfg.w_min);
  out.iterations = g.report.iterations;
  out.converged = g.report.converged;
  return out;
}

inline InstanceResult run_instance(const ExperimentConfig& cfg, const MethodVariant& m, DiscretizationCache& cache,
                                   const ParticleConfig<2>& truth, int id, std::size_t delta_index) {
  const auto start = std::chrono::steady_clock::now();
  const auto times = cfg.times();
  const double delta = cfg.deltas.at(delta_index);
  auto f = measure(truth, times, cfg.cutoff);
  Rng rng = instance_rng(cfg.seed, id, delta_index);
  f = add_noise(std::move(f), delta, rng);
  const Reconstruction rec = reconstruct(m, cfg, cache, f, cfg.alpha_for(delta));
  const DiscreteMeasure<2> truth0 = move(truth, 0.0);

  InstanceResult r;
  r.id = id;
  r.method = m.name;
  r.delta = delta;
  r.uw = unbalanced_wasserstein(truth0, rec.raw, cfg.R).value;
  r.matched = match_configs(rec.atoms, truth0, cfg.radius);
  r.separation = truth.size() >= 2 ? dynamic_separation(truth, times) : std::numeric_limits<double>::infinity();
  r.particles = static_cast<int>(truth.size());
  r.iterations = rec.iterations;
  r.converged = rec.converged;
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

struct Task {
  int id = 0;
  std::size_t method = 0;
  std::size_t delta_index = 0;
};

/// Tasks in output order: noise level, then configuration, then method.
/// With per_level > 0 each noise level uses that many configurations, thinned
/// uniformly by index.
inline std::vector<Task> make_tasks(const ExperimentConfig& cfg, std::size_t n_configs) {
  std::vector<int> ids(n_configs);
  std::iota(ids.begin(), ids.end(), 0);
  if (cfg.per_level > 0) ids = thin(ids, static_cast<std::size_t>(cfg.per_level));
  std::vector<Task> tasks;
  for (std::size_t di = 0; di < cfg.deltas.size(); ++di)
    for (int id : ids)
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) tasks.push_back({id, mi, di});
  return tasks;
}

/// Runs all tasks on a worker pool; rows are appended to results_path in task
/// order by the calling thread, fsynced one by one. With resume, rows already
/// present for the same config hash are kept and their tasks skipped. Returns
/// all rows of this configuration in task order.
inline std::vector<InstanceResult> run_tasks(const ExperimentConfig& cfg, const Dataset& data, const std::string& results_path,
                                             bool resume, std::ostream* log = nullptr) {
  cfg.validate();
  std::vector<MethodVariant> variants;
  for (const auto& name : cfg.methods) variants.push_back(method_variant(name, cfg));
  const std::string hash = cfg.hash(dataset_to_jsonl(data));
  const auto tasks = make_tasks(cfg, data.configs.size());

  using Key = std::tuple<int, std::string, double>;
  std::map<Key, InstanceResult> done;
  if (resume) {
    for (auto& r : read_results(results_path))
      if (r.config_hash == hash) done.emplace(Key{r.id, r.method, r.delta}, r);
  } else {
    std::filesystem::remove(results_path);
  }
  const bool fresh = !std::filesystem::exists(results_path) || std::filesystem::file_size(results_path) == 0;
  SyncedAppender out(results_path);
  if (fresh) out.write_line(kResultsHeader);

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    if (!done.count(Key{t.id, variants[t.method].name, cfg.deltas[t.delta_index]})) todo.push_back(i);
  }

  DiscretizationCache cache;
  std::vector<std::optional<InstanceResult>> slots(todo.size());
  std::vector<std::exception_ptr> errors(todo.size());
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::condition_variable ready;
  auto worker = [&] {
    for (std::size_t k = next++; k < todo.size(); k = next++) {
      const Task& t = tasks[todo[k]];
      std::optional<InstanceResult> r;
      std::exception_ptr err;
      try {
        r = run_instance(cfg, variants[t.method], cache, data.configs.at(t.id), t.id, t.delta_index);
        r->config_hash = hash;
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard lock(mutex);
        slots[k] = std::move(r);
        errors[k] = err;
        if (err && !slots[k]) slots[k].emplace();  // marks the slot as finished
      }
      ready.notify_all();
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(cfg.threads, std::max<std::size_t>(todo.size(), 1));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);

  std::exception_ptr first_error;
  for (std::size_t k = 0; k < todo.size(); ++k) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return slots[k].has_value(); });
    if (errors[k]) {
      if (!first_error) first_error = errors[k];
      next = todo.size();
      continue;
    }
    const InstanceResult r = *slots[k];
    lock.unlock();
    if (first_error) continue;
    out.write_line(to_csv(r));
    const Task& t = tasks[todo[k]];
    done.emplace(Key{t.id, r.method, r.delta}, r);
    if (log) {
      *log << "[" << k + 1 << "/" << todo.size() << "] id=" << r.id << " method=" << r.method << " delta=" << r.delta
           << " uw=" << r.uw << " matched=" << r.matched << " ms=" << static_cast<long long>(r.runtime_ms)
           << (r.converged ? "" : " (not converged)") << std::endl;
    }
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<InstanceResult> rows;
  for (const auto& t : tasks) rows.push_back(done.at(Key{t.id, variants[t.method].name, cfg.deltas[t.delta_index]}));
  return rows;
}

/// The configured dataset file, or a freshly generated one.
inline Dataset load_or_generate(const ExperimentConfig& cfg) {
  if (!cfg.dataset.empty()) return read_dataset(cfg.dataset);
  Dataset d;
  d.spec = cfg.dataset_spec();
  Rng rng(d.spec.seed);
  d.configs = rejection_sample_dataset(d.spec, rng);
  return d;
}

// ---------------------------------------------------------------------------
// Exact-recovery summary

struct ExactSummary {
  std::vector<std::string> methods;
  double bin_width = 0.01;
  int bins = 10;
  std::vector<std::vector<int>> total;    // [method][bin]
  std::vector<std::vector<int>> correct;  // [method][bin]
  std::map<std::string, int> patterns;    // success pattern over methods -> configurations

  double rate(std::size_t m, int b) const { return total[m][b] ? double(correct[m][b]) / total[m][b] : 0.0; }

  /// Pooled rate over all bins whose lower edge is >= lo.
  double pooled_rate(std::size_t m, double lo) const {
    int t = 0, c = 0;
    for (int b = 0; b < bins; ++b) {
      if (b * bin_width < lo - 1e-12) continue;
      t += total[m][b];
      c += correct[m][b];
    }
    return t ? double(c) / t : 0.0;
  }
};

/// Bins rows by dynamic separation (width 0.01 over [0, 0.1]); separations
/// outside the range are left out.
inline ExactSummary summarize_exact(const std::vector<std::string>& methods, const std::vector<InstanceResult>& rows) {
  ExactSummary s;
  s.methods = methods;
  s.total.assign(methods.size(), std::vector<int>(s.bins, 0));
  s.correct = s.total;
  std::map<int, std::vector<int>> per_config;  // id -> matched flag per method (-1 missing)
  for (const auto& r : rows) {
    const auto it = std::find(methods.begin(), methods.end(), r.method);
    if (it == methods.end()) continue;
    const std::size_t m = it - methods.begin();
    auto& flags = per_config.try_emplace(r.id, std::vector<int>(methods.size(), -1)).first->second;
    flags[m] = r.matched;
    if (!(r.separation >= 0.0) || r.separation > s.bin_width * s.bins) continue;
    const int b = std::min(s.bins - 1, static_cast<int>(r.separation / s.bin_width));
    ++s.total[m][b];
    s.correct[m][b] += r.matched;
  }
  for (const auto& [id, flags] : per_config) {
    std::string key;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      if (m) key += ' ';
      key += methods[m] + (flags[m] == 1 ? "+" : flags[m] == 0 ? "-" : "?");
    }
    ++s.patterns[key];
  }
  return s;
}

inline std::string exact_summary_csv(const ExactSummary& s) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,method,configs,correct,rate\n";
  for (std::size_t m = 0; m < s.methods.size(); ++m)
    for (int b = 0; b < s.bins; ++b)
      os << svg::fmt(b * s.bin_width) << ',' << svg::fmt((b + 1) * s.bin_width) << ',' << s.methods[m] << ','
         << s.total[m][b] << ',' << s.correct[m][b] << ',' << s.rate(m, b) << '\n';
  return os.str();
}

inline std::string exact_patterns_csv(const ExactSummary& s) {
  std::ostringstream os;
  os << "pattern,configs\n";
  for (const auto& [k, n] : s.patterns) os << k << ',' << n << '\n';
  return os.str();
}

inline std::string exact_rate_svg(const ExactSummary& s, const std::string& title) {
  svg::LinePlot p{title, "dynamic separation", "correctly reconstructed", false, {}};
  for (std::size_t m = 0; m < s.methods.size(); ++m) {
    svg::Series ser{s.methods[m], {}, {}, false};
    for (int b = 0; b < s.bins; ++b) {
      if (!s.total[m][b]) continue;
      ser.x.push_back((b + 0.5) * s.bin_width);
      ser.y.push_back(s.rate(m, b));
    }
    p.series.push_back(ser);
  }
  return svg::render(p);
}

/// Blob chart of the success patterns: for the first method against each other
/// method, the four groups (both, only first, only other, neither).
inline std::string exact_blob_svg(const ExactSummary& s, const std::vector<InstanceResult>& rows, const std::string& title) {
  svg::BlobChart chart;
  chart.title = title;
  chart.columns = {"both", "only " + (s.methods.empty() ? std::string() : s.methods[0]), "only other", "neither"};
  std::map<int, std::map<std::string, bool>> by_id;
  for (const auto& r : rows) by_id[r.id][r.method] = r.matched;
  for (std::size_t m = 1; m < s.methods.size(); ++m) {
    chart.rows.push_back(s.methods[0] + " vs " + s.methods[m]);
    std::vector<int> c(4, 0);
    for (const auto& [id, flags] : by_id) {
      const auto a = flags.find(s.methods[0]), b = flags.find(s.methods[m]);
      if (a == flags.end() || b == flags.end()) continue;
      ++c[a->second && b->second ? 0 : a->second ? 1 : b->second ? 2 : 3];
    }
    chart.counts.push_back(c);
  }
  return svg::render(chart);
}

// ---------------------------------------------------------------------------
// Noise-rate summary

struct NoiseLevel {
  std::string method;
  double delta = 0.0;
  double alpha = 0.0;
  int count = 0;
  double mean_uw = 0.0;
};

struct SlopeFit {
  std::string method;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
};

inline std::vector<NoiseLevel> summarize_noise(const ExperimentConfig& cfg, const std::vector<InstanceResult>& rows) {
  std::vector<NoiseLevel> out;
  for (const auto& m : cfg.methods) {
    for (double d : cfg.deltas) {
      NoiseLevel lv{m, d, cfg.alpha_for(d), 0, 0.0};
      for (const auto& r : rows) {
        if (r.method != m || r.delta != d) continue;
        ++lv.count;
        lv.mean_uw += r.uw;
      }
      if (lv.count) lv.mean_uw /= lv.count;
      out.push_back(lv);
    }
  }
  return out;
}

/// Least-squares slope of log(mean UW) against log(delta) over lo <= delta <= hi.
inline SlopeFit fit_slope(const std::string& method, const std::vector<NoiseLevel>& levels, double lo, double hi) {
  SlopeFit fit;
  fit.method = method;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& lv : levels) {
    if (lv.method != method || lv.delta < lo || lv.delta > hi || !(lv.delta > 0) || !(lv.mean_uw > 0) || !lv.count)
      continue;
    const double x = std::log(lv.delta), y = std::log(lv.mean_uw);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++fit.points;
  }
  const double n = fit.points;
  if (fit.points >= 2 && n * sxx - sx * sx > 0) {
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
  }
  return fit;
}

inline std::string noise_summary_csv(const std::vector<NoiseLevel>& levels) {
  std::ostringstream os;
  os.precision(10);
  os << "method,delta,alpha,configs,mean_uw\n";
  for (const auto& lv : levels) os << lv.method << ',' << lv.delta << ',' << lv.alpha << ',' << lv.count << ',' << lv.mean_uw << '\n';
  return os.str();
}

inline std::string noise_svg(const std::vector<NoiseLevel>& levels, const std::vector<SlopeFit>& fits,
                             const std::string& title) {
  svg::LinePlot p{title, "noise level delta", "mean UW", true, {}};
  double ref_x0 = 0, ref_y0 = 0, ref_x1 = 0;
  for (const auto& fit : fits) {
    svg::Series s{fit.method, {}, {}, false};
    for (const auto& lv : levels) {
      if (lv.method != fit.method || !(lv.delta > 0) || !lv.count) continue;
      s.x.push_back(lv.delta);
      s.y.push_back(lv.mean_uw);
    }
    if (!s.x.empty() && ref_x0 == 0) {
      ref_x0 = s.x.front();
      ref_y0 = s.y.front();
      ref_x1 = s.x.back();
    }
    char label[96];
    std::snprintf(label, sizeof label, "%s (slope %.2f)", fit.method.c_str(), fit.slope);
    s.label = label;
    p.series.push_back(s);
  }
  if (ref_x0 > 0 && ref_x1 > ref_x0) p.series.push_back({"sqrt(delta)", {ref_x0, ref_x1}, {ref_y0, ref_y0 * std::sqrt(ref_x1 / ref_x0)}, true});
  return svg::render(p);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

}  // namespace dynsr
