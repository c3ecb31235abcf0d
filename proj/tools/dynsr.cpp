// Command-line front end: dataset generation, reconstruction, evaluation, the
// two experiments and the degeneracy audit.

#include "dynsr/analysis.hpp"
#include "dynsr/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace dynsr;

namespace {

// Flags that override configuration keys of the same meaning.
const std::vector<std::pair<std::string, std::string>> kConfigFlags = {
    {"--alpha", "alpha"},
    {"--tau", "tau"},
    {"--max-iters", "max_iters"},
    {"--feas-tol", "feas_tol"},
    {"--obj-tol", "obj_tol"},
    {"--seed", "seed"},
    {"--methods", "methods"},
    {"--M", "M"},
    {"--directions", "directions"},
    {"--extra", "extra"},
    {"--K", "K"},
    {"--cutoff", "cutoff"},
    {"--C-alpha", "C_alpha"},
    {"--deltas", "deltas"},
    {"--w-min", "w_min"},
    {"--radius", "radius"},
    {"--R", "R"},
    {"--dataset", "dataset"},
    {"--count", "count"},
    {"--n-min", "n_min"},
    {"--n-max", "n_max"},
    {"--sep-max", "sep_max"},
    {"--balance", "balance"},
    {"--per-level", "per_level"},
    {"--slope-lo", "slope_lo"},
    {"--slope-hi", "slope_hi"},
    {"--output-dir", "output_dir"},
    {"--threads", "threads"},
};

struct Common {
  std::string config_file;
  std::map<std::string, std::string> flags;  // key -> value
  bool resume = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_file, "configuration file of key = value lines");
  for (const auto& [flag, key] : kConfigFlags) {
    const std::string k = key;
    app->add_option_function<std::string>(flag, [&c, k](const std::string& v) { c.flags[k] = v; },
                                          "overrides config key '" + key + "'");
  }
}

/// Precedence: defaults, config file, DYNSR_OUTPUT_DIR, flags.
ExperimentConfig resolve(const Common& c, bool& deltas_given) {
  ExperimentConfig cfg;
  std::string text;
  if (!c.config_file.empty()) {
    std::ifstream is(c.config_file);
    if (!is) throw std::runtime_error("cannot read config " + c.config_file);
    std::stringstream ss;
    ss << is.rdbuf();
    text = ss.str();
    apply_config_text(cfg, text);
  }
  if (const char* env = std::getenv("DYNSR_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  for (const auto& [k, v] : c.flags) cfg.set(k, v);
  deltas_given = c.flags.count("deltas") || text.find("deltas") != std::string::npos;
  cfg.validate();
  return cfg;
}

void warn_static(const ExperimentConfig& cfg, const Common& c) {
  const bool has_reduced = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                       [](const std::string& m) { return m == "reduced" || m == "dimred"; });
  if (!has_reduced && (c.flags.count("directions") || c.flags.count("extra")))
    std::cerr << "warning: --directions/--extra only affect the 'reduced' method and are ignored here\n";
}

fs::path prepare_output(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

void warn_scale(const ExperimentConfig& cfg, std::size_t configs) {
  if (cfg.M > 50 || configs > 200)
    std::cerr << "warning: M = " << cfg.M << " with " << configs
              << " configurations; expect long runtimes (each reduced solve grows roughly with M^2)\n";
}

int cmd_generate(const Common& c, const std::string& out_path) {
  bool dg = false;
  ExperimentConfig cfg = resolve(c, dg);
  Dataset d;
  d.spec = cfg.dataset_spec();
  Rng rng(d.spec.seed);
  SamplingStats stats;
  d.configs = rejection_sample_dataset(d.spec, rng, &stats);
  const fs::path path = out_path.empty() ? prepare_output(cfg) / "dataset.jsonl" : fs::path(out_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_dataset(path.string(), d);
  std::cout << "wrote " << d.configs.size() << " configurations to " << path.string() << " (" << stats.attempts
            << " candidates drawn)\n";
  return 0;
}

int run_and_report(ExperimentConfig cfg, const Common& c, const std::string& results_name, Dataset& data) {
  warn_scale(cfg, data.configs.size());
  const fs::path dir = prepare_output(cfg);
  write_text(dir / (results_name + "_config.json"), cfg.to_json().dump(2) + "\n");
  run_tasks(cfg, data, (dir / (results_name + ".csv")).string(), c.resume, &std::cerr);
  return 0;
}

int cmd_reconstruct(const Common& c) {
  bool dg = false;
  ExperimentConfig cfg = resolve(c, dg);
  warn_static(cfg, c);
  if (cfg.dataset.empty()) throw std::invalid_argument("reconstruct: --dataset is required");
  Dataset data = read_dataset(cfg.dataset);
  return run_and_report(cfg, c, "results", data);
}

int cmd_evaluate(const Common& c, std::string results_path) {
  bool dg = false;
  ExperimentConfig cfg = resolve(c, dg);
  if (results_path.empty()) results_path = (fs::path(cfg.output_dir) / "results.csv").string();
  const auto rows = read_results(results_path);
  struct Acc {
    int n = 0, matched = 0;
    double uw = 0, ms = 0;
  };
  std::map<std::pair<std::string, double>, Acc> acc;
  for (const auto& r : rows) {
    auto& a = acc[{r.method, r.delta}];
    ++a.n;
    a.matched += r.matched;
    a.uw += r.uw;
    a.ms += r.runtime_ms;
  }
  std::ostringstream os;
  os << "method,delta,configs,match_rate,mean_uw,mean_runtime_ms\n";
  for (const auto& [k, a] : acc)
    os << k.first << ',' << k.second << ',' << a.n << ',' << double(a.matched) / a.n << ',' << a.uw / a.n << ','
       << a.ms / a.n << '\n';
  std::cout << os.str();
  const fs::path out = fs::path(results_path).replace_filename("evaluation.csv");
  write_text(out, os.str());
  return 0;
}

int cmd_exact(const Common& c) {
  bool dg = false;
  ExperimentConfig cfg = resolve(c, dg);
  warn_static(cfg, c);
  if (dg && (cfg.deltas.size() != 1 || cfg.deltas[0] != 0.0))
    std::cerr << "warning: exp-exact is noise-free; the delta list is ignored\n";
  cfg.deltas = {0.0};
  Dataset data = load_or_generate(cfg);
  run_and_report(cfg, c, "exact_results", data);
  const auto rows = read_results((fs::path(cfg.output_dir) / "exact_results.csv").string());
  const std::string hash = cfg.hash(dataset_to_jsonl(data));
  std::vector<InstanceResult> mine;
  for (const auto& r : rows)
    if (r.config_hash == hash) mine.push_back(r);
  const ExactSummary s = summarize_exact(cfg.methods, mine);
  const fs::path dir(cfg.output_dir);
  const std::string title = "exact recovery, " + std::to_string(2 * cfg.K + 1) + " times, M=" + std::to_string(cfg.M);
  write_text(dir / "exact_summary.csv", exact_summary_csv(s));
  write_text(dir / "exact_patterns.csv", exact_patterns_csv(s));
  write_text(dir / "exact_rate.svg", exact_rate_svg(s, title));
  write_text(dir / "exact_blobs.svg", exact_blob_svg(s, mine, title));
  std::cout << exact_summary_csv(s);
  for (std::size_t m = 0; m < s.methods.size(); ++m)
    std::cout << "pooled rate (separation >= 0.06) " << s.methods[m] << ": " << s.pooled_rate(m, 0.06) << "\n";
  return 0;
}

int cmd_noise(const Common& c) {
  bool dg = false;
  ExperimentConfig cfg = resolve(c, dg);
  warn_static(cfg, c);
  if (!dg) cfg.deltas = {1, 3, 10, 30, 100};
  Dataset data = load_or_generate(cfg);
  run_and_report(cfg, c, "noise_results", data);
  const auto rows = read_results((fs::path(cfg.output_dir) / "noise_results.csv").string());
  const std::string hash = cfg.hash(dataset_to_jsonl(data));
  std::vector<InstanceResult> mine;
  for (const auto& r : rows)
    if (r.config_hash == hash) mine.push_back(r);
  const auto levels = summarize_noise(cfg, mine);
  std::vector<SlopeFit> fits;
  std::ostringstream slopes;
  slopes << "method,slope,delta_lo,delta_hi,points\n";
  for (const auto& m : cfg.methods) {
    fits.push_back(fit_slope(m, levels, cfg.slope_lo, cfg.slope_hi));
    slopes << m << ',' << fits.back().slope << ',' << cfg.slope_lo << ',' << cfg.slope_hi << ',' << fits.back().points
           << '\n';
  }
  const fs::path dir(cfg.output_dir);
  write_text(dir / "noise_summary.csv", noise_summary_csv(levels));
  write_text(dir / "noise_slope.csv", slopes.str());
  write_text(dir / "noise_uw.svg", noise_svg(levels, fits, "mean UW against noise level"));
  std::cout << noise_summary_csv(levels) << slopes.str();
  return 0;
}

int cmd_ghosts(const Common& c, double coincidence_delta, std::string out_path) {
  bool dg = false;
  ExperimentConfig cfg = resolve(c, dg);
  Dataset data = load_or_generate(cfg);
  const auto times = cfg.times();
  const auto dirs = half_circle_directions(cfg.directions);
  if (out_path.empty()) out_path = (prepare_output(cfg) / "ghosts.jsonl").string();
  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot write " + out_path);
  int with_ghosts = 0, with_projected = 0;
  for (std::size_t id = 0; id < data.configs.size(); ++id) {
    const auto& S = data.configs[id];
    nlohmann::json rec;
    rec["id"] = id;
    rec["dynamic_separation"] = S.size() >= 2 ? dynamic_separation(S, times) : 0.0;
    nlohmann::json ghosts = nlohmann::json::array();
    for (const auto& [g, assignment] : find_ghosts(S, times))
      ghosts.push_back({{"x", {g.x[0], g.x[1]}}, {"v", {g.v[0], g.v[1]}}, {"assignment", assignment}});
    with_ghosts += !ghosts.empty();
    rec["ghosts"] = ghosts;
    nlohmann::json coincidences = nlohmann::json::array();
    for (const auto& co : find_coincidences(S, times, coincidence_delta))
      coincidences.push_back({{"t", co.label}, {"i", co.i}, {"j", co.j}, {"distance", co.distance}});
    rec["coincidences"] = coincidences;
    nlohmann::json projected = nlohmann::json::array();
    bool any = false;
    for (const auto& r : projected_degeneracy(S, dirs, times, DegeneracyMode::Time, coincidence_delta)) {
      any = any || !r.ghosts.empty();
      projected.push_back(to_json(r));
    }
    with_projected += any;
    rec["projected"] = projected;
    os << rec.dump() << '\n';
  }
  std::cout << data.configs.size() << " configurations: " << with_ghosts << " with exact ghosts, " << with_projected
            << " with ghosts in some projection; report in " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruction of linearly moving particles from snapshot Fourier measurements"};
  app.require_subcommand(1);

  Common c;
  std::string out_path, results_path;
  double coincidence_delta = 0.0;

  auto* gen = app.add_subcommand("generate", "sample a separation-balanced dataset");
  add_common(gen, c);
  gen->add_option("--out", out_path, "dataset file (default: <output dir>/dataset.jsonl)");

  auto* rec = app.add_subcommand("reconstruct", "reconstruct every configuration of a dataset");
  add_common(rec, c);
  rec->add_flag("--resume", c.resume, "keep rows already written for this configuration");

  auto* ev = app.add_subcommand("evaluate", "summarize a results file per method and noise level");
  add_common(ev, c);
  ev->add_option("--results", results_path, "results file (default: <output dir>/results.csv)");

  auto* ex = app.add_subcommand("exp-exact", "exact recovery rate against dynamic separation");
  add_common(ex, c);
  ex->add_flag("--resume", c.resume, "keep rows already written for this configuration");

  auto* nz = app.add_subcommand("exp-noise", "reconstruction error against noise level");
  add_common(nz, c);
  nz->add_flag("--resume", c.resume, "keep rows already written for this configuration");

  auto* gh = app.add_subcommand("analyze-ghosts", "coincidences and ghost particles of a dataset");
  add_common(gh, c);
  gh->add_option("--coincidence-delta", coincidence_delta, "distance counted as a coincidence")->check(CLI::NonNegativeNumber);
  gh->add_option("--out", out_path, "report file (default: <output dir>/ghosts.jsonl)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_generate(c, out_path);
    if (rec->parsed()) return cmd_reconstruct(c);
    if (ev->parsed()) return cmd_evaluate(c, results_path);
    if (ex->parsed()) return cmd_exact(c);
    if (nz->parsed()) return cmd_noise(c);
    if (gh->parsed()) return cmd_ghosts(c, coincidence_delta, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
