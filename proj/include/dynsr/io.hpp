#pragma once

// File formats. A configuration is the JSON object
//   {"positions": [[x1, x2], ...], "velocities": [[v1, v2], ...], "masses": [m, ...]}
// with one entry per particle in the same order. A dataset is JSON lines: a
// header record {"type": "header", "spec": {...}} followed by one record
// {"type": "config", "id": k, ...configuration fields} per line.

#include "dynsr/datagen.hpp"
#include "dynsr/types.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynsr {

template <int D>
nlohmann::json to_json(const ParticleConfig<D>& cfg) {
  nlohmann::json pos = nlohmann::json::array(), vel = nlohmann::json::array(), mass = nlohmann::json::array();
  for (const auto& p : cfg.particles) {
    pos.push_back(std::vector<double>(p.x.data(), p.x.data() + D));
    vel.push_back(std::vector<double>(p.v.data(), p.v.data() + D));
    mass.push_back(p.m);
  }
  return {{"positions", pos}, {"velocities", vel}, {"masses", mass}};
}

template <int D>
ParticleConfig<D> config_from_json(const nlohmann::json& j) {
  const auto& pos = j.at("positions");
  const auto& vel = j.at("velocities");
  const auto& mass = j.at("masses");
  if (pos.size() != vel.size() || pos.size() != mass.size()) {
    throw std::invalid_argument("configuration: positions, velocities and masses differ in length");
  }
  ParticleConfig<D> cfg;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const auto x = pos[i].get<std::vector<double>>();
    const auto v = vel[i].get<std::vector<double>>();
    if (x.size() != D || v.size() != D) throw std::invalid_argument("configuration: wrong coordinate dimension");
    Particle<D> p;
    for (int k = 0; k < D; ++k) {
      p.x[k] = x[k];
      p.v[k] = v[k];
    }
    p.m = mass[i].get<double>();
    cfg.particles.push_back(p);
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json to_json(const DatasetSpec& s) {
  return {{"count", s.count},       {"n_min", s.n_min},     {"n_max", s.n_max},
          {"mass_lo", s.mass_lo},   {"mass_hi", s.mass_hi}, {"times", s.times},
          {"sep_max", s.sep_max},   {"sep_bins", s.sep_bins}, {"balance_separation", s.balance_separation},
          {"seed", s.seed}};
}

inline DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
  DatasetSpec s;
  s.count = j.at("count");
  s.n_min = j.at("n_min");
  s.n_max = j.at("n_max");
  s.mass_lo = j.at("mass_lo");
  s.mass_hi = j.at("mass_hi");
  s.times = j.at("times").get<std::vector<double>>();
  s.sep_max = j.at("sep_max");
  s.sep_bins = j.at("sep_bins");
  s.balance_separation = j.at("balance_separation");
  s.seed = j.at("seed");
  return s;
}

struct Dataset {
  DatasetSpec spec;
  std::vector<ParticleConfig<2>> configs;
};

inline std::string dataset_to_jsonl(const Dataset& d) {
  std::ostringstream os;
  os << nlohmann::json{{"type", "header"}, {"spec", to_json(d.spec)}}.dump() << '\n';
  for (std::size_t i = 0; i < d.configs.size(); ++i) {
    nlohmann::json rec = to_json(d.configs[i]);
    rec["type"] = "config";
    rec["id"] = i;
    os << rec.dump() << '\n';
  }
  return os.str();
}

inline void write_dataset(const std::string& path, const Dataset& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << dataset_to_jsonl(d);
  if (!os) throw std::runtime_error("write failed for " + path);
}

/// Parses dataset JSON lines; name is used in error messages.
inline Dataset read_dataset_stream(std::istream& is, const std::string& name) {
  Dataset d;
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error(name + ":" + std::to_string(lineno) + ": invalid JSON");
    const std::string type = j.value("type", "");
    if (type == "header") {
      d.spec = dataset_spec_from_json(j.at("spec"));
      header = true;
    } else if (type == "config") {
      d.configs.push_back(config_from_json<2>(j));
    } else {
      throw std::runtime_error(name + ":" + std::to_string(lineno) + ": unknown record type '" + type + "'");
    }
  }
  if (!header) throw std::runtime_error(name + ": missing header record");
  return d;
}

inline Dataset read_dataset_text(const std::string& text) {
  std::istringstream is(text);
  return read_dataset_stream(is, "<dataset>");
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_dataset_stream(is, path);
}

/// Appends lines to a file, flushing and fsyncing after each one.
class SyncedAppender {
 public:
  explicit SyncedAppender(const std::string& path) : file_(std::fopen(path.c_str(), "ab")) {
    if (!file_) throw std::runtime_error("cannot open " + path + " for appending");
  }
  SyncedAppender(const SyncedAppender&) = delete;
  SyncedAppender& operator=(const SyncedAppender&) = delete;
  ~SyncedAppender() {
    if (file_) std::fclose(file_);
  }

  void write_line(const std::string& line) {
    if (std::fputs(line.c_str(), file_) < 0 || std::fputc('\n', file_) == EOF || std::fflush(file_) != 0) {
      throw std::runtime_error("write failed");
    }
    ::fsync(::fileno(file_));
  }

 private:
  std::FILE* file_;
};

/// Minimal CSV splitting (no quoted fields are ever written by this library).
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace dynsr
