#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dyson/error.hpp"
#include "dyson/io.hpp"
#include "dyson/measure.hpp"
#include "dyson/particle_sim.hpp"

namespace dyson::cli {

using nlohmann::json;

// kind is one_source, two_source (with a) or atoms (inline list, or a CSV
// file of `location,weight` rows; a single column means equal weights).
struct MeasureSpec {
  std::string kind = "one_source";
  double a = 1.0;
  std::vector<Atom> atoms;
  std::string atoms_file;

  AtomicMeasure build() const {
    if (kind == "one_source") return AtomicMeasure::one_source();
    if (kind == "two_source") {
      if (!(a > 0.0)) throw ValidationError("measure.a", "must be positive");
      return AtomicMeasure::two_source(a);
    }
    if (kind == "atoms") {
      if (!atoms.empty()) return AtomicMeasure(atoms);
      if (atoms_file.empty()) throw ValidationError("measure.atoms", "no atoms given");
      return AtomicMeasure(load_atoms(atoms_file));
    }
    throw ValidationError("measure.kind", "unknown kind '" + kind + "'");
  }

  bool analytic() const { return kind == "one_source" || kind == "two_source"; }

  static std::vector<Atom> load_atoms(const std::string& path) {
    std::vector<Atom> out;
    const auto rows = read_csv(path);
    bool weighted = false;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      if (k == 0 && !r.empty() && r[0] == "location") {
        weighted = r.size() > 1;
        continue;
      }
      const std::string field = "measure.atoms_file:" + std::to_string(k + 1);
      if (r.size() >= 2) {
        weighted = true;
        out.push_back({parse_double(r[0], field), parse_double(r[1], field)});
      } else {
        out.push_back({parse_double(r[0], field), 0.0});
      }
    }
    if (out.empty()) throw ValidationError("measure.atoms_file", "no atoms in " + path);
    if (!weighted)
      for (auto& a : out) a.weight = 1.0 / static_cast<double>(out.size());
    std::sort(out.begin(), out.end(), [](const Atom& x, const Atom& y) {
      return x.location < y.location;
    });
    return out;
  }

  // one_source | two_source:a=A | atoms:FILE
  static MeasureSpec parse(const std::string& text) {
    MeasureSpec m;
    if (text == "one_source") return m;
    if (text.rfind("two_source", 0) == 0) {
      m.kind = "two_source";
      const std::string rest = text.substr(10);
      if (rest.empty()) return m;
      if (rest.rfind(":a=", 0) != 0) throw ValidationError("--measure", "expected two_source:a=A");
      m.a = parse_double(rest.substr(3), "--measure");
      if (!(m.a > 0.0)) throw ValidationError("--measure", "a must be positive");
      return m;
    }
    if (text.rfind("atoms:", 0) == 0) {
      m.kind = "atoms";
      m.atoms_file = text.substr(6);
      if (m.atoms_file.empty()) throw ValidationError("--measure", "atoms: needs a file");
      return m;
    }
    throw ValidationError("--measure", "unknown measure '" + text + "'");
  }
};

// x_max <= x_min selects the particle range padded by 5% on each side.
struct HistogramSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n_bins = 60;
};

struct SupportSpec {
  double t_min = 0.0;
  double t_max = 2.0;
  std::size_t steps = 41;
  // Launch points of the exported characteristic lines.
  std::vector<double> launch_points;
};

struct RunConfig {
  std::string output_dir = "out";
  MeasureSpec measure;
  SimParams sim;
  std::vector<double> sample_times;  // empty: {sim.t_end}
  HistogramSpec histogram;
  StepControl control;

  std::vector<double> times;  // density
  Grid grid{-3.0, 3.0, 601};
  double green_eps = 0.0;  // > 0: also dump G(t, x + i green_eps)

  SupportSpec support;

  std::string suite = "default";
  std::string mutation = "none";

  std::vector<double> effective_sample_times() const {
    return sample_times.empty() ? std::vector<double>{sim.t_end} : sample_times;
  }
};

namespace detail {

template <class T>
void read_field(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw ValidationError(path + "." + key, std::string("bad value: ") + e.what());
  }
}

inline void reject_unknown(const json& j, std::set<std::string> known, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ValidationError(path + "." + it.key(), "unknown key");
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
  json atoms = json::array();
  for (const Atom& a : c.measure.atoms) atoms.push_back({{"location", a.location}, {"weight", a.weight}});
  return {
      {"output_dir", c.output_dir},
      {"measure",
       {{"kind", c.measure.kind}, {"a", c.measure.a}, {"atoms", atoms},
        {"atoms_file", c.measure.atoms_file}}},
      {"sim",
       {{"n_particles", c.sim.n_particles}, {"beta", c.sim.beta}, {"dt", c.sim.dt},
        {"seed", c.sim.seed}, {"t_end", c.sim.t_end}}},
      {"sample_times", c.sample_times},
      {"histogram",
       {{"x_min", c.histogram.x_min}, {"x_max", c.histogram.x_max},
        {"n_bins", c.histogram.n_bins}}},
      {"control",
       {{"jitter", c.control.jitter}, {"gap_floor_factor", c.control.gap_floor_factor},
        {"kick_fraction", c.control.kick_fraction}, {"drift_budget", c.control.drift_budget},
        {"cluster_time_factor", c.control.cluster_time_factor},
        {"max_halvings", c.control.max_halvings}}},
      {"times", c.times},
      {"grid", {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"n", c.grid.n}}},
      {"green_eps", c.green_eps},
      {"support",
       {{"t_min", c.support.t_min}, {"t_max", c.support.t_max}, {"steps", c.support.steps},
        {"launch_points", c.support.launch_points}}},
      {"suite", c.suite},
      {"mutation", c.mutation},
  };
}

inline RunConfig from_json(const json& j) {
  using detail::read_field;
  using detail::reject_unknown;
  RunConfig c;
  reject_unknown(j,
                 {"output_dir", "measure", "sim", "sample_times", "histogram", "control", "times",
                  "grid", "green_eps", "support", "suite", "mutation"},
                 "config");
  read_field(j, "output_dir", c.output_dir, "config");
  if (j.contains("measure")) {
    const json& m = j["measure"];
    reject_unknown(m, {"kind", "a", "atoms", "atoms_file"}, "measure");
    read_field(m, "kind", c.measure.kind, "measure");
    read_field(m, "a", c.measure.a, "measure");
    read_field(m, "atoms_file", c.measure.atoms_file, "measure");
    if (m.contains("atoms")) {
      if (!m["atoms"].is_array()) throw ValidationError("measure.atoms", "expected an array");
      for (std::size_t k = 0; k < m["atoms"].size(); ++k) {
        const json& a = m["atoms"][k];
        const std::string path = "measure.atoms[" + std::to_string(k) + "]";
        reject_unknown(a, {"location", "weight"}, path);
        Atom atom{0.0, 0.0};
        read_field(a, "location", atom.location, path);
        read_field(a, "weight", atom.weight, path);
        c.measure.atoms.push_back(atom);
      }
    }
  }
  if (j.contains("sim")) {
    const json& s = j["sim"];
    reject_unknown(s, {"n_particles", "beta", "dt", "seed", "t_end"}, "sim");
    read_field(s, "n_particles", c.sim.n_particles, "sim");
    read_field(s, "beta", c.sim.beta, "sim");
    read_field(s, "dt", c.sim.dt, "sim");
    read_field(s, "seed", c.sim.seed, "sim");
    read_field(s, "t_end", c.sim.t_end, "sim");
  }
  read_field(j, "sample_times", c.sample_times, "config");
  if (j.contains("histogram")) {
    const json& h = j["histogram"];
    reject_unknown(h, {"x_min", "x_max", "n_bins"}, "histogram");
    read_field(h, "x_min", c.histogram.x_min, "histogram");
    read_field(h, "x_max", c.histogram.x_max, "histogram");
    read_field(h, "n_bins", c.histogram.n_bins, "histogram");
  }
  if (j.contains("control")) {
    const json& s = j["control"];
    reject_unknown(s,
                   {"jitter", "gap_floor_factor", "kick_fraction", "drift_budget",
                    "cluster_time_factor", "max_halvings"},
                   "control");
    read_field(s, "jitter", c.control.jitter, "control");
    read_field(s, "gap_floor_factor", c.control.gap_floor_factor, "control");
    read_field(s, "kick_fraction", c.control.kick_fraction, "control");
    read_field(s, "drift_budget", c.control.drift_budget, "control");
    read_field(s, "cluster_time_factor", c.control.cluster_time_factor, "control");
    read_field(s, "max_halvings", c.control.max_halvings, "control");
  }
  read_field(j, "times", c.times, "config");
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, {"x_min", "x_max", "n"}, "grid");
    read_field(g, "x_min", c.grid.x_min, "grid");
    read_field(g, "x_max", c.grid.x_max, "grid");
    read_field(g, "n", c.grid.n, "grid");
  }
  read_field(j, "green_eps", c.green_eps, "config");
  if (j.contains("support")) {
    const json& s = j["support"];
    reject_unknown(s, {"t_min", "t_max", "steps", "launch_points"}, "support");
    read_field(s, "t_min", c.support.t_min, "support");
    read_field(s, "t_max", c.support.t_max, "support");
    read_field(s, "steps", c.support.steps, "support");
    read_field(s, "launch_points", c.support.launch_points, "support");
  }
  read_field(j, "suite", c.suite, "config");
  read_field(j, "mutation", c.mutation, "config");
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("--config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("--config", std::string("parse error: ") + e.what());
  }
  return from_json(j);
}

inline std::string dump(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

inline void write_config(const RunConfig& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "config.json");
  out << dump(c);
  if (!out) throw IoError("failed writing " + (dir / "config.json").string());
}

// "MIN:MAX:N"
inline Grid parse_grid(const std::string& text, const std::string& field = "--grid") {
  std::stringstream ss(text);
  std::string a, b, n;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n))
    throw ValidationError(field, "expected MIN:MAX:N");
  Grid g{parse_double(a, field), parse_double(b, field), 0};
  const double nn = parse_double(n, field);
  if (!(nn >= 1.0) || nn != std::floor(nn)) throw ValidationError(field, "N must be a positive integer");
  g.n = static_cast<std::size_t>(nn);
  return g;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (item.find_first_not_of(' ') != std::string::npos) out.push_back(parse_double(item, field));
  return out;
}

}  // namespace dyson::cli
