#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dyson/characteristics.hpp"
#include "dyson/cli/config.hpp"
#include "dyson/io.hpp"
#include "dyson/particle_sim.hpp"
#include "dyson/spectral.hpp"

namespace dyson::cli {

namespace fs = std::filesystem;

// N particles placed on the atoms, counts by largest remainder.
inline ParticleState initial_state(const AtomicMeasure& mu, std::size_t n) {
  const std::size_t m = mu.size();
  std::vector<std::size_t> count(m);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double exact = mu[k].weight * static_cast<double>(n);
    count[k] = static_cast<std::size_t>(std::floor(exact));
    used += count[k];
    rem.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; used < n; ++r, ++used) ++count[rem[r % m].second];
  ParticleState s;
  for (std::size_t k = 0; k < m; ++k) s.positions.insert(s.positions.end(), count[k], mu[k].location);
  return s;
}

// Closed-form density and a tabulated CDF for the one- and two-source
// solutions.
class AnalyticProfile {
 public:
  explicit AnalyticProfile(const MeasureSpec& m) : kind_(m.kind), a_(m.a) {
    if (!m.analytic())
      throw ValidationError("measure.kind", "no closed-form density for '" + m.kind + "'");
  }

  double density(double t, double x) const {
    return kind_ == "one_source" ? semicircle_density(t, x) : two_source_density(t, x, a_);
  }

  double outer_edge(double t) const {
    if (kind_ == "one_source") return 2.0 * std::sqrt(t);
    return a_ * std::sqrt(b_plus_minus(t / (a_ * a_)).first);
  }

  std::function<double(double)> cdf(double t, std::size_t n = 40001) const {
    if (kind_ == "one_source") return [t](double x) { return semicircle_cdf(t, x); };
    const double e = outer_edge(t);
    const double h = 2.0 * e / static_cast<double>(n - 1);
    auto tab = std::make_shared<std::vector<double>>(n, 0.0);
    double prev = density(t, -e);
    for (std::size_t k = 1; k < n; ++k) {
      const double cur = density(t, -e + static_cast<double>(k) * h);
      (*tab)[k] = (*tab)[k - 1] + 0.5 * h * (prev + cur);
      prev = cur;
    }
    const double total = tab->back();
    for (double& v : *tab) v /= total;
    return [tab, e, h, n](double x) {
      if (x <= -e) return 0.0;
      if (x >= e) return 1.0;
      const double u = (x + e) / h;
      const std::size_t k = std::min(static_cast<std::size_t>(u), n - 2);
      const double f = u - static_cast<double>(k);
      return (*tab)[k] + f * ((*tab)[k + 1] - (*tab)[k]);
    };
  }

 private:
  std::string kind_;
  double a_;
};

inline std::string time_tag(double t) { return "t" + format_double(t); }

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

inline EmpiricalDensity histogram_for(const ParticleState& s, const HistogramSpec& h) {
  double lo = h.x_min, hi = h.x_max;
  if (!(hi > lo)) {
    const auto [mn, mx] = std::minmax_element(s.positions.begin(), s.positions.end());
    const double pad = std::max(0.05 * (*mx - *mn), 1e-6);
    lo = *mn - pad;
    hi = *mx + pad;
  }
  if (h.n_bins < 1) throw ValidationError("histogram.n_bins", "must be >= 1");
  return empirical_density(s, lo, hi, h.n_bins);
}

struct SimRun {
  std::vector<double> times;
  std::vector<ParticleState> states;
  SimStats stats;
};

inline SimRun run_particles(const RunConfig& cfg) {
  cfg.sim.validate();
  const AtomicMeasure mu = cfg.measure.build();
  SimRun r;
  r.times = cfg.effective_sample_times();
  r.states = simulate(initial_state(mu, cfg.sim.n_particles), cfg.sim, r.times, cfg.control,
                      &r.stats);
  return r;
}

inline nlohmann::json cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  const SimRun run = run_particles(cfg);
  const fs::path dir = cfg.output_dir;
  write_config(cfg, dir);

  CsvWriter traj(dir / "trajectory.csv", {"time", "particle_index", "position"});
  nlohmann::json summary{{"command", "simulate"},
                         {"n_particles", cfg.sim.n_particles},
                         {"seed", cfg.sim.seed},
                         {"macro_steps", run.stats.macro_steps},
                         {"accepted_substeps", run.stats.accepted_substeps},
                         {"rejected_substeps", run.stats.rejected_substeps},
                         {"samples", nlohmann::json::array()}};
  for (std::size_t k = 0; k < run.states.size(); ++k) {
    const ParticleState& s = run.states[k];
    for (std::size_t i = 0; i < s.size(); ++i) traj.row(run.times[k], i, s.positions[i]);

    const EmpiricalDensity hist = histogram_for(s, cfg.histogram);
    CsvWriter dens(dir / ("density_" + time_tag(run.times[k]) + ".csv"), {"x", "rho"});
    for (std::size_t j = 0; j < hist.n_bins; ++j) dens.row(hist.bin_center(j), hist.values[j]);
    dens.close();

    nlohmann::json sample{{"time", run.times[k]}};
    if (cfg.measure.analytic() && run.times[k] > 0.0) {
      const double ks = ks_distance(s, AnalyticProfile(cfg.measure).cdf(run.times[k]));
      sample["ks"] = ks;
      log << "t=" << format_double(run.times[k]) << " KS=" << format_double(ks) << "\n";
    }
    summary["samples"].push_back(sample);
  }
  traj.close();
  write_json(dir / "summary.json", summary);
  return summary;
}

inline nlohmann::json cmd_compare(const RunConfig& cfg, std::ostream& log) {
  const AnalyticProfile profile(cfg.measure);
  const SimRun run = run_particles(cfg);
  const fs::path dir = cfg.output_dir;
  write_config(cfg, dir);
  nlohmann::json summary{{"command", "compare"}, {"samples", nlohmann::json::array()}};
  for (std::size_t k = 0; k < run.states.size(); ++k) {
    const double t = run.times[k];
    if (!(t > 0.0)) continue;
    const auto cdf = profile.cdf(t);
    const double ks = ks_distance(run.states[k], cdf);
    const EmpiricalDensity hist = histogram_for(run.states[k], cfg.histogram);
    const double w = hist.bin_width();
    CsvWriter out(dir / ("compare_" + time_tag(t) + ".csv"), {"x", "rho_empirical", "rho_analytic"});
    double sup = 0.0;
    for (std::size_t j = 0; j < hist.n_bins; ++j) {
      const double lo = hist.x_min + static_cast<double>(j) * w;
      const double ref = (cdf(lo + w) - cdf(lo)) / w;
      sup = std::max(sup, std::abs(hist.values[j] - ref));
      out.row(hist.bin_center(j), hist.values[j], ref);
    }
    out.close();
    log << "t=" << format_double(t) << " KS=" << format_double(ks)
        << " sup=" << format_double(sup) << "\n";
    summary["samples"].push_back({{"time", t}, {"ks", ks}, {"sup_norm", sup}, {"bin_width", w}});
  }
  write_json(dir / "compare.json", summary);
  return summary;
}

// Density of a general atomic measure from its Green's function; off the
// support it is zero, and where the epsilon extrapolation stalls (edges,
// cusps) the boundary value of G is used directly.
inline double functional_density(const AtomicMeasure& mu, const SupportSet& supp, double t,
                                  double x) {
  if (!supp.contains(x)) return 0.0;
  const GreenFn g = [&mu](double s, const ComplexPoint& z) { return green_functional(mu, s, z); };
  try {
    return density_from_green(g, t, x);
  } catch (const ExtrapolationError&) {
    const double v = -green_functional(mu, t, ComplexPoint::boundary(x)).imag() / std::numbers::pi;
    return std::max(v, 0.0);
  }
}

inline nlohmann::json cmd_density(const RunConfig& cfg, std::ostream& log) {
  cfg.grid.validate("grid");
  const AtomicMeasure mu = cfg.measure.build();
  const fs::path dir = cfg.output_dir;
  write_config(cfg, dir);
  nlohmann::json summary{{"command", "density"}, {"files", nlohmann::json::array()}};
  if (cfg.times.empty()) {
    log << "warning: no times given, nothing to do\n";
    write_json(dir / "summary.json", summary);
    return summary;
  }
  for (std::size_t k = 0; k < cfg.times.size(); ++k)
    if (!(cfg.times[k] > 0.0))
      throw ValidationError("times[" + std::to_string(k) + "]", "must be > 0");

  const std::vector<double> xs = cfg.grid.points();
  for (double t : cfg.times) {
    std::function<double(double)> rho;
    std::function<cplx(const ComplexPoint&)> green;
    SupportSet supp;
    if (cfg.measure.analytic()) {
      const AnalyticProfile profile(cfg.measure);
      rho = [profile, t](double x) { return profile.density(t, x); };
      if (cfg.measure.kind == "one_source")
        green = [t](const ComplexPoint& z) { return green_one_source(t, z); };
      else
        green = [t, a = cfg.measure.a](const ComplexPoint& z) { return green_two_source(t, z, a); };
    } else {
      supp = support(mu, t);
      rho = [&mu, &supp, t](double x) { return functional_density(mu, supp, t, x); };
      green = [&mu, t](const ComplexPoint& z) { return green_functional(mu, t, z); };
    }
    const std::string name = "density_" + time_tag(t) + ".csv";
    CsvWriter out(dir / name, {"x", "rho"});
    for (double x : xs) out.row(x, rho(x));
    out.close();
    summary["files"].push_back(name);
    if (cfg.green_eps > 0.0) {
      const std::string gname = "green_" + time_tag(t) + ".csv";
      CsvWriter gout(dir / gname, {"re_z", "im_z", "re_G", "im_G"});
      for (double x : xs) {
        const cplx g = green(ComplexPoint::upper(x, cfg.green_eps));
        gout.row(x, cfg.green_eps, g.real(), g.imag());
      }
      gout.close();
      summary["files"].push_back(gname);
    }
    log << "wrote " << name << "\n";
  }
  write_json(dir / "summary.json", summary);
  return summary;
}

inline std::vector<double> support_times(const SupportSpec& s) {
  if (s.steps < 1) throw ValidationError("support.steps", "must be >= 1");
  if (!(s.t_min >= 0.0)) throw ValidationError("support.t_min", "must be >= 0");
  if (s.steps > 1 && !(s.t_max > s.t_min))
    throw ValidationError("support.t_max", "must exceed t_min");
  std::vector<double> ts;
  for (std::size_t k = 0; k < s.steps; ++k)
    ts.push_back(s.steps == 1 ? s.t_min
                              : s.t_min + (s.t_max - s.t_min) * static_cast<double>(k) /
                                              static_cast<double>(s.steps - 1));
  return ts;
}

// Support edges (including points where components have merged) per time,
// breakdown points with their images, and characteristic lines up to their
// breakdown time.
inline nlohmann::json cmd_support(const RunConfig& cfg, std::ostream& log) {
  const AtomicMeasure mu = cfg.measure.build();
  const std::vector<double> ts = support_times(cfg.support);
  const fs::path dir = cfg.output_dir;
  write_config(cfg, dir);

  CsvWriter edges(dir / "support_edges.csv", {"t", "edge_index", "edge_position"});
  CsvWriter brk(dir / "breakdown.csv", {"t", "index", "x0", "edge_position"});
  std::size_t rows = 0;
  for (double t : ts) {
    std::vector<double> e;
    if (t == 0.0) {
      for (const Atom& a : mu.atoms()) e.push_back(a.location);
    } else {
      const SupportSet s = support(mu, t);
      e = s.edges();
      e.insert(e.end(), s.interior_critical.begin(), s.interior_critical.end());
      std::sort(e.begin(), e.end());
      const auto c = breakdown_points(mu, t);
      for (std::size_t i = 0; i < c.size(); ++i)
        brk.row(t, i, c[i], characteristic_map(mu, t, c[i]));
    }
    for (std::size_t i = 0; i < e.size(); ++i, ++rows) edges.row(t, i, e[i]);
  }
  edges.close();
  brk.close();

  std::vector<double> launch = cfg.support.launch_points;
  if (launch.empty()) {
    const double lo = mu.atoms().front().location - 2.0;
    const double hi = mu.atoms().back().location + 2.0;
    for (int k = 0; k <= 24; ++k) launch.push_back(lo + (hi - lo) * k / 24.0);
  }
  CsvWriter lines(dir / "characteristics.csv", {"x0", "t", "x"});
  const double t_top = ts.back();
  for (double x0 : launch) {
    bool on_atom = false;
    for (const Atom& a : mu.atoms()) on_atom = on_atom || a.location == x0;
    if (on_atom || !(t_top > 0.0)) continue;
    const double t_break = 1.0 / dyson::detail::s_sum(mu, x0);
    const auto curve = trace_characteristic(mu, x0, std::min(t_top, t_break));
    for (const auto& [s, x] : curve.samples) lines.row(x0, s, x);
  }
  lines.close();

  log << "wrote " << rows << " edge rows over " << ts.size() << " times\n";
  nlohmann::json summary{{"command", "support"}, {"times", ts.size()}, {"edge_rows", rows}};
  write_json(dir / "summary.json", summary);
  return summary;
}

}  // namespace dyson::cli
