#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <nlohmann/json.hpp>

#include "dyson/characteristics.hpp"
#include "dyson/cli/commands.hpp"
#include "dyson/hilbert.hpp"
#include "dyson/particle_sim.hpp"
#include "dyson/spectral.hpp"

namespace dyson::cli {

// Defects that the suite must be able to detect.
enum class Mutation { none, hilbert_sign, one_source_branch };

inline Mutation parse_mutation(const std::string& s) {
  if (s == "none" || s.empty()) return Mutation::none;
  if (s == "hilbert_sign") return Mutation::hilbert_sign;
  if (s == "one_source_branch") return Mutation::one_source_branch;
  throw ValidationError("mutation", "unknown mutation '" + s + "'");
}

struct CheckResult {
  std::string name;
  std::string group;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

struct CheckContext {
  Mutation mutation = Mutation::none;

  HilbertOptions hilbert() const {
    HilbertOptions o;
    if (mutation == Mutation::hilbert_sign) o.gamma = -1.0;
    return o;
  }
  OneSourceBranch branch() const {
    return mutation == Mutation::one_source_branch ? OneSourceBranch::plus : OneSourceBranch::minus;
  }
};

struct Check {
  std::string name;
  std::string group;
  double tolerance;
  std::function<double(const CheckContext&)> run;
};

namespace detail {

inline std::vector<ComplexPoint> random_upper_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> re(-4.0, 4.0), lg(-3.0, 1.0);
  std::vector<ComplexPoint> pts;
  for (std::size_t k = 0; k < n; ++k) pts.push_back(ComplexPoint::upper(re(rng), std::pow(10.0, lg(rng))));
  return pts;
}

inline AtomicMeasure three_atoms() {
  return AtomicMeasure({{-1.5, 0.2}, {0.3, 0.5}, {2.0, 0.3}});
}

inline double one_source_quadratic(const CheckContext& ctx) {
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double t = 0.05 + 3.95 * i / 99.0;
    for (int k = 0; k < 100; ++k) {
      const auto z = ComplexPoint::upper(-5.0 + 10.0 * k / 99.0, 1e-3 * std::pow(10.0, 4.0 * k / 99.0));
      worst = std::max(worst, one_source_residual(t, z, green_one_source(t, z, ctx.branch())));
    }
  }
  return worst;
}

inline double one_source_density(const CheckContext& ctx) {
  const GreenFn g = [&](double t, const ComplexPoint& z) { return green_one_source(t, z, ctx.branch()); };
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double x = -1.999 + 3.998 * (k + 0.5) / 1000.0;
    const double rho = density_from_green(g, 1.0, x);
    worst = std::max(worst, std::abs(rho - semicircle_density(1.0, x)));
  }
  return worst;
}

inline double one_source_herglotz(const CheckContext& ctx) {
  // Largest Im G on the upper half-plane sample; a Stieltjes transform has Im G < 0.
  double worst = -1.0;
  for (const auto& z : random_upper_points(200, 7))
    worst = std::max(worst, green_one_source(1.0, z, ctx.branch()).imag());
  return std::max(worst, 0.0);
}

inline double one_source_edges(const CheckContext&) {
  double worst = 0.0;
  for (double t : {0.1, 1.0, 4.0}) {
    const SupportSet s = support(AtomicMeasure::one_source(), t);
    if (s.intervals.size() != 1) return 1.0;
    worst = std::max({worst, std::abs(s.intervals[0].lo + 2.0 * std::sqrt(t)),
                      std::abs(s.intervals[0].hi - 2.0 * std::sqrt(t))});
  }
  return worst;
}

inline double two_source_cubic(const CheckContext&) {
  double worst = 0.0;
  for (double t : {0.25, 0.5, 1.0, 1.5, 2.0})
    for (const auto& z : random_upper_points(100, 11))
      worst = std::max(worst, two_source_residual(t, z, 1.0, green_two_source(t, z, 1.0)));
  return worst;
}

inline double two_source_scaling(const CheckContext&) {
  double worst = 0.0;
  for (double tau : {0.3, 1.0, 2.5})
    for (const auto& w : random_upper_points(40, 13)) {
      const cplx ref = green_two_source(tau, w, 1.0);
      for (double a : {0.5, 1.0, 2.0, 5.0}) {
        const cplx g = a * green_two_source(a * a * tau, ComplexPoint::upper(a * w.re, a * w.im), a);
        worst = std::max(worst, std::abs(g - ref));
      }
    }
  return worst;
}

inline double two_source_mass(const CheckContext&) {
  boost::math::quadrature::tanh_sinh<double> ts;
  double worst = 0.0;
  for (double t : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    const SupportSet s = support(AtomicMeasure::two_source(1.0), t);
    std::vector<double> knots;
    for (const auto& iv : s.intervals) {
      knots.push_back(iv.lo);
      knots.push_back(iv.hi);
    }
    knots.insert(knots.end(), s.interior_critical.begin(), s.interior_critical.end());
    std::sort(knots.begin(), knots.end());
    double mass = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      if (!s.contains(0.5 * (knots[k] + knots[k + 1]))) continue;
      mass += ts.integrate([t](double x) { return two_source_density(t, x, 1.0); }, knots[k],
                           knots[k + 1]);
    }
    worst = std::max(worst, std::abs(mass - 1.0));
  }
  return worst;
}

inline double merge_point(const CheckContext&) {
  const auto [bp, bm] = b_plus_minus(1.0);
  const SupportSet s = support(AtomicMeasure::two_source(1.0), 1.0);
  const double edge = 1.5 * std::sqrt(3.0);
  double e = std::max({std::abs(bp - 6.75), std::abs(bm), std::abs(std::sqrt(bp) - edge)});
  if (s.intervals.size() != 1) return 1.0;
  return std::max({e, std::abs(s.intervals[0].hi - edge), std::abs(s.intervals[0].lo + edge)});
}

inline double merge_asymptotics(const CheckContext&) {
  double worst = 0.0;
  for (double x : {1e-4, 1e-5}) {
    const double lead = std::sqrt(3.0) * std::cbrt(x) / (2.0 * std::numbers::pi);
    worst = std::max(worst, std::abs(two_source_density(1.0, x, 1.0) / lead - 1.0));
  }
  return worst;
}

inline double density_at_merge(const CheckContext&) {
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double x = -2.7 + 5.4 * (k + 0.5) / 1000.0;
    worst = std::max(worst, std::abs(density_t1(x) - two_source_density(1.0, x, 1.0)));
  }
  return worst;
}

inline double functional_equation(const CheckContext&) {
  const AtomicMeasure ms[] = {AtomicMeasure::one_source(), AtomicMeasure::two_source(1.0),
                              three_atoms()};
  double worst = 0.0;
  std::uint64_t seed = 17;
  for (const auto& mu : ms)
    for (const auto& z : random_upper_points(500, seed++))
      worst = std::max(worst, functional_residual(mu, 1.0, z, green_functional(mu, 1.0, z)));
  return worst;
}

inline double functional_vs_closed(const CheckContext& ctx) {
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0})
    for (const auto& z : random_upper_points(100, 23)) {
      worst = std::max(worst, std::abs(green_functional(AtomicMeasure::one_source(), t, z) -
                                       green_one_source(t, z, ctx.branch())));
      worst = std::max(worst, std::abs(green_functional(AtomicMeasure::two_source(1.0), t, z) -
                                       green_two_source(t, z, 1.0)));
    }
  return worst;
}

inline double support_vs_b(const CheckContext&) {
  double worst = 0.0;
  for (double t : {0.25, 0.5, 0.9, 1.0, 1.5, 2.0}) {
    const auto [bp, bm] = b_plus_minus(t);
    const SupportSet s = support(AtomicMeasure::two_source(1.0), t);
    std::vector<double> want = t < 1.0 ? std::vector<double>{-std::sqrt(bp), -std::sqrt(bm),
                                                             std::sqrt(bm), std::sqrt(bp)}
                                       : std::vector<double>{-std::sqrt(bp), std::sqrt(bp)};
    const auto got = s.edges();
    if (got.size() != want.size()) return 1.0;
    for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
  }
  return worst;
}

inline double constancy(const CheckContext&) {
  const AtomicMeasure mu = three_atoms();
  const GreenFn g = [&mu](double s, const ComplexPoint& z) { return green_functional(mu, s, z); };
  double worst = 0.0;
  for (double x0 : {-4.0, -2.6, 3.1, 4.5}) worst = std::max(worst, verify_constancy(mu, 0.5, x0, g));
  return worst;
}

// Counts grid points where support, injective image and density disagree,
// plus support-interval pieces whose midpoint density is not positive.
inline double complementarity(const CheckContext&) {
  double bad = 0.0;
  const MeasureSpec specs[] = {MeasureSpec{}, MeasureSpec::parse("two_source:a=1")};
  for (const auto& spec : specs) {
    const AtomicMeasure mu = spec.build();
    const AnalyticProfile prof(spec);
    for (double t : {0.5, 1.0, 2.0}) {
      const SupportSet s = support(mu, t);
      const double L = prof.outer_edge(t) + 1.0;
      const Grid grid{-L, L, 2000};
      bad += static_cast<double>(complementarity_violations(mu, t, grid).size());
      for (double x : grid.points())
        if (!s.contains(x) && prof.density(t, x) >= 1e-9) bad += 1.0;
      std::vector<double> cuts = s.edges();
      cuts.insert(cuts.end(), s.interior_critical.begin(), s.interior_critical.end());
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double m = 0.5 * (cuts[k] + cuts[k + 1]);
        if (s.contains(m) && !(prof.density(t, m) > 1e-6)) bad += 1.0;
      }
    }
  }
  return bad;
}

inline SampledFunction gaussian(double shift) {
  return SampledFunction::sample({-20.0, 20.0, 1u << 14},
                                 [shift](double x) { return std::exp(-(x - shift) * (x - shift)); });
}

inline double hilbert_inverse(const CheckContext& ctx) { return check_inverse(gaussian(0.0), ctx.hilbert()); }

inline double hilbert_derivative(const CheckContext& ctx) {
  return check_derivative_commutation(gaussian(0.0), ctx.hilbert());
}

inline double hilbert_product(const CheckContext& ctx) {
  return std::max(check_product_identity(gaussian(0.0), ctx.hilbert()),
                  check_product_identity(gaussian(0.0), gaussian(1.3), ctx.hilbert()));
}

inline double hilbert_vs_pv(const CheckContext& ctx) {
  auto lorentz = [](double y) { return 1.0 / (1.0 + y * y); };
  const PeriodicGrid g{-200.0, 200.0, 1u << 14};
  const auto h = hilbert_spectral(SampledFunction::sample(g, lorentz), ctx.hilbert());
  double worst = 0.0;
  for (std::size_t j = 0; j < g.n; j += 16) {
    if (std::abs(g[j]) > 10.0) continue;
    const double pv = hilbert_pv(lorentz, g[j], std::numeric_limits<double>::infinity());
    worst = std::max(worst, std::abs(h.values[j] - pv));
  }
  return worst;
}

inline double plemelj(const CheckContext& ctx) {
  const PeriodicGrid g{-4.0, 4.0, 1u << 13};
  const auto h = hilbert_spectral(
      SampledFunction::sample(g, [](double x) { return semicircle_density(1.0, x); }), ctx.hilbert());
  double worst = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    if (std::abs(g[j]) > 1.8) continue;
    const double ref = green_one_source(1.0, ComplexPoint::boundary(g[j])).real() / std::numbers::pi;
    worst = std::max(worst, std::abs(h.values[j] - ref));
  }
  return worst;
}

inline double continuity(const CheckContext& ctx, const MeasureSpec& spec, double t,
                         const PeriodicGrid& grid) {
  const AnalyticProfile prof(spec);
  const SupportSet s = support(spec.build(), t);
  std::vector<double> edges = s.edges();
  edges.insert(edges.end(), s.interior_critical.begin(), s.interior_critical.end());
  ResidualOptions opt;
  opt.hilbert = ctx.hilbert();
  return continuity_residual([&prof](double tt, double x) { return prof.density(tt, x); }, t, grid,
                             edges, opt)
      .norm_l2;
}

inline double semicircle_law(const CheckContext&) {
  RunConfig cfg;
  cfg.sim = {1000, 2.0, 1e-3, 1, 1.0};
  const SimRun run = run_particles(cfg);
  return ks_distance(run.states.back(), [](double x) { return semicircle_cdf(1.0, x); });
}

}  // namespace detail

inline std::vector<Check> all_checks() {
  using namespace detail;
  const MeasureSpec one{}, two = MeasureSpec::parse("two_source:a=1");
  return {
      {"one_source_quadratic", "spectral", 1e-12, one_source_quadratic},
      {"one_source_density", "spectral", 1e-8, one_source_density},
      {"one_source_herglotz", "spectral", 0.0, one_source_herglotz},
      {"two_source_cubic", "spectral", 1e-10, two_source_cubic},
      {"two_source_scaling", "spectral", 1e-12, two_source_scaling},
      {"two_source_mass", "spectral", 1e-6, two_source_mass},
      {"merge_asymptotics", "spectral", 0.02, merge_asymptotics},
      {"density_t1", "spectral", 1e-10, density_at_merge},
      {"functional_equation", "spectral", 1e-10, functional_equation},
      {"functional_vs_closed", "spectral", 1e-10, functional_vs_closed},
      {"one_source_edges", "characteristics", 1e-12, one_source_edges},
      {"merge_point", "characteristics", 1e-12, merge_point},
      {"support_vs_b", "characteristics", 1e-10, support_vs_b},
      {"constancy", "characteristics", 1e-8, constancy},
      {"complementarity", "characteristics", 0.0, complementarity},
      {"hilbert_inverse", "hilbert", 1e-8, hilbert_inverse},
      {"hilbert_derivative", "hilbert", 1e-8, hilbert_derivative},
      {"hilbert_product", "hilbert", 1e-7, hilbert_product},
      {"hilbert_vs_pv", "hilbert", 1e-6, hilbert_vs_pv},
      {"plemelj", "hilbert", 2e-3, plemelj},
      {"continuity_one_source_t1", "continuity", 5e-3,
       [one](const CheckContext& c) { return continuity(c, one, 1.0, {-4.0, 4.0, 1u << 13}); }},
      {"continuity_two_source_t0.5", "continuity", 5e-3,
       [two](const CheckContext& c) { return continuity(c, two, 0.5, {-5.0, 5.0, 1u << 13}); }},
      {"continuity_two_source_t2", "continuity", 5e-3,
       [two](const CheckContext& c) { return continuity(c, two, 2.0, {-5.0, 5.0, 1u << 13}); }},
      {"semicircle_law", "particles", 0.05, semicircle_law},
  };
}

// default: everything but the particle runs; all; a group; or one check.
inline std::vector<Check> select_checks(const std::string& suite) {
  const auto checks = all_checks();
  std::vector<Check> out;
  for (const auto& c : checks)
    if (suite == "all" || (suite == "default" && c.group != "particles") || suite == c.group ||
        suite == c.name)
      out.push_back(c);
  if (out.empty()) throw ValidationError("suite", "no check or group named '" + suite + "'");
  return out;
}

inline CheckResult run_check(const Check& c, const CheckContext& ctx) {
  CheckResult r{c.name, c.group, 0.0, c.tolerance, false, ""};
  try {
    r.measured = c.run(ctx);
    r.passed = r.measured <= c.tolerance;
  } catch (const std::exception& e) {
    r.measured = std::numeric_limits<double>::infinity();
    r.note = e.what();
  }
  return r;
}

inline nlohmann::json cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const CheckContext ctx{parse_mutation(cfg.mutation)};
  nlohmann::json report{{"suite", cfg.suite}, {"mutation", cfg.mutation},
                        {"checks", nlohmann::json::array()}, {"failures", nlohmann::json::array()}};
  bool ok = true;
  for (const auto& c : select_checks(cfg.suite)) {
    const CheckResult r = run_check(c, ctx);
    nlohmann::json j{{"name", r.name}, {"group", r.group}, {"tolerance", r.tolerance},
                     {"passed", r.passed}};
    // JSON has no infinity; a thrown check reports null plus its message.
    if (std::isfinite(r.measured)) j["measured"] = r.measured;
    else j["measured"] = nullptr;
    if (!r.note.empty()) j["error"] = r.note;
    report["checks"].push_back(j);
    if (!r.passed) {
      ok = false;
      report["failures"].push_back(r.name);
    }
    log << (r.passed ? "ok   " : "FAIL ") << r.name << " " << format_double(r.measured)
        << " (tol " << format_double(r.tolerance) << ")\n";
  }
  report["passed"] = ok;
  return report;
}

}  // namespace dyson::cli
