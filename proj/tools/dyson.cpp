// dyson: particle simulations, analytic densities, support curves and the
// verification suite for the hydrodynamic limit of the Dyson model.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input,
// 3 numerical failure, 4 I/O failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dyson/cli/commands.hpp"
#include "dyson/cli/config.hpp"
#include "dyson/cli/verify.hpp"

namespace {

enum Exit { ok = 0, verification_failed = 1, invalid_input = 2, numerical = 3, io = 4 };

using namespace dyson;
using namespace dyson::cli;

RunConfig base_config(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyson-model hydrodynamic limit: simulation, analytics, verification"};
  app.require_subcommand(1);

  std::string config_path, output, measure, times, grid, t_range, suite, mutation;
  std::optional<std::uint64_t> seed;
  std::optional<double> green_eps;

  auto* sim = app.add_subcommand("simulate", "run the particle system, write trajectories and histograms");
  sim->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "override sim.seed");
  sim->add_option("--output", output, "override output_dir");

  auto* dens = app.add_subcommand("density", "write analytic density profiles");
  dens->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  dens->add_option("--measure", measure, "one_source | two_source:a=A | atoms:FILE");
  dens->add_option("--times", times, "comma-separated times");
  dens->add_option("--grid", grid, "MIN:MAX:N");
  dens->add_option("--green-eps", green_eps, "also dump G(t, x + i*EPS)");
  dens->add_option("--output", output, "override output_dir");

  auto* supp = app.add_subcommand("support", "write support edges and characteristics over time");
  supp->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  supp->add_option("--measure", measure, "one_source | two_source:a=A | atoms:FILE");
  supp->add_option("--t-range", t_range, "MIN:MAX:STEPS");
  supp->add_option("--output", output, "override output_dir");

  auto* ver = app.add_subcommand("verify", "run the verification suite, print a JSON report");
  ver->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  ver->add_option("--suite", suite, "default | all | group | check name");
  ver->add_option("--mutation", mutation, "none | hilbert_sign | one_source_branch");
  ver->add_option("--output", output, "also write the report to this file");

  auto* cmp = app.add_subcommand("compare", "particle histogram against the analytic density");
  cmp->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  cmp->add_option("--seed", seed, "override sim.seed");
  cmp->add_option("--output", output, "override output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::invalid_input;
  }

  try {
    RunConfig cfg = base_config(config_path);
    if (seed) cfg.sim.seed = *seed;
    if (!measure.empty()) {
      cfg.measure = MeasureSpec::parse(measure);
      if (cfg.measure.kind == "atoms") {
        cfg.measure.atoms = MeasureSpec::load_atoms(cfg.measure.atoms_file);
        cfg.measure.atoms_file.clear();
      }
    }
    if (!times.empty()) cfg.times = parse_list(times, "--times");
    if (!grid.empty()) cfg.grid = parse_grid(grid);
    if (green_eps) cfg.green_eps = *green_eps;
    if (!t_range.empty()) {
      const Grid r = parse_grid(t_range, "--t-range");
      cfg.support.t_min = r.x_min;
      cfg.support.t_max = r.x_max;
      cfg.support.steps = r.n;
    }
    if (!suite.empty()) cfg.suite = suite;
    if (!mutation.empty()) cfg.mutation = mutation;

    if (*sim) {
      if (!output.empty()) cfg.output_dir = output;
      cmd_simulate(cfg, std::cout);
    } else if (*dens) {
      if (!output.empty()) cfg.output_dir = output;
      cmd_density(cfg, std::cout);
    } else if (*supp) {
      if (!output.empty()) cfg.output_dir = output;
      cmd_support(cfg, std::cout);
    } else if (*cmp) {
      if (!output.empty()) cfg.output_dir = output;
      cmd_compare(cfg, std::cout);
    } else if (*ver) {
      const auto report = cmd_verify(cfg, std::cerr);
      std::cout << report.dump(2) << "\n";
      if (!output.empty()) write_json(output, report);
      return report["passed"].get<bool>() ? Exit::ok : Exit::verification_failed;
    }
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return Exit::invalid_input;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return Exit::io;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return Exit::io;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return Exit::numerical;
  }
  return Exit::ok;
}
