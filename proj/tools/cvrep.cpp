#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvrep/sweep.hpp"

namespace {

using namespace cvrep;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::string> format;
  std::optional<double> start, stop, step;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool range) {
  cmd->add_option("--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "override as section.key=value (repeatable)");
  cmd->add_option("--out", c.out, "output path (default stdout)");
  if (range) {
    cmd->add_option("--start", c.start, "first distance in km");
    cmd->add_option("--stop", c.stop, "last distance in km");
    cmd->add_option("--step", c.step, "distance step in km");
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  }
}

SweepSpec build(const Common& c) {
  SweepSpec spec = c.config.empty() ? SweepSpec{} : load_config(c.config);
  if (c.start) spec.start_km = *c.start;
  if (c.stop) spec.stop_km = *c.stop;
  if (c.step) spec.step_km = *c.step;
  if (c.format) set_option(spec, "sweep.format", *c.format);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    set_option(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (spec.preset != Preset::custom) {
    const SweepSpec defaults;
    if (spec.source_efficiency != defaults.source_efficiency ||
        spec.detector_efficiency != defaults.detector_efficiency || spec.dark_click != defaults.dark_click) {
      throw ConfigError("devices.* overrides need sweep.preset=custom");
    }
  }
  spec.validate();
  return spec;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class F>
void emit(const std::string& path, F write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  write(f);
}

void do_sweep(const Common& c) {
  const SweepSpec spec = build(c);
  const auto rows = run_sweep(spec, c.threads);
  emit(c.out, [&](std::ostream& os) {
    if (spec.format == OutputFormat::json) {
      write_json(os, spec, rows);
    } else {
      write_csv(os, rows);
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-scissor repeater simulator"};
  app.require_subcommand(1);

  Common sweep_opt, chain_opt, opt_opt, bounds_opt;
  std::optional<std::string> mode, preset;
  auto* sweep = app.add_subcommand("sweep", "key rate and state figures of merit versus distance");
  add_common(sweep, sweep_opt, true);
  sweep->add_option("--mode", mode, "single-repeater | direct | chain | geof | purity");
  sweep->add_option("--preset", preset, "ideal | realistic | custom");
  sweep->add_option("--format", sweep_opt.format, "csv | json");

  std::optional<std::string> chain_preset;
  auto* chain = app.add_subcommand("chain", "three-repeater chain sweep");
  add_common(chain, chain_opt, true);
  chain->add_option("--preset", chain_preset, "ideal | realistic | custom");
  chain->add_option("--format", chain_opt.format, "csv | json");

  std::optional<double> distance;
  std::optional<std::string> chis, tbs, splits;
  auto* optimize = app.add_subcommand("optimize", "grid search over chi, T_B and split at one distance");
  add_common(optimize, opt_opt, false);
  optimize->add_option("--distance", distance, "distance in km");
  optimize->add_option("--chi", chis, "comma-separated chi values");
  optimize->add_option("--tb", tbs, "comma-separated T_B values");
  optimize->add_option("--split", splits, "comma-separated split fractions");

  std::optional<std::string> links;
  auto* bounds = app.add_subcommand("bounds", "repeater bounds -log2(1 - eta^(1/N))");
  add_common(bounds, bounds_opt, true);
  bounds->add_option("--links", links, "comma-separated link counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      if (mode) sweep_opt.sets.insert(sweep_opt.sets.begin(), "sweep.mode=" + *mode);
      if (preset) sweep_opt.sets.insert(sweep_opt.sets.begin(), "sweep.preset=" + *preset);
      do_sweep(sweep_opt);
    } else if (*chain) {
      if (chain_preset) chain_opt.sets.insert(chain_opt.sets.begin(), "sweep.preset=" + *chain_preset);
      chain_opt.sets.insert(chain_opt.sets.begin(), "sweep.mode=chain");
      do_sweep(chain_opt);
    } else if (*optimize) {
      if (distance) opt_opt.sets.push_back("optimize.distance_km=" + num(*distance));
      if (chis) opt_opt.sets.push_back("optimize.chi=" + *chis);
      if (tbs) opt_opt.sets.push_back("optimize.t_b=" + *tbs);
      if (splits) opt_opt.sets.push_back("optimize.split=" + *splits);
      const SweepSpec spec = build(opt_opt);
      const OptimizeResult res = optimize_grid(spec);
      emit(opt_opt.out, [&](std::ostream& os) { write_grid_csv(os, res); });
      if (res.best) {
        std::cerr << "best: chi=" << res.best->chi << " T_B=" << res.best->t_b << " split=" << res.best->split
                  << " K=" << res.best->k << " P=" << res.best->P << "\n";
      } else {
        std::cerr << "no grid point yields a positive key at " << spec.optimize_km << " km\n";
      }
    } else if (*bounds) {
      if (links) bounds_opt.sets.push_back("bounds.links=" + *links);
      const SweepSpec spec = build(bounds_opt);
      emit(bounds_opt.out, [&](std::ostream& os) { write_bounds_csv(os, spec); });
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
