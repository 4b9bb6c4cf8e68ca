// indilab — closed-loop flight-control study runner.
//
// Subcommands:
//   run      simulate one scenario, write log.csv / log.json / metrics.json
//   compare  run two scenarios that differ only in the controller and check
//            their command trajectories against a tolerance
//   gainmap  print and export the velocity-form PI(D) gains equivalent to a
//            scenario's incremental-inversion settings
//   sweep    tde (sample-time halving) or mismatch (drift distortion) studies
//
// Configs are JSON files or preset names resolved against --preset-dir,
// the INDILAB_PRESET_DIR environment variable, or ./presets. --set overrides
// individual keys, e.g. --set controller.kp=[60] --set noise.seed=9.

#include <iostream>

#include <CLI11.hpp>

#include "indilab/cli.hpp"

namespace {

void add_common(CLI::App* cmd, indilab::cli::CommonOptions& opt,
                bool config_required = true) {
  cmd->add_option("-c,--config", opt.config,
                  "config file path or preset name")
      ->required(config_required);
  cmd->add_option("-s,--set", opt.overrides,
                  "override a config key: dotted.path=value (repeatable)");
  cmd->add_option("--preset-dir", opt.preset_dir,
                  "preset directory (default: $INDILAB_PRESET_DIR or ./presets)");
  cmd->add_option("-o,--out", opt.out_dir,
                  "output directory (default: $INDILAB_OUT_DIR or ./out, "
                  "plus the scenario name)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop studies of incremental flight-control laws"};
  app.require_subcommand(1);

  indilab::cli::CommonOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "simulate one scenario");
  add_common(run, run_opt);

  indilab::cli::CompareOptions cmp_opt;
  CLI::App* cmp = app.add_subcommand(
      "compare", "check two controllers against each other");
  cmp->add_option("-a,--config-a", cmp_opt.a.config, "first config or preset")
      ->required();
  cmp->add_option("-b,--config-b", cmp_opt.b.config, "second config or preset")
      ->required();
  cmp->add_option("--set-a", cmp_opt.a.overrides, "override for the first config");
  cmp->add_option("--set-b", cmp_opt.b.overrides, "override for the second config");
  cmp->add_option("--preset-dir", cmp_opt.a.preset_dir, "preset directory");
  cmp->add_option("--tolerance", cmp_opt.tolerance,
                  "max allowed command deviation (default 1e-10)");
  cmp->add_option("-o,--out", cmp_opt.out_dir, "output directory");

  indilab::cli::CommonOptions gm_opt;
  CLI::App* gm = app.add_subcommand(
      "gainmap", "export the PI(D) gains equivalent to a scenario");
  add_common(gm, gm_opt);

  indilab::cli::SweepOptions sw_opt;
  CLI::App* sw = app.add_subcommand("sweep", "parameter sweeps");
  add_common(sw, sw_opt.base);
  sw->add_option("-k,--kind", sw_opt.kind, "tde or mismatch")->required();
  sw->add_option("--ts", sw_opt.ts_list, "sample times for a tde sweep");
  sw->add_option("--scale-f", sw_opt.scale_f_list,
                 "drift distortion factors for a mismatch sweep");
  sw->add_option("--laws", sw_opt.laws,
                 "laws for a mismatch sweep (default ndi indi_gbar pi)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return indilab::cli::cmd_run(run_opt);
    if (*cmp) {
      cmp_opt.b.preset_dir = cmp_opt.a.preset_dir;
      return indilab::cli::cmd_compare(cmp_opt);
    }
    if (*gm) return indilab::cli::cmd_gainmap(gm_opt);
    if (*sw) return indilab::cli::cmd_sweep(sw_opt);
  } catch (const indilab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const indilab::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 2;
  } catch (const indilab::SimulationError& e) {
    std::cerr << "simulation error at t=" << e.t << ": " << e.what() << "\n";
    return 3;
  } catch (const indilab::InversionError& e) {
    std::cerr << "inversion error (condition " << e.condition << "): "
              << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
