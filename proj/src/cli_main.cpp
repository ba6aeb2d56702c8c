#include <CLI11.hpp>
#include <iostream>

#include "parweight/cli.hpp"
#include "parweight/error.hpp"

namespace parweight {

int cli_main(int argc, char** argv) {
  CLI::App app{"parweight: parabolic Muckenhoupt weight toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* cmd) {
    cmd->add_option("--grid", cfg.grid_path, "input grid CSV");
    cmd->add_option("--synthetic", cfg.synthetic,
                    "built-in generator (one, exp-t, exp-neg-t, log-smooth, rough, "
                    "indicator, heat-kernel)");
    cmd->add_option("--out", cfg.out_path, "output JSON report path")->required();
    cmd->add_option("--p", cfg.p, "anisotropy exponent p > 1");
    cmd->add_option("--q", cfg.q, "integrability index q > 1");
    cmd->add_option("--gamma", cfg.gamma, "time lag in [0,1)");
    cmd->add_option("--scales", cfg.scale_count, "dyadic scale count");
    cmd->add_option("--stride", cfg.stride, "family stride factor in (0,1]");
    cmd->add_option("--tol", cfg.tol, "series / report tolerance");
    cmd->add_option("--seed", cfg.seed, "seed for synthetic generators");
    cmd->add_flag("--oracle", cfg.oracle, "force naive summation paths");
    cmd->add_option("--threads", cfg.threads,
                    "parallelism degree (0: PARWEIGHT_THREADS or hardware)");
    cmd->add_option("--cells", cfg.cells, "synthetic grid: spatial cells");
    cmd->add_option("--time-cells", cfg.time_cells, "synthetic grid: time cells");
    cmd->add_option("--spatial-lo", cfg.spatial_lo, "synthetic grid: spatial low");
    cmd->add_option("--spatial-hi", cfg.spatial_hi, "synthetic grid: spatial high");
    cmd->add_option("--time-lo", cfg.time_lo, "synthetic grid: time low");
    cmd->add_option("--time-hi", cfg.time_hi, "synthetic grid: time high");
  };

  CLI::App* classify = app.add_subcommand("classify", "estimate weight-class constants");
  add_common(classify);

  CLI::App* maximal = app.add_subcommand("maximal", "evaluate a lagged maximal operator");
  add_common(maximal);
  maximal->add_option("--direction", cfg.direction, "+ (forward) or - (backward)");

  CLI::App* factorize = app.add_subcommand("factorize", "Rubio de Francia factorization");
  add_common(factorize);

  CLI::App* construct = app.add_subcommand("construct", "weight / BMO constructions");
  add_common(construct);
  construct->add_option("--op", cfg.op,
                        "supersolution | maximal-measure | cr-weight | representation");
  construct->add_option("--measure", cfg.measure_path, "measure spec JSON");
  construct->add_option("--measure-nu", cfg.measure_nu_path, "second measure spec JSON");
  construct->add_option("--kind", cfg.kind, "supersolution kind");
  construct->add_option("--rate", cfg.rate, "increasing-time rate");
  construct->add_option("--delta", cfg.delta, "CR weight exponent");
  construct->add_option("--alpha", cfg.alpha, "cr-bmo alpha");
  construct->add_option("--beta", cfg.beta, "cr-bmo beta");
  construct->add_option("--direction", cfg.direction, "+ or - for maximal-measure");

  CLI::App* bmo = app.add_subcommand("bmo", "parabolic BMO seminorm");
  add_common(bmo);

  CLI::App* classify_delta = classify;  // --delta shared by classify reports
  classify_delta->add_option("--delta", cfg.delta, "reverse Hoelder exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    return run_command(cfg);
  } catch (const Error& e) {
    std::cerr << "parweight: error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "parweight: unexpected failure: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace parweight
