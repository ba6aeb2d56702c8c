#pragma once

#include <cstdint>
#include <string>

namespace parweight {

/// Batch front-end configuration. Identical config + seed produces a
/// byte-identical report.
struct RunConfig {
  std::string command;  // classify | maximal | factorize | construct | bmo

  std::string grid_path;   // --grid CSV input
  std::string synthetic;   // --synthetic generator name
  std::string out_path;    // --out JSON report path (CSV siblings derive from it)

  double p = 2.0;
  double q = 2.0;
  double gamma = 0.25;

  int scale_count = 3;     // --scales
  double stride = 0.5;     // --stride
  double tol = 1e-8;       // --tol
  double delta = 0.5;      // --delta (reverse Hoelder / CR exponent)
  std::uint64_t seed = 1;  // --seed
  bool oracle = false;     // --oracle: force naive summation paths
  int threads = 0;         // --threads (0: PARWEIGHT_THREADS or hardware)

  std::string direction = "+";  // maximal / measure direction

  // construct command
  std::string op = "supersolution";  // supersolution | maximal-measure |
                                     // cr-weight | cr-bmo | representation
  std::string measure_path;          // --measure (mu)
  std::string measure_nu_path;       // --measure-nu
  std::string kind = "increasing-time";  // supersolution kind
  double rate = 1.0;
  double alpha = 0.5;
  double beta = 0.5;

  // Grid used when synthesizing (n = 1).
  int cells = 128;
  int time_cells = 128;
  double spatial_lo = 0.0, spatial_hi = 1.0;
  double time_lo = 0.0, time_hi = 1.0;
};

/// Validates the config, runs the command and writes the report.
/// Returns 0; failures throw parweight::Error carrying the exit code.
int run_command(const RunConfig& cfg);

/// Full argv front end (flag parsing + error-to-exit-code mapping).
int cli_main(int argc, char** argv);

}  // namespace parweight
