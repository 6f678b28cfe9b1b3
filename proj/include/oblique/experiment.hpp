#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "oblique/combiner.hpp"
#include "oblique/config.hpp"
#include "oblique/diffusion.hpp"
#include "oblique/graph.hpp"
#include "oblique/kernels.hpp"
#include "oblique/projector.hpp"

namespace oblique {

/// Seed streams of derive_seed(cfg.seed, stream, index). Scenario and data
/// randomness never share a stream.
enum SeedStream : std::uint64_t { kGraphStream = 1, kScenarioStream = 2, kDataStream = 3 };

/// Everything fixed across Monte Carlo runs.
struct Scenario {
  Graph graph;
  Matrix w_small;  ///< nodes x signal_rank, orthonormal columns
  Matrix z_small;  ///< nodes x interference_rank, unit-norm columns
  SubspaceModel model;  ///< W = w_small (x) I_block, Z likewise
  ObliqueProjector proj;
  std::shared_ptr<const MseNetworkCost> cost;
  CombinationMatrix a;  ///< designed against E_WZ
  CombinationMatrix c;  ///< designed against P_D
};

/// Throws Infeasible when either combiner cannot be designed on the graph.
Scenario build_scenario(const ExperimentConfig& cfg);

/// Network MSD (1/N) E|W^o - w_i|^2 of one strategy.
/// `msd[0]` is the value at w_{-1} = 0; `msd[i + 1]` follows iteration i.
struct MsdCurve {
  std::string label;
  std::string fingerprint;
  std::vector<double> msd;  ///< linear scale

  std::vector<double> db() const;
};

/// Linear-scale MSD of every configured strategy for Monte Carlo run `run`.
/// Strategies sharing the diffusion y-recursion (diffusion, multihop,
/// orthogonal-only) are driven by one recursion; centralized has its own. All
/// of them consume the same gradient samples.
std::vector<std::vector<double>> simulate_run(const Scenario& sc, const ExperimentConfig& cfg, Index run);

/// Averages simulate_run over cfg.runs. Parallel runs are reduced in run order,
/// so both executions give identical curves.
std::vector<MsdCurve> run_experiment(const Scenario& sc, const ExperimentConfig& cfg,
                                     Execution exec = Execution::Parallel);
std::vector<MsdCurve> run_experiment(const ExperimentConfig& cfg, Execution exec = Execution::Parallel);

/// Mean of the last cfg.steady_fraction of a curve's iterations, linear scale.
double steady_state_msd(const MsdCurve& curve, double fraction);

double to_db(double linear);

/// CSV `iter,<label>...` with one row per curve point (iter from -1), dB
/// values at 6 significant digits. `echo_path` receives echo_config(cfg).
void write_curves(const std::vector<MsdCurve>& curves, const std::filesystem::path& csv_path,
                  const std::filesystem::path& echo_path, const ExperimentConfig& cfg);
/// Reads a curves CSV back; values are dB.
std::vector<std::pair<std::string, std::vector<double>>> read_curves(const std::filesystem::path& csv_path);

void write_design_report(const Scenario& sc, const ExperimentConfig& cfg, const std::filesystem::path& path);

}  // namespace oblique
