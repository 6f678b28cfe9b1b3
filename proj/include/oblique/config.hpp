#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "oblique/common.hpp"

namespace oblique {

enum class StrategyKind { Centralized, Diffusion, MultiHop, OrthogonalOnly };

struct Strategy {
  StrategyKind kind = StrategyKind::Diffusion;
  Index hops = 0;  ///< MultiHop only

  /// `centralized`, `diffusion`, `multihop:S`, `orthogonal-only`.
  std::string label() const;
  static Strategy parse(const std::string& text);

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

/// Settings of one network MSD experiment. `W = orth(randn(nodes, signal_rank))
/// (x) I_block`, likewise for Z; coefficients N(coef_mean 1, I); per-agent
/// variances uniform on the given ranges.
struct ExperimentConfig {
  std::string preset = "desk";
  Index nodes = 20;
  Index block = 3;
  double edge_prob = 0.5;
  Index signal_rank = 2;
  Index interference_rank = 1;
  double mu = 0.005;
  double nu = 0.005;
  /// Step size of the centralized run, tuned to a similar convergence rate.
  double mu_centralized = 0.0018;
  double eps = 0.001;
  Index runs = 50;
  Index iterations = 3000;
  std::uint64_t seed = 20210607;
  std::vector<Strategy> strategies{{StrategyKind::Centralized, 0}, {StrategyKind::Diffusion, 0},
                                   {StrategyKind::MultiHop, 1},    {StrategyKind::MultiHop, 5},
                                   {StrategyKind::MultiHop, 10},   {StrategyKind::OrthogonalOnly, 0}};
  double coef_mean = 0.1;
  double sigma_u2_min = 1.0;
  double sigma_u2_max = 4.0;
  double sigma_v2_min = 0.1;
  double sigma_v2_max = 0.4;
  /// Fraction of the trailing iterations averaged for steady-state values.
  double steady_fraction = 0.2;

  /// Throws InvalidParam on out-of-range values.
  void validate() const;
};

/// `desk` or `paper`.
ExperimentConfig preset_config(const std::string& name);

/// Applies `key = value` lines (with `#` comments) on top of `base`. A
/// `preset` key, if present, must come first and resets the base.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Every key in a fixed order, doubles in round-trip form; parse_config of
/// the result reproduces the config exactly.
std::string echo_config(const ExperimentConfig& cfg);

/// FNV-1a hash of echo_config, as 16 hex digits.
std::string fingerprint(const ExperimentConfig& cfg);

}  // namespace oblique
