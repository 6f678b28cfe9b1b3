#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "oblique/combiner.hpp"
#include "oblique/kernels.hpp"
#include "oblique/projector.hpp"

namespace oblique {

/// y = W x_w + Z x_z + v.
struct StaticObservation {
  Vector y;
  Vector x_w;
  Vector x_z;
  Vector w_true;
  Vector z_true;
  Vector v;
};

struct StaticOptions {
  /// Coefficients are drawn i.i.d. N(coef_mean, coef_std^2).
  double coef_mean = 0.0;
  double coef_std = 1.0;
  /// Force x_z = 0 (no interference).
  bool zero_interference = false;
};

/// Deterministic in `seed`; v is i.i.d. N(0, sigma_v^2).
StaticObservation generate_static(const SubspaceModel& model, double sigma_v, std::uint64_t seed,
                                  const StaticOptions& opts = {});

/// w_o = E_WZ y.
Vector centralized_denoise(const StaticObservation& obs, const SubspaceModel& model);

/// Iterates of w_i = A w_{i-1} started from w_{-1} = y.
struct DenoiseTrajectory {
  std::vector<Vector> iterates;  ///< iterates[i + 1] holds w_i, i >= -1
  Vector target;                 ///< w_o = E y
  double factor = 0.0;           ///< ||A - E||_2

  Index iterations() const { return static_cast<Index>(iterates.size()) - 1; }
  /// ||w_i - w_o|| for i = -1, 0, ...
  std::vector<double> error_norms() const;
  /// factor^(i+1) ||y - w_o|| for i = -1, 0, ...
  std::vector<double> bounds() const;
};

/// Runs the neighbor recursion for `iters` rounds. Each round is
/// bulk-synchronous: every node reads round i-1 values of its neighbors only.
/// Throws NotCertified for an uncertified combiner.
DenoiseTrajectory distributed_denoise(const StaticObservation& obs, const CombinationMatrix& a, Index iters,
                                      Execution exec = Execution::Serial, AccessLog* log = nullptr);

/// CSV with header `iter,err_norm,bound`, one row per iterate (iter from -1).
void write_denoise_csv(const std::filesystem::path& path, const DenoiseTrajectory& traj);

}  // namespace oblique
