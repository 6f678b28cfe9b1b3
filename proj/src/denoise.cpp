#include "oblique/denoise.hpp"

#include <cmath>
#include <fstream>

#include "oblique/matrix_io.hpp"
#include "oblique/random.hpp"

namespace oblique {

StaticObservation generate_static(const SubspaceModel& model, double sigma_v, std::uint64_t seed,
                                  const StaticOptions& opts) {
  require(sigma_v >= 0.0, ErrorCode::InvalidParam, "sigma_v must be nonnegative");
  Rng rng(seed);
  StaticObservation obs;
  obs.x_w = (opts.coef_std * standard_normal(model.signal_rank(), rng)).array() + opts.coef_mean;
  obs.x_z = (opts.coef_std * standard_normal(model.interference_rank(), rng)).array() + opts.coef_mean;
  if (opts.zero_interference) obs.x_z.setZero();
  obs.v = sigma_v * standard_normal(model.dim(), rng);
  obs.w_true = model.w() * obs.x_w;
  obs.z_true = model.z() * obs.x_z;
  obs.y = obs.w_true + obs.z_true + obs.v;
  return obs;
}

Vector centralized_denoise(const StaticObservation& obs, const SubspaceModel& model) {
  return oblique_projector(model).e_wz * obs.y;
}

std::vector<double> DenoiseTrajectory::error_norms() const {
  std::vector<double> out;
  out.reserve(iterates.size());
  for (const Vector& w : iterates) out.push_back((w - target).norm());
  return out;
}

std::vector<double> DenoiseTrajectory::bounds() const {
  std::vector<double> out;
  out.reserve(iterates.size());
  const double e0 = (iterates.front() - target).norm();
  for (std::size_t i = 0; i < iterates.size(); ++i) out.push_back(std::pow(factor, static_cast<double>(i)) * e0);
  return out;
}

DenoiseTrajectory distributed_denoise(const StaticObservation& obs, const CombinationMatrix& a, Index iters,
                                      Execution exec, AccessLog* log) {
  a.require_certified("denoising");
  require(iters >= 0, ErrorCode::InvalidParam, "iteration count must be nonnegative");
  require(obs.y.size() == a.matrix().rows(), ErrorCode::DimensionMismatch, "observation length differs from A");

  const NeighborOperator op(a.matrix(), a.mask());
  DenoiseTrajectory traj;
  traj.target = a.target() * obs.y;
  traj.factor = a.report().objective;
  traj.iterates.reserve(static_cast<std::size_t>(iters + 1));
  traj.iterates.push_back(obs.y);
  Vector next;
  for (Index i = 0; i < iters; ++i) {
    if (log)
      op.apply_serial(traj.iterates.back(), next, log);
    else
      op.apply(traj.iterates.back(), next, exec);
    traj.iterates.push_back(next);
  }
  return traj;
}

void write_denoise_csv(const std::filesystem::path& path, const DenoiseTrajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "iter,err_norm,bound\n";
  const auto err = traj.error_norms();
  const auto bound = traj.bounds();
  for (std::size_t i = 0; i < err.size(); ++i)
    out << static_cast<long long>(i) - 1 << ',' << format_double(err[i]) << ',' << format_double(bound[i]) << '\n';
}

}  // namespace oblique
