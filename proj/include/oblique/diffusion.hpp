#pragma once

#include <string>
#include <vector>

#include "oblique/combiner.hpp"
#include "oblique/kernels.hpp"
#include "oblique/projector.hpp"
#include "oblique/random.hpp"

namespace oblique {

/// Per-agent vector sizes M_k and their offsets in the stacked network vector.
class BlockLayout {
 public:
  explicit BlockLayout(std::vector<Index> dims);
  static BlockLayout uniform(Index nodes, Index m) { return BlockLayout(std::vector<Index>(static_cast<std::size_t>(nodes), m)); }

  Index nodes() const { return static_cast<Index>(dims_.size()); }
  Index total() const { return offsets_.back(); }
  Index dim(Index k) const { return dims_[static_cast<std::size_t>(k)]; }
  Index offset(Index k) const { return offsets_[static_cast<std::size_t>(k)]; }
  const std::vector<Index>& dims() const { return dims_; }

 private:
  std::vector<Index> dims_;
  std::vector<Index> offsets_;
};

/// Sum of per-agent costs J_k(y_k) = E Q_k(y_k; zeta_k) seen through
/// stochastic gradients of freshly drawn samples.
class NetworkCost {
 public:
  virtual ~NetworkCost() = default;
  virtual const BlockLayout& layout() const = 0;
  /// Exact gradient of J_k at y_k.
  virtual Vector true_gradient(Index k, const Vector& y_k) const = 0;
  /// Draws one sample for agent k and returns the gradient of Q_k at y_k.
  virtual Vector sample_gradient(Index k, const Vector& y_k, Rng& rng) const = 0;
  /// Stacked minimizer y^o = w^o + z^o.
  virtual const Vector& optimum() const = 0;
};

/// J_k(y_k) = 1/2 E |d_k(i) - u_{k,i}^T y_k|^2 with d_k(i) = u_{k,i}^T y^o_k + v_k(i),
/// u_{k,i} ~ N(0, sigma_u_k^2 I) and v_k(i) ~ N(0, sigma_v_k^2), independent over
/// agents and time.
class MseNetworkCost final : public NetworkCost {
 public:
  struct Sample {
    double d = 0.0;
    Vector u;
  };

  MseNetworkCost(BlockLayout layout, Vector sigma_u2, Vector sigma_v2, Vector w_opt, Vector z_opt);

  const BlockLayout& layout() const override { return layout_; }
  Vector true_gradient(Index k, const Vector& y_k) const override;
  Vector sample_gradient(Index k, const Vector& y_k, Rng& rng) const override;
  const Vector& optimum() const override { return y_opt_; }

  Sample draw(Index k, Rng& rng) const;
  /// -u (d - u^T y_k)
  Vector gradient(Index k, const Vector& y_k, const Sample& sample) const;

  const Vector& w_opt() const { return w_opt_; }
  const Vector& z_opt() const { return z_opt_; }
  const Vector& sigma_u2() const { return sigma_u2_; }
  const Vector& sigma_v2() const { return sigma_v2_; }

 private:
  void check_agent(Index k, const Vector& y_k) const;

  BlockLayout layout_;
  Vector sigma_u2_;
  Vector sigma_v2_;
  Vector w_opt_;
  Vector z_opt_;
  Vector y_opt_;
};

/// Stacked per-agent iterates psi, y and w.
struct NetworkState {
  Vector psi;
  Vector y;
  Vector w;
  Index iteration = 0;  ///< completed iterations

  /// y_{-1} = w_{-1} = 0.
  static NetworkState zeros(Index total) {
    return {Vector::Zero(total), Vector::Zero(total), Vector::Zero(total), 0};
  }
};

/// A certified combination matrix in neighbor-local form. Construction
/// throws NotCertified, so holding one proves the certificate passed.
class LocalCombiner {
 public:
  LocalCombiner(const CombinationMatrix& m, const std::string& role);

  const NeighborOperator& op() const { return op_; }
  const Matrix& target() const { return target_; }
  double factor() const { return factor_; }

 private:
  NeighborOperator op_;
  Matrix target_;
  double factor_ = 0.0;
};

struct StepOptions {
  Execution exec = Execution::Serial;
  /// Skip the w recursion (psi and y do not depend on it).
  bool update_w = true;
  /// Records neighbor reads of the combination sweeps (serial only).
  AccessLog* log = nullptr;
};

/// psi_k = y_k - mu * stochastic gradient, agents visited in order.
void adaptation_step(NetworkState& state, const NetworkCost& cost, double mu, Rng& rng);

/// psi = y - mu grad;  y = P_D psi;  w = E_WZ y.
void centralized_step(NetworkState& state, const NetworkCost& cost, const ObliqueProjector& proj, double mu, Rng& rng);

/// One-step penalty recursion y <- y - mu g - mu eta P_Z^perp (I - E_WZ) y
/// for a given stacked gradient g.
void penalty_step(NetworkState& state, const Vector& gradient, const ObliqueProjector& proj, double mu, double eta);
/// Same recursion with a freshly sampled stochastic gradient.
void penalty_step(NetworkState& state, const NetworkCost& cost, const ObliqueProjector& proj, double mu, double eta,
                  Rng& rng);
/// Split form: psi = y - mu g, then y = psi - mu eta P_Z^perp (I - E_WZ) psi
/// (penalty applied to the fresh intermediate estimate).
void incremental_penalty_step(NetworkState& state, const Vector& gradient, const ObliqueProjector& proj, double mu,
                              double eta);

/// psi_k = y_k - mu grad_k;  y_k = sum_l C_kl psi_l;
/// w_k = sum_l A_kl ((1 - nu) w_l + nu y_l).
void oblique_diffusion_step(NetworkState& state, const NetworkCost& cost, const LocalCombiner& c,
                            const LocalCombiner& a, double mu, double nu, Rng& rng, const StepOptions& opts = {});

/// psi_k = y_k - mu grad_k;  y_k = sum_l C_kl psi_l.  Leaves w untouched.
void orthogonal_diffusion_step(NetworkState& state, const NetworkCost& cost, const LocalCombiner& c, double mu,
                               Rng& rng, const StepOptions& opts = {});

/// w^(0) = y;  w^(s) = A w^(s-1), s = 1..hops;  w = w^(hops).
void multi_hop_step(NetworkState& state, const LocalCombiner& a, Index hops, const StepOptions& opts = {});

/// nu A (I - (1 - nu) A)^-1, the mean-limit map of the smoothing recursion.
/// Throws Singular when I - (1 - nu) A is numerically singular.
Matrix smoothing_operator(const Matrix& a, double nu);

}  // namespace oblique
