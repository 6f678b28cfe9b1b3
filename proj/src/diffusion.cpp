#include "oblique/diffusion.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/LU>

namespace oblique {

BlockLayout::BlockLayout(std::vector<Index> dims) : dims_(std::move(dims)) {
  require(!dims_.empty(), ErrorCode::InvalidParam, "layout needs at least one agent");
  for (Index d : dims_) require(d >= 1, ErrorCode::InvalidParam, "agent dimensions must be >= 1");
  offsets_.assign(dims_.size() + 1, 0);
  std::partial_sum(dims_.begin(), dims_.end(), offsets_.begin() + 1);
}

MseNetworkCost::MseNetworkCost(BlockLayout layout, Vector sigma_u2, Vector sigma_v2, Vector w_opt, Vector z_opt)
    : layout_(std::move(layout)),
      sigma_u2_(std::move(sigma_u2)),
      sigma_v2_(std::move(sigma_v2)),
      w_opt_(std::move(w_opt)),
      z_opt_(std::move(z_opt)) {
  require(sigma_u2_.size() == layout_.nodes() && sigma_v2_.size() == layout_.nodes(), ErrorCode::DimensionMismatch,
          "one regressor and one noise variance per agent");
  require(w_opt_.size() == layout_.total() && z_opt_.size() == layout_.total(), ErrorCode::DimensionMismatch,
          "true models must match the layout");
  require((sigma_u2_.array() > 0.0).all() && (sigma_v2_.array() >= 0.0).all(), ErrorCode::InvalidParam,
          "variances must be positive");
  y_opt_ = w_opt_ + z_opt_;
}

void MseNetworkCost::check_agent(Index k, const Vector& y_k) const {
  require(k >= 0 && k < layout_.nodes(), ErrorCode::InvalidParam, "agent index out of range");
  require(y_k.size() == layout_.dim(k), ErrorCode::DimensionMismatch, "agent vector has the wrong length");
}

MseNetworkCost::Sample MseNetworkCost::draw(Index k, Rng& rng) const {
  const double su = std::sqrt(sigma_u2_(k));
  Sample s;
  s.u = su * standard_normal(layout_.dim(k), rng);
  std::normal_distribution<double> noise(0.0, std::sqrt(sigma_v2_(k)));
  s.d = s.u.dot(y_opt_.segment(layout_.offset(k), layout_.dim(k))) + noise(rng);
  return s;
}

Vector MseNetworkCost::gradient(Index k, const Vector& y_k, const Sample& sample) const {
  check_agent(k, y_k);
  require(sample.u.size() == y_k.size(), ErrorCode::DimensionMismatch, "regressor has the wrong length");
  return -sample.u * (sample.d - sample.u.dot(y_k));
}

Vector MseNetworkCost::true_gradient(Index k, const Vector& y_k) const {
  check_agent(k, y_k);
  return sigma_u2_(k) * (y_k - y_opt_.segment(layout_.offset(k), layout_.dim(k)));
}

Vector MseNetworkCost::sample_gradient(Index k, const Vector& y_k, Rng& rng) const {
  return gradient(k, y_k, draw(k, rng));
}

namespace {

const Matrix& certified_matrix(const CombinationMatrix& m, const std::string& role) {
  m.require_certified(role);
  return m.matrix();
}

}  // namespace

LocalCombiner::LocalCombiner(const CombinationMatrix& m, const std::string& role)
    : op_(certified_matrix(m, role), m.mask()), target_(m.target()), factor_(m.report().objective) {}

void adaptation_step(NetworkState& state, const NetworkCost& cost, double mu, Rng& rng) {
  const BlockLayout& layout = cost.layout();
  require(state.y.size() == layout.total(), ErrorCode::DimensionMismatch, "state does not match the cost layout");
  state.psi.resize(layout.total());
  for (Index k = 0; k < layout.nodes(); ++k) {
    const Index off = layout.offset(k);
    const Index m = layout.dim(k);
    const Vector y_k = state.y.segment(off, m);
    state.psi.segment(off, m) = y_k - mu * cost.sample_gradient(k, y_k, rng);
  }
}

void centralized_step(NetworkState& state, const NetworkCost& cost, const ObliqueProjector& proj, double mu,
                      Rng& rng) {
  require(proj.dim() == cost.layout().total(), ErrorCode::DimensionMismatch, "projector does not match the layout");
  adaptation_step(state, cost, mu, rng);
  state.y.noalias() = proj.p_d * state.psi;
  state.w.noalias() = proj.e_wz * state.y;
  ++state.iteration;
}

namespace {

// P_Z^perp (I - E_WZ) x
Vector penalty_direction(const ObliqueProjector& proj, const Vector& x) {
  const Vector r = x - proj.e_wz * x;
  return r - proj.p_z * r;
}

}  // namespace

void penalty_step(NetworkState& state, const Vector& gradient, const ObliqueProjector& proj, double mu, double eta) {
  require(eta >= 0.0, ErrorCode::InvalidParam, "eta must be nonnegative");
  require(gradient.size() == state.y.size() && proj.dim() == state.y.size(), ErrorCode::DimensionMismatch,
          "gradient, state and projector sizes differ");
  state.y = state.y - mu * gradient - mu * eta * penalty_direction(proj, state.y);
  ++state.iteration;
}

void penalty_step(NetworkState& state, const NetworkCost& cost, const ObliqueProjector& proj, double mu, double eta,
                  Rng& rng) {
  const BlockLayout& layout = cost.layout();
  Vector gradient(layout.total());
  for (Index k = 0; k < layout.nodes(); ++k)
    gradient.segment(layout.offset(k), layout.dim(k)) =
        cost.sample_gradient(k, state.y.segment(layout.offset(k), layout.dim(k)), rng);
  penalty_step(state, gradient, proj, mu, eta);
}

void incremental_penalty_step(NetworkState& state, const Vector& gradient, const ObliqueProjector& proj, double mu,
                              double eta) {
  require(gradient.size() == state.y.size() && proj.dim() == state.y.size(), ErrorCode::DimensionMismatch,
          "gradient, state and projector sizes differ");
  state.psi = state.y - mu * gradient;
  state.y = state.psi - mu * eta * penalty_direction(proj, state.psi);
  ++state.iteration;
}

void oblique_diffusion_step(NetworkState& state, const NetworkCost& cost, const LocalCombiner& c,
                            const LocalCombiner& a, double mu, double nu, Rng& rng, const StepOptions& opts) {
  require(c.op().dim() == cost.layout().total() && a.op().dim() == cost.layout().total(),
          ErrorCode::DimensionMismatch, "combiners do not match the layout");
  adaptation_step(state, cost, mu, rng);
  if (opts.log)
    c.op().apply_serial(state.psi, state.y, opts.log);
  else
    c.op().apply(state.psi, state.y, opts.exec);
  if (opts.update_w) {
    const Vector mixed = (1.0 - nu) * state.w + nu * state.y;
    if (opts.log)
      a.op().apply_serial(mixed, state.w, opts.log);
    else
      a.op().apply(mixed, state.w, opts.exec);
  }
  ++state.iteration;
}

void orthogonal_diffusion_step(NetworkState& state, const NetworkCost& cost, const LocalCombiner& c, double mu,
                               Rng& rng, const StepOptions& opts) {
  require(c.op().dim() == cost.layout().total(), ErrorCode::DimensionMismatch, "combiner does not match the layout");
  adaptation_step(state, cost, mu, rng);
  if (opts.log)
    c.op().apply_serial(state.psi, state.y, opts.log);
  else
    c.op().apply(state.psi, state.y, opts.exec);
  ++state.iteration;
}

void multi_hop_step(NetworkState& state, const LocalCombiner& a, Index hops, const StepOptions& opts) {
  require(hops >= 1, ErrorCode::InvalidParam, "hop count must be >= 1");
  require(a.op().dim() == state.y.size(), ErrorCode::DimensionMismatch, "combiner does not match the state");
  Vector current = state.y;
  Vector next;
  for (Index s = 0; s < hops; ++s) {
    if (opts.log)
      a.op().apply_serial(current, next, opts.log);
    else
      a.op().apply(current, next, opts.exec);
    current.swap(next);
  }
  state.w = std::move(current);
}

Matrix smoothing_operator(const Matrix& a, double nu) {
  require(a.rows() == a.cols(), ErrorCode::DimensionMismatch, "smoothing operator needs a square matrix");
  require(nu > 0.0 && nu <= 1.0, ErrorCode::InvalidParam, "nu must lie in (0, 1]");
  const Index n = a.rows();
  const Matrix lhs = Matrix::Identity(n, n) - (1.0 - nu) * a;
  Eigen::PartialPivLU<Matrix> lu(lhs);
  if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::Singular, "I - (1 - nu) A is numerically singular");
  // A commutes with (I - (1 - nu) A)^-1
  return nu * lu.solve(a);
}

}  // namespace oblique
