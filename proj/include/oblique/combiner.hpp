#pragma once

#include <optional>
#include <string>

#include "oblique/common.hpp"
#include "oblique/graph.hpp"

namespace oblique {

/// ||A - E||_2, the worst-case one-step contraction of the error of
/// w_i = A w_{i-1} towards E w_{-1}.
double per_step_factor(const Matrix& a, const Matrix& e);

/// max |lambda_i(m)|.
double spectral_radius(const Matrix& m);

/// Smallest eigenvalue of [[s I, A - E], [(A - E)^T, s I]]. It is >= 0 exactly
/// when s >= ||A - E||_2 (Schur complement of the diagonal block).
double spectral_norm_lmi_min_eigenvalue(const Matrix& a, const Matrix& e, double s);

/// Diagnostics for a candidate combination matrix A against target E:
///   A E = E,  E A = E,  rho(A - E) < 1,  A zero outside the mask.
struct DesignReport {
  bool valid = true;  ///< false when the inputs had inconsistent sizes
  double objective = 0.0;        ///< ||A - E||_2
  double residual_right = 0.0;   ///< ||A E - E||_2
  double residual_left = 0.0;    ///< ||E A - E||_2
  double rho = 0.0;              ///< rho(A - E)
  double spectral_margin = 0.0;  ///< 1 - rho
  Index mask_violations = 0;
  /// ||A W - W||_2 and ||(W^T E) A - W^T E||_2, when a signal basis was given.
  std::optional<double> right_eigvec_residual;
  std::optional<double> left_eigvec_residual;
  double tolerance = 0.0;
  bool passed = false;
  // solver bookkeeping (zero for plain checks)
  Index iterations = 0;
  bool converged = false;
  std::string method;
};

/// Never throws; inconsistent sizes yield a report with valid == false.
DesignReport check_conditions(const Matrix& a, const Matrix& e, const SupportMask& mask, double tol,
                              const Matrix* signal_basis = nullptr);

/// Human-readable `key = value` rendering of a report.
std::string to_text(const DesignReport& report);

/// A matrix together with the target projector and mask it was checked
/// against. Algorithms consuming combiners refuse uncertified ones.
class CombinationMatrix {
 public:
  /// Runs check_conditions; the result is certified iff the report passed.
  static CombinationMatrix certify(Matrix a, Matrix target, SupportMask mask, double tol = 1e-6);

  const Matrix& matrix() const { return a_; }
  const Matrix& target() const { return target_; }
  const SupportMask& mask() const { return mask_; }
  const DesignReport& report() const { return report_; }
  DesignReport& report() { return report_; }
  bool certified() const { return report_.passed; }

  /// Throws NotCertified naming `role` unless certified.
  void require_certified(const std::string& role) const;

 private:
  CombinationMatrix(Matrix a, Matrix target, SupportMask mask, DesignReport report)
      : a_(std::move(a)), target_(std::move(target)), mask_(std::move(mask)), report_(std::move(report)) {}

  Matrix a_;
  Matrix target_;
  SupportMask mask_;
  DesignReport report_;
};

/// The affine set {A : A zero off the mask, A E = E, E A = E} in the
/// coordinates of the allowed entries (column-major order).
///
/// With E = U_r S_r V_r^T, the constraints are equivalent to A U_r = U_r and
/// V_r^T A = V_r^T; they are assembled into one linear system whose SVD gives
/// the minimum-norm particular solution and the projector onto its row space.
class AffineSet {
 public:
  /// Throws Infeasible when the system has no solution.
  AffineSet(const Matrix& e, const SupportMask& mask, double feasibility_tol = 1e-9);

  Index free_count() const { return static_cast<Index>(rows_.size()); }
  Index dim() const { return n_; }

  Vector gather(const Matrix& a) const;
  /// Dense matrix with exact zeros outside the mask.
  Matrix scatter(const Vector& x) const;

  /// Euclidean projection onto the affine set.
  Vector project(const Vector& x) const;
  /// Projection onto the parallel linear subspace (tangent directions).
  Vector project_direction(const Vector& d) const;

 private:
  Index n_ = 0;
  std::vector<Index> rows_;
  std::vector<Index> cols_;
  Matrix row_space_;    ///< orthonormal basis of the constraint row space, free_count x rank
  Vector particular_;   ///< minimum-norm solution
};

/// Frobenius projection of A0 onto {mask, A E = E, E A = E}.
Matrix project_affine(const Matrix& a0, const Matrix& e, const SupportMask& mask);

enum class DesignMethod {
  /// Projected subgradient on ||A - E||_2 with diminishing steps s0 / sqrt(t).
  Subgradient,
  /// Projected L-BFGS on the log-sum-exp smoothing of the singular values,
  /// with a decreasing smoothing temperature.
  SmoothedLbfgs,
};

struct DesignOptions {
  DesignMethod method = DesignMethod::SmoothedLbfgs;
  /// Iteration cap for the subgradient method (and per smoothing stage).
  Index max_iterations = 5000;
  double step0 = 1.0;
  /// Stop when the best objective improves by less than stall_tol over
  /// stall_window iterations.
  Index stall_window = 100;
  double stall_tol = 1e-6;
  /// Smoothing temperatures run in order by SmoothedLbfgs.
  std::vector<double> temperatures{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5};
  Index lbfgs_memory = 12;
  /// Residual bound for certification of the returned matrix.
  double feasibility_tol = 1e-6;
  /// Design E_small (x) I_m targets on the N x N node mask and expand.
  bool kronecker_shortcut = true;
};

/// Finds a mask-supported A with A E = E, E A = E minimizing ||A - E||_2 and
/// returns the best iterate. Throws Infeasible when no iterate reaches
/// ||A - E||_2 <= 1 - eps, InvalidParam when E is not idempotent or eps is
/// outside (0, 1).
CombinationMatrix design_combiner(const Matrix& e, const SupportMask& mask, double eps = 0.001,
                                  const DesignOptions& opts = {});

}  // namespace oblique
