#pragma once

#include <optional>

#include "oblique/common.hpp"

namespace oblique {

/// Orthonormal basis of range(B) via Householder QR, with the sign of each
/// column chosen so that the triangular factor has a positive diagonal.
/// An already orthonormal B is returned unchanged (to rounding).
/// Throws RankDeficient when sigma_min(B) <= tol.rank_rel * sigma_max(B).
Matrix orthonormalize(const Matrix& b, const Tolerances& tol = {});

/// Signal subspace range(W) and interference subspace range(Z) in R^n.
///
/// Both bases are stored orthonormal; inputs that are not orthonormal are
/// orthonormalized on ingestion. The signal basis exactly as supplied is kept
/// so coefficients can be reported in it (see input_basis_coefficients).
/// L = 0 (no interference) is allowed; P must be at least 1.
class SubspaceModel {
 public:
  static SubspaceModel from_bases(const Matrix& w, const Matrix& z, const Tolerances& tol = {});
  /// Model without interference (L = 0).
  static SubspaceModel signal_only(const Matrix& w, const Tolerances& tol = {});

  Index dim() const { return w_.rows(); }
  Index signal_rank() const { return w_.cols(); }
  Index interference_rank() const { return z_.cols(); }

  const Matrix& w() const { return w_; }
  const Matrix& z() const { return z_; }
  const Matrix& w_input() const { return w_input_; }
  /// [W Z]
  Matrix composite() const;

 private:
  SubspaceModel(Matrix w, Matrix z, Matrix w_input)
      : w_(std::move(w)), z_(std::move(z)), w_input_(std::move(w_input)) {}

  Matrix w_;
  Matrix z_;
  Matrix w_input_;
};

/// The oblique projector onto range(W) along range(Z) together with the
/// orthogonal projectors it is built from.
struct ObliqueProjector {
  Matrix e_wz;  ///< projects onto range(W) along range(Z)
  Matrix e_zw;  ///< projects onto range(Z) along range(W)
  Matrix p_w;
  Matrix p_z;
  Matrix p_d;   ///< orthogonal projector onto range([W Z])
  Matrix x;     ///< Z^T P_W^perp Z, L x L
  Index signal_rank = 0;
  /// Spectral-norm gap between the two closed forms of E_WZ
  /// (P_W (I - Z X^-1 Z^T P_W^perp) and W (W^T P_Z^perp W)^-1 W^T P_Z^perp).
  double construction_gap = 0.0;

  Index dim() const { return e_wz.rows(); }
  /// Orthogonal projector onto the complement of range([W Z]).
  Matrix p_u() const { return Matrix::Identity(dim(), dim()) - p_d; }
};

/// Throws IllConditioned when X or W^T P_Z^perp W has condition number above
/// tol.max_condition, i.e. when the two subspaces nearly overlap.
ObliqueProjector oblique_projector(const SubspaceModel& model, const Tolerances& tol = {});

struct Decomposition {
  Vector w;  ///< E_WZ y
  Vector z;  ///< E_ZW y
  Vector u;  ///< (I - P_D) y
};

/// y = w + z + u with w in range(W), z in range(Z), u orthogonal to both.
Decomposition decompose(const Vector& y, const ObliqueProjector& proj);

struct LeastSquaresFit {
  Vector x_w;  ///< coefficients in the orthonormal signal basis
  Vector x_z;
  Vector w_o;  ///< W x_w
};

/// Solves min ||y - [W Z] x|| through the normal equations. Independent of
/// the projector formulas, so it serves as their oracle.
LeastSquaresFit least_squares_oracle(const Vector& y, const SubspaceModel& model,
                                     const Tolerances& tol = {});

/// Coefficients of a vector of range(W) in the signal basis the caller
/// originally supplied (least squares in that basis).
Vector input_basis_coefficients(const SubspaceModel& model, const Vector& w);

}  // namespace oblique
