#include "oblique/projector.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace oblique {

namespace {

void require_full_rank(const Matrix& b, const Tolerances& tol, const char* what) {
  if (b.cols() == 0) return;
  Eigen::JacobiSVD<Matrix> svd(b);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smax > 0.0) || smin <= tol.rank_rel * smax)
    throw Error(ErrorCode::RankDeficient,
                std::string(what) + ": smallest singular value " + std::to_string(smin) +
                    " vs largest " + std::to_string(smax));
}

// Cholesky factor of an SPD Gram matrix after a condition-number check.
Eigen::LLT<Matrix> factor_gram(const Matrix& g, const Tolerances& tol, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  // Gram matrices of orthonormal bases have eigenvalues of order 1 at most;
  // for X and W^T P_Z^perp W they are sin^2 of the principal angles, so the
  // unit floor turns hi / lo into a measure of subspace overlap.
  const double lo = ev(0);
  const double hi = std::max(ev(ev.size() - 1), 1.0);
  if (!(lo > 0.0) || hi / lo > tol.max_condition)
    throw Error(ErrorCode::IllConditioned,
                std::string(what) + " condition number " + std::to_string(lo > 0 ? hi / lo : INFINITY));
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::IllConditioned, std::string(what) + " not SPD");
  return llt;
}

}  // namespace

Matrix orthonormalize(const Matrix& b, const Tolerances& tol) {
  if (b.cols() == 0) return Matrix(b.rows(), 0);
  require(b.cols() <= b.rows(), ErrorCode::RankDeficient, "more columns than rows");
  require_full_rank(b, tol, "orthonormalize");
  Eigen::HouseholderQR<Matrix> qr(b);
  Matrix q = qr.householderQ() * Matrix::Identity(b.rows(), b.cols());
  const Matrix& r = qr.matrixQR();
  for (Index c = 0; c < b.cols(); ++c)
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  return q;
}

SubspaceModel SubspaceModel::from_bases(const Matrix& w, const Matrix& z, const Tolerances& tol) {
  require(w.cols() >= 1, ErrorCode::InvalidParam, "signal basis needs at least one column");
  require(z.rows() == w.rows(), ErrorCode::DimensionMismatch, "W and Z must have the same number of rows");
  require(w.cols() + z.cols() <= w.rows(), ErrorCode::RankDeficient, "P + L exceeds the ambient dimension");
  Matrix wq = orthonormalize(w, tol);
  Matrix zq = orthonormalize(z, tol);
  Matrix d(w.rows(), w.cols() + z.cols());
  d << wq, zq;
  require_full_rank(d, tol, "[W Z]");
  return SubspaceModel(std::move(wq), std::move(zq), w);
}

SubspaceModel SubspaceModel::signal_only(const Matrix& w, const Tolerances& tol) {
  return from_bases(w, Matrix(w.rows(), 0), tol);
}

Matrix SubspaceModel::composite() const {
  Matrix d(dim(), signal_rank() + interference_rank());
  d << w_, z_;
  return d;
}

ObliqueProjector oblique_projector(const SubspaceModel& model, const Tolerances& tol) {
  const Index n = model.dim();
  const Matrix& w = model.w();
  const Matrix& z = model.z();
  const Matrix eye = Matrix::Identity(n, n);

  ObliqueProjector out;
  out.signal_rank = model.signal_rank();
  out.p_w = w * w.transpose();
  out.p_z = z * z.transpose();
  const Matrix pw_perp = eye - out.p_w;
  const Matrix pz_perp = eye - out.p_z;

  if (z.cols() == 0) {
    out.x = Matrix(0, 0);
    out.e_zw = Matrix::Zero(n, n);
    out.e_wz = out.p_w;
  } else {
    out.x = z.transpose() * pw_perp * z;
    auto llt = factor_gram(out.x, tol, "Z^T P_W^perp Z");
    // E_ZW = Z X^-1 Z^T P_W^perp; E_WZ = P_W (I - E_ZW)
    out.e_zw = z * llt.solve(z.transpose() * pw_perp);
    out.e_wz = out.p_w * (eye - out.e_zw);
  }

  // W (W^T P_Z^perp W)^-1 W^T P_Z^perp
  const Matrix gw = w.transpose() * pz_perp * w;
  auto llt_w = factor_gram(gw, tol, "W^T P_Z^perp W");
  const Matrix alt = w * llt_w.solve(w.transpose() * pz_perp);
  out.construction_gap = spectral_norm(out.e_wz - alt);

  const Matrix q = orthonormalize(model.composite(), tol);
  out.p_d = q * q.transpose();
  return out;
}

Decomposition decompose(const Vector& y, const ObliqueProjector& proj) {
  require(y.size() == proj.dim(), ErrorCode::DimensionMismatch, "vector length differs from projector size");
  Decomposition d;
  d.w = proj.e_wz * y;
  d.z = proj.e_zw * y;
  d.u = y - proj.p_d * y;
  return d;
}

LeastSquaresFit least_squares_oracle(const Vector& y, const SubspaceModel& model, const Tolerances& tol) {
  require(y.size() == model.dim(), ErrorCode::DimensionMismatch, "vector length differs from model dimension");
  const Matrix d = model.composite();
  auto llt = factor_gram(d.transpose() * d, tol, "D^T D");
  const Vector x = llt.solve(d.transpose() * y);
  LeastSquaresFit fit;
  fit.x_w = x.head(model.signal_rank());
  fit.x_z = x.tail(model.interference_rank());
  fit.w_o = model.w() * fit.x_w;
  return fit;
}

Vector input_basis_coefficients(const SubspaceModel& model, const Vector& w) {
  require(w.size() == model.dim(), ErrorCode::DimensionMismatch, "vector length differs from model dimension");
  return model.w_input().colPivHouseholderQr().solve(w);
}

}  // namespace oblique
