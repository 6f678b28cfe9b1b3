#include "oblique/combiner.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "oblique/matrix_io.hpp"

namespace oblique {

double per_step_factor(const Matrix& a, const Matrix& e) {
  require(a.rows() == e.rows() && a.cols() == e.cols(), ErrorCode::DimensionMismatch,
          "A and E must have the same shape");
  return spectral_norm(a - e);
}

double spectral_radius(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, "spectral radius needs a square matrix");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(m, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm_lmi_min_eigenvalue(const Matrix& a, const Matrix& e, double s) {
  const Index n = a.rows();
  Matrix block(2 * n, 2 * n);
  const Matrix x = a - e;
  block << s * Matrix::Identity(n, n), x, x.transpose(), s * Matrix::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(block, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

DesignReport check_conditions(const Matrix& a, const Matrix& e, const SupportMask& mask, double tol,
                              const Matrix* signal_basis) {
  DesignReport r;
  r.tolerance = tol;
  r.method = "check";
  const Index n = e.rows();
  if (e.cols() != n || a.rows() != n || a.cols() != n || mask.dim() != n ||
      (signal_basis && signal_basis->rows() != n)) {
    r.valid = false;
    r.objective = r.residual_right = r.residual_left = r.rho = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  const Matrix diff = a - e;
  r.objective = spectral_norm(diff);
  r.residual_right = spectral_norm(a * e - e);
  r.residual_left = spectral_norm(e * a - e);
  r.rho = spectral_radius(diff);
  r.spectral_margin = 1.0 - r.rho;
  r.mask_violations = mask.violations(a);
  if (signal_basis) {
    const Matrix& w = *signal_basis;
    r.right_eigvec_residual = spectral_norm(a * w - w);
    const Matrix left = w.transpose() * e;
    r.left_eigvec_residual = spectral_norm(left * a - left);
  }
  r.passed = r.residual_right <= tol && r.residual_left <= tol && r.mask_violations == 0 && r.rho < 1.0;
  return r;
}

std::string to_text(const DesignReport& r) {
  std::ostringstream out;
  out << "valid = " << (r.valid ? "true" : "false") << '\n'
      << "passed = " << (r.passed ? "true" : "false") << '\n'
      << "method = " << r.method << '\n'
      << "objective = " << format_double(r.objective) << '\n'
      << "residual_right = " << format_double(r.residual_right) << '\n'
      << "residual_left = " << format_double(r.residual_left) << '\n'
      << "rho = " << format_double(r.rho) << '\n'
      << "spectral_margin = " << format_double(r.spectral_margin) << '\n'
      << "mask_violations = " << r.mask_violations << '\n';
  if (r.right_eigvec_residual) out << "right_eigvec_residual = " << format_double(*r.right_eigvec_residual) << '\n';
  if (r.left_eigvec_residual) out << "left_eigvec_residual = " << format_double(*r.left_eigvec_residual) << '\n';
  out << "tolerance = " << format_double(r.tolerance) << '\n'
      << "iterations = " << r.iterations << '\n'
      << "converged = " << (r.converged ? "true" : "false") << '\n';
  return out.str();
}

CombinationMatrix CombinationMatrix::certify(Matrix a, Matrix target, SupportMask mask, double tol) {
  DesignReport report = check_conditions(a, target, mask, tol);
  return CombinationMatrix(std::move(a), std::move(target), std::move(mask), std::move(report));
}

void CombinationMatrix::require_certified(const std::string& role) const {
  if (certified()) return;
  std::ostringstream msg;
  msg << role << " combiner fails its conditions: residuals " << report_.residual_right << ", "
      << report_.residual_left << ", rho " << report_.rho << ", mask violations " << report_.mask_violations
      << " (tol " << report_.tolerance << ")";
  throw Error(ErrorCode::NotCertified, msg.str());
}

// ---------------------------------------------------------------------------

AffineSet::AffineSet(const Matrix& e, const SupportMask& mask, double feasibility_tol) : n_(e.rows()) {
  require(e.rows() == e.cols() && mask.dim() == e.rows(), ErrorCode::DimensionMismatch,
          "target and mask sizes differ");
  for (Index j = 0; j < n_; ++j)
    for (Index i = 0; i < n_; ++i)
      if (mask.allowed(i, j)) {
        rows_.push_back(i);
        cols_.push_back(j);
      }
  const Index nfree = free_count();

  Eigen::JacobiSVD<Matrix> esvd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = esvd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-10 * std::max(1.0, sv(0))) ++rank;
  const Matrix u = esvd.matrixU().leftCols(rank);
  const Matrix v = esvd.matrixV().leftCols(rank);

  // rows [0, n r): (A U)_{i c} = U_{i c};  rows [n r, 2 n r): (V^T A)_{c j} = V_{j c}
  Matrix g = Matrix::Zero(2 * n_ * rank, nfree);
  Vector b(2 * n_ * rank);
  for (Index c = 0; c < rank; ++c)
    for (Index i = 0; i < n_; ++i) {
      b(c * n_ + i) = u(i, c);
      b(n_ * rank + c * n_ + i) = v(i, c);
    }
  for (Index f = 0; f < nfree; ++f) {
    const Index i = rows_[static_cast<std::size_t>(f)];
    const Index j = cols_[static_cast<std::size_t>(f)];
    for (Index c = 0; c < rank; ++c) {
      g(c * n_ + i, f) = u(j, c);
      g(n_ * rank + c * n_ + j, f) = v(i, c);
    }
  }

  if (rank == 0 || nfree == 0) {
    row_space_ = Matrix(nfree, 0);
    particular_ = Vector::Zero(nfree);
  } else {
    Eigen::BDCSVD<Matrix> gsvd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& gs = gsvd.singularValues();
    Index grank = 0;
    while (grank < gs.size() && gs(grank) > 1e-10 * gs(0)) ++grank;
    row_space_ = gsvd.matrixV().leftCols(grank);
    const Vector coeff = gsvd.matrixU().leftCols(grank).transpose() * b;
    particular_ = row_space_ * coeff.cwiseQuotient(gs.head(grank));
  }
  const double residual = (g * particular_ - b).norm();
  if (residual > feasibility_tol * std::max(1.0, b.norm()))
    throw Error(ErrorCode::Infeasible,
                "no mask-supported A satisfies A E = E and E A = E (residual " + std::to_string(residual) + ")");
}

Vector AffineSet::gather(const Matrix& a) const {
  Vector x(free_count());
  for (Index f = 0; f < free_count(); ++f) x(f) = a(rows_[static_cast<std::size_t>(f)], cols_[static_cast<std::size_t>(f)]);
  return x;
}

Matrix AffineSet::scatter(const Vector& x) const {
  Matrix a = Matrix::Zero(n_, n_);
  for (Index f = 0; f < free_count(); ++f) a(rows_[static_cast<std::size_t>(f)], cols_[static_cast<std::size_t>(f)]) = x(f);
  return a;
}

Vector AffineSet::project(const Vector& x) const {
  return project_direction(x) + particular_;
}

Vector AffineSet::project_direction(const Vector& d) const {
  return d - row_space_ * (row_space_.transpose() * d);
}

Matrix project_affine(const Matrix& a0, const Matrix& e, const SupportMask& mask) {
  require(a0.rows() == e.rows() && a0.cols() == e.cols(), ErrorCode::DimensionMismatch, "A0 and E shapes differ");
  AffineSet set(e, mask);
  return set.scatter(set.project(set.gather(a0)));
}

// ---------------------------------------------------------------------------

namespace {

struct Solution {
  Vector x;
  double objective = std::numeric_limits<double>::infinity();
  Index iterations = 0;
  bool converged = false;
};

class SpectralObjective {
 public:
  SpectralObjective(const AffineSet& set, const Matrix& e) : set_(set), e_(e) {}

  double sigma_max(const Vector& x) const { return spectral_norm(set_.scatter(x) - e_); }

  /// Top singular pair of A - E as a projected subgradient; first nonzero
  /// entry of u made positive.
  double subgradient(const Vector& x, Vector& grad) const {
    Eigen::JacobiSVD<Matrix> svd(set_.scatter(x) - e_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector u = svd.matrixU().col(0);
    Vector v = svd.matrixV().col(0);
    for (Index i = 0; i < u.size(); ++i)
      if (u(i) != 0.0) {
        if (u(i) < 0.0) {
          u = -u;
          v = -v;
        }
        break;
      }
    grad = set_.project_direction(set_.gather(u * v.transpose()));
    return svd.singularValues()(0);
  }

  /// tau * log sum_i 2 cosh(sigma_i / tau) and its projected gradient.
  double smoothed(const Vector& x, double tau, Vector& grad, double& sigma1) const {
    Eigen::JacobiSVD<Matrix> svd(set_.scatter(x) - e_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    sigma1 = s(0);
    Vector weight(s.size());
    double total = 0.0;
    for (Index i = 0; i < s.size(); ++i) {
      const double plus = std::exp((s(i) - sigma1) / tau);
      const double minus = std::exp((-s(i) - sigma1) / tau);
      weight(i) = plus - minus;
      total += plus + minus;
    }
    weight /= total;
    const Matrix g = svd.matrixU() * weight.asDiagonal() * svd.matrixV().transpose();
    grad = set_.project_direction(set_.gather(g));
    return sigma1 + tau * std::log(total);
  }

 private:
  const AffineSet& set_;
  const Matrix& e_;
};

Solution solve_subgradient(const AffineSet& set, const SpectralObjective& obj, Vector x, const DesignOptions& opts) {
  Solution best;
  best.x = x;
  Vector grad;
  std::deque<double> history;
  for (Index t = 1; t <= opts.max_iterations; ++t) {
    const double f = obj.subgradient(x, grad);
    if (f < best.objective) {
      best.objective = f;
      best.x = x;
    }
    best.iterations = t;
    history.push_back(best.objective);
    if (static_cast<Index>(history.size()) > opts.stall_window) {
      if (history.front() - best.objective < opts.stall_tol) {
        best.converged = true;
        break;
      }
      history.pop_front();
    }
    const double gnorm = grad.norm();
    if (f <= 1e-14 || gnorm <= 1e-14) {
      best.converged = true;
      break;
    }
    x -= (opts.step0 / std::sqrt(static_cast<double>(t))) * grad / gnorm;
    x = set.project(x);
  }
  return best;
}

Solution solve_smoothed(const AffineSet& set, const SpectralObjective& obj, Vector x, const DesignOptions& opts) {
  Solution best;
  best.x = x;
  best.objective = obj.sigma_max(x);
  const Index stage_cap =
      std::max<Index>(50, opts.max_iterations / std::max<Index>(1, static_cast<Index>(opts.temperatures.size())));
  bool all_stages_settled = true;

  for (double tau : opts.temperatures) {
    std::deque<Vector> s_hist;
    std::deque<Vector> y_hist;
    Vector grad;
    double sigma1 = 0.0;
    double f = obj.smoothed(x, tau, grad, sigma1);
    bool settled = false;
    Index flat = 0;
    for (Index it = 0; it < stage_cap; ++it) {
      ++best.iterations;
      if (grad.norm() <= 1e-13) {
        settled = true;
        break;
      }
      // two-loop recursion
      Vector d = -grad;
      std::vector<double> alpha(s_hist.size());
      for (std::size_t k = s_hist.size(); k-- > 0;) {
        alpha[k] = s_hist[k].dot(d) / y_hist[k].dot(s_hist[k]);
        d -= alpha[k] * y_hist[k];
      }
      if (!s_hist.empty()) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      for (std::size_t k = 0; k < s_hist.size(); ++k) {
        const double beta = y_hist[k].dot(d) / y_hist[k].dot(s_hist[k]);
        d += (alpha[k] - beta) * s_hist[k];
      }
      d = set.project_direction(d);
      double slope = grad.dot(d);
      double step = 1.0;
      if (s_hist.empty() || slope >= 0.0) {
        d = -grad;
        slope = -grad.squaredNorm();
        step = 0.5 * tau;
        s_hist.clear();
        y_hist.clear();
      }

      Vector x_new;
      Vector g_new;
      double f_new = f;
      double s_new = sigma1;
      bool accepted = false;
      for (int back = 0; back < 50; ++back) {
        x_new = set.project(x + step * d);
        f_new = obj.smoothed(x_new, tau, g_new, s_new);
        if (f_new <= f + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        settled = true;
        break;
      }
      Vector sk = x_new - x;
      Vector yk = g_new - grad;
      if (sk.dot(yk) > 1e-14 * sk.norm() * yk.norm()) {
        s_hist.push_back(std::move(sk));
        y_hist.push_back(std::move(yk));
        if (static_cast<Index>(s_hist.size()) > opts.lbfgs_memory) {
          s_hist.pop_front();
          y_hist.pop_front();
        }
      }
      const double decrease = f - f_new;
      x = std::move(x_new);
      grad = std::move(g_new);
      f = f_new;
      sigma1 = s_new;
      if (sigma1 < best.objective) {
        best.objective = sigma1;
        best.x = x;
      }
      flat = decrease <= 1e-12 * std::max(1.0, std::abs(f)) ? flat + 1 : 0;
      if (flat >= 5) {
        settled = true;
        break;
      }
    }
    all_stages_settled = all_stages_settled && settled;
  }
  best.converged = all_stages_settled;
  return best;
}

bool is_kron_identity(const Matrix& e, Index m, Matrix& small) {
  const Index n = e.rows() / m;
  small.resize(n, n);
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l) small(k, l) = e(k * m, l * m);
  const double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
  return (e - kron_expand(small, m)).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

}  // namespace

CombinationMatrix design_combiner(const Matrix& e, const SupportMask& mask, double eps, const DesignOptions& opts) {
  require(e.rows() == e.cols() && mask.dim() == e.rows(), ErrorCode::DimensionMismatch,
          "target and mask sizes differ");
  require(eps > 0.0 && eps < 1.0, ErrorCode::InvalidParam, "eps must lie in (0, 1)");
  const double enorm = spectral_norm(e);
  require(spectral_norm(e * e - e) <= 1e-8 * std::max(1.0, enorm), ErrorCode::InvalidParam,
          "target matrix is not idempotent");

  if (opts.kronecker_shortcut) {
    const Index m = mask.uniform_block();
    Matrix small;
    if (m > 1 && is_kron_identity(e, m, small)) {
      DesignOptions inner = opts;
      inner.kronecker_shortcut = false;
      CombinationMatrix designed = design_combiner(small, mask.node_mask(), eps, inner);
      CombinationMatrix out =
          CombinationMatrix::certify(kron_expand(designed.matrix(), m), e, mask, opts.feasibility_tol);
      out.report().iterations = designed.report().iterations;
      out.report().converged = designed.report().converged;
      out.report().method = designed.report().method + "+kronecker";
      return out;
    }
  }

  AffineSet set(e, mask);
  SpectralObjective objective(set, e);
  const Vector start = set.project(set.gather(e));
  Solution sol = opts.method == DesignMethod::Subgradient ? solve_subgradient(set, objective, start, opts)
                                                          : solve_smoothed(set, objective, start, opts);

  Matrix a = set.scatter(sol.x);
  const double achieved = per_step_factor(a, e);
  if (achieved > 1.0 - eps)
    throw Error(ErrorCode::Infeasible, "best ||A - E||_2 = " + std::to_string(achieved) +
                                           " exceeds 1 - eps = " + std::to_string(1.0 - eps) +
                                           "; the topology cannot realize the target");
  CombinationMatrix out = CombinationMatrix::certify(std::move(a), e, mask, opts.feasibility_tol);
  out.report().iterations = sol.iterations;
  out.report().converged = sol.converged;
  out.report().method = opts.method == DesignMethod::Subgradient ? "subgradient" : "smoothed-lbfgs";
  if (!out.certified())
    throw Error(ErrorCode::Infeasible, "designed matrix fails its conditions: residuals " +
                                           std::to_string(out.report().residual_right) + ", " +
                                           std::to_string(out.report().residual_left));
  return out;
}

}  // namespace oblique
