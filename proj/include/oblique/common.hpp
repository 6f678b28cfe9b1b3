#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace oblique {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
  RankDeficient,
  IllConditioned,
  DimensionMismatch,
  InvalidParam,
  Infeasible,
  NotCertified,
  Singular,
  IoError,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Numerical thresholds shared by the projector construction and validation.
struct Tolerances {
  /// A basis is rank deficient when sigma_min <= rank_rel * sigma_max.
  double rank_rel = 1e-10;
  /// Gram matrices with a larger 2-norm condition number are rejected.
  double max_condition = 1e12;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

/// Largest singular value.
double spectral_norm(const Matrix& m);

}  // namespace oblique
