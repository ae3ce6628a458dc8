#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string_view>

namespace bilex {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin SVD, m = left * diag(singular) * right^T.
///
/// Singular values are non-increasing. Each column of `left` has its
/// largest-magnitude entry non-negative (first such entry on ties), and the
/// matching column of `right` is flipped along with it.
struct SvdResult {
  Matrix left;
  Vector singular;
  Matrix right;
};

SvdResult svd(const Matrix& m);

/// Flips columns of `basis` so the largest-magnitude entry of each is
/// non-negative. Returns the applied signs (+1/-1) per column.
Vector canonicalize_signs(Matrix& basis);

/// Count of singular values above 1e-10 * sigma_max (0 for the zero matrix).
std::size_t numerical_rank(const Vector& singular);
std::size_t numerical_rank(const Matrix& m);

/// Entries with |w_ij| > 1e-12.
std::size_t nnz(const Matrix& m);

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kZeroTolerance = 1e-12;

Matrix prox_l1(const Matrix& w, double lambda);
Matrix prox_l2(const Matrix& w, double lambda);
Matrix prox_nuclear(const Matrix& w, double lambda);

enum class Regularizer { l1, l2, nuclear };

std::string_view to_string(Regularizer r);
Regularizer parse_regularizer(std::string_view s);

/// rho(W): ||W||_1, 0.5 ||W||_F^2 or ||W||_* respectively.
double penalty(Regularizer r, const Matrix& w);

/// argmin_x 0.5 ||x - w||_F^2 + lambda * rho(x).
Matrix prox(Regularizer r, const Matrix& w, double lambda);

/// Throws NumericError if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

}  // namespace bilex
