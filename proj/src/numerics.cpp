#include "bilex/numerics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <string>

#include "bilex/error.hpp"

namespace bilex {

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + " has non-finite entries");
}

Vector canonicalize_signs(Matrix& basis) {
  Vector signs = Vector::Ones(basis.cols());
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      // Tie tolerance so round-off cannot pick a different entry between runs.
      if (std::abs(basis(i, j)) > best + 1e-12) {
        best = std::abs(basis(i, j));
        arg = i;
      }
    }
    if (basis.rows() > 0 && basis(arg, j) < 0) {
      basis.col(j) = -basis.col(j);
      signs(j) = -1.0;
    }
  }
  return signs;
}

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd input");
  SvdResult r;
  if (m.size() == 0) {
    r.left = Matrix(m.rows(), 0);
    r.right = Matrix(m.cols(), 0);
    r.singular = Vector(0);
    return r;
  }
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  r.left = dec.matrixU();
  r.singular = dec.singularValues();
  r.right = dec.matrixV();
  const Vector signs = canonicalize_signs(r.left);
  for (Eigen::Index j = 0; j < signs.size(); ++j)
    if (signs(j) < 0) r.right.col(j) = -r.right.col(j);
  if (!r.left.allFinite() || !r.right.allFinite() || !r.singular.allFinite())
    throw NumericError("svd did not converge");
  return r;
}

std::size_t numerical_rank(const Vector& singular) {
  if (singular.size() == 0) return 0;
  const double top = singular.maxCoeff();
  if (top <= 0.0) return 0;
  const double cut = kRankTolerance * top;
  return static_cast<std::size_t>((singular.array() > cut).count());
}

std::size_t numerical_rank(const Matrix& m) {
  return numerical_rank(svd(m).singular);
}

std::size_t nnz(const Matrix& m) {
  return static_cast<std::size_t>((m.array().abs() > kZeroTolerance).count());
}

namespace {

void require_lambda(double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("prox strength must be non-negative");
}

}  // namespace

Matrix prox_l1(const Matrix& w, double lambda) {
  require_lambda(lambda);
  return w.unaryExpr([lambda](double x) {
    const double mag = std::abs(x) - lambda;
    return mag > 0.0 ? std::copysign(mag, x) : 0.0;
  });
}

Matrix prox_l2(const Matrix& w, double lambda) {
  require_lambda(lambda);
  return w / (1.0 + lambda);
}

Matrix prox_nuclear(const Matrix& w, double lambda) {
  require_lambda(lambda);
  if (lambda == 0.0) {
    require_finite(w, "prox input");
    return w;
  }
  const SvdResult d = svd(w);
  Eigen::Index kept = 0;
  while (kept < d.singular.size() && d.singular(kept) > lambda) ++kept;
  if (kept == 0) return Matrix::Zero(w.rows(), w.cols());
  const Vector shrunk = d.singular.head(kept).array() - lambda;
  return d.left.leftCols(kept) * shrunk.asDiagonal() * d.right.leftCols(kept).transpose();
}

std::string_view to_string(Regularizer r) {
  switch (r) {
    case Regularizer::l1: return "l1";
    case Regularizer::l2: return "l2";
    case Regularizer::nuclear: return "nuclear";
  }
  return "?";
}

Regularizer parse_regularizer(std::string_view s) {
  if (s == "l1") return Regularizer::l1;
  if (s == "l2") return Regularizer::l2;
  if (s == "nuclear" || s == "trace") return Regularizer::nuclear;
  throw InvalidArgument("unknown regularizer: " + std::string(s));
}

double penalty(Regularizer r, const Matrix& w) {
  switch (r) {
    case Regularizer::l1: return w.cwiseAbs().sum();
    case Regularizer::l2: return 0.5 * w.squaredNorm();
    case Regularizer::nuclear: return w.size() == 0 ? 0.0 : svd(w).singular.sum();
  }
  return 0.0;
}

Matrix prox(Regularizer r, const Matrix& w, double lambda) {
  switch (r) {
    case Regularizer::l1: return prox_l1(w, lambda);
    case Regularizer::l2: return prox_l2(w, lambda);
    case Regularizer::nuclear: return prox_nuclear(w, lambda);
  }
  return w;
}

}  // namespace bilex
