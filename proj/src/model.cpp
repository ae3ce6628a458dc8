#include "bilex/model.hpp"

#include <cmath>

#include "bilex/error.hpp"

namespace bilex {

BilinearModel BilinearModel::dense(Matrix w, bool sparse_storage) {
  if (w.rows() != w.cols() || w.rows() == 0)
    throw DimensionError("dense operator must be square and non-empty");
  require_finite(w, "operator");
  BilinearModel m;
  m.n_ = static_cast<std::size_t>(w.rows());
  m.w_ = std::move(w);
  m.sparse_storage_ = sparse_storage;
  return m;
}

BilinearModel BilinearModel::factorized(Matrix u, Matrix v, std::size_t rank) {
  if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() == 0 || u.cols() == 0)
    throw DimensionError("factors must both be n x k with n, k >= 1");
  if (rank > static_cast<std::size_t>(u.cols()))
    throw InvalidArgument("rank exceeds factor width");
  require_finite(u, "query factor");
  require_finite(v, "candidate factor");
  BilinearModel m;
  m.factorized_ = true;
  m.n_ = static_cast<std::size_t>(u.rows());
  m.rank_ = rank;
  m.u_ = std::move(u);
  m.v_ = std::move(v);
  return m;
}

BilinearModel BilinearModel::factorized(Matrix u, Matrix v) {
  const auto k = static_cast<std::size_t>(u.cols());
  return factorized(std::move(u), std::move(v), k);
}

std::size_t BilinearModel::rank() const {
  return factorized_ ? rank_ : numerical_rank(w_);
}

const Matrix& BilinearModel::weights() const {
  if (factorized_) throw InvalidArgument("factorized model has no dense operator");
  return w_;
}

const Matrix& BilinearModel::query_factor() const {
  if (!factorized_) throw RequiresFactorized("dense model has no factors");
  return u_;
}

const Matrix& BilinearModel::candidate_factor() const {
  if (!factorized_) throw RequiresFactorized("dense model has no factors");
  return v_;
}

Matrix BilinearModel::materialize() const {
  return factorized_ ? Matrix(u_ * v_.transpose()) : w_;
}

Vector BilinearModel::project_query(const Vector& phi_q) const {
  if (static_cast<std::size_t>(phi_q.size()) != n_)
    throw DimensionError("query vector has length " + std::to_string(phi_q.size()) +
                         ", expected " + std::to_string(n_));
  return factorized_ ? Vector(u_.transpose() * phi_q) : Vector(w_.transpose() * phi_q);
}

Matrix BilinearModel::project_candidates(const Matrix& candidates) const {
  if (candidates.rows() > 0 && static_cast<std::size_t>(candidates.cols()) != n_)
    throw DimensionError("candidate vectors have length " + std::to_string(candidates.cols()) +
                         ", expected " + std::to_string(n_));
  if (candidates.rows() == 0) return Matrix(0, factorized_ ? u_.cols() : Eigen::Index(n_));
  return factorized_ ? Matrix(candidates * v_) : candidates;
}

double score(const BilinearModel& model, const Vector& phi_q, const Vector& phi_c) {
  if (static_cast<std::size_t>(phi_c.size()) != model.rep_dim())
    throw DimensionError("candidate vector has length " + std::to_string(phi_c.size()) +
                         ", expected " + std::to_string(model.rep_dim()));
  const Vector q = model.project_query(phi_q);
  if (model.is_factorized()) return q.dot(model.candidate_factor().transpose() * phi_c);
  return q.dot(phi_c);
}

CandidateScorer::CandidateScorer(const BilinearModel& model, const Matrix& candidates)
    : model_(&model), projected_(model.project_candidates(candidates)) {}

Vector CandidateScorer::scores(const Vector& phi_q) const {
  const Vector q = model_->project_query(phi_q);
  if (projected_.rows() == 0) return Vector(0);
  return projected_ * q;
}

Vector score_all(const BilinearModel& model, const Vector& phi_q, const Matrix& candidates) {
  return CandidateScorer(model, candidates).scores(phi_q);
}

double log_sum_exp(const Vector& scores) {
  if (scores.size() == 0) throw EmptyCandidates("empty candidate set");
  const double top = scores.maxCoeff();
  return top + std::log((scores.array() - top).exp().sum());
}

Vector softmax(const Vector& scores) {
  if (scores.size() == 0) throw EmptyCandidates("empty candidate set");
  const double top = scores.maxCoeff();
  Vector e = (scores.array() - top).exp();
  return e / e.sum();
}

Vector distribution(const BilinearModel& model, const Vector& phi_q, const Matrix& candidates) {
  if (candidates.rows() == 0) throw EmptyCandidates("empty candidate set");
  return softmax(score_all(model, phi_q, candidates));
}

BilinearModel factorize(const Matrix& w, double epsilon) {
  if (w.rows() != w.cols() || w.rows() == 0) throw DimensionError("factorize needs a square operator");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be non-negative");
  const SvdResult d = svd(w);
  const double top = d.singular.size() > 0 ? d.singular(0) : 0.0;
  Eigen::Index k = 0;
  if (top > 0.0)
    while (k < d.singular.size() && d.singular(k) > epsilon * top) ++k;
  if (k == 0) {
    const Matrix zero = Matrix::Zero(w.rows(), 1);
    return BilinearModel::factorized(zero, zero, 0);
  }
  const Vector root = d.singular.head(k).cwiseSqrt();
  Matrix u = d.left.leftCols(k) * root.asDiagonal();
  Matrix v = d.right.leftCols(k) * root.asDiagonal();
  return BilinearModel::factorized(std::move(u), std::move(v));
}

std::uint64_t dense_ops(std::size_t n, std::size_t n_candidates) {
  return 2ULL * n * n + 2ULL * n * n_candidates;
}

std::uint64_t sparse_ops(std::size_t nnz, std::size_t n, std::size_t n_candidates) {
  return 2ULL * nnz + 2ULL * n * n_candidates;
}

std::uint64_t factorized_ops(std::size_t n, std::size_t k, std::size_t n_candidates) {
  return 2ULL * n * k + 2ULL * k * n_candidates;
}

std::uint64_t op_count(const BilinearModel& model, std::size_t n_candidates) {
  const std::size_t n = model.rep_dim();
  if (model.is_factorized()) return factorized_ops(n, model.rank(), n_candidates);
  if (model.sparse_storage()) return sparse_ops(nnz(model.weights()), n, n_candidates);
  return dense_ops(n, n_candidates);
}

std::uint64_t candidate_precompute_ops(const BilinearModel& model, std::size_t n_candidates) {
  if (!model.is_factorized()) return 0;
  return 2ULL * model.rep_dim() * model.rank() * n_candidates;
}

Representation export_embeddings(const BilinearModel& model, Side side,
                                  const Representation& rep) {
  if (!model.is_factorized())
    throw RequiresFactorized("export_embeddings needs a factorized model");
  const RepRef& expected = side == Side::query ? model.query_rep : model.candidate_rep;
  if (expected.hash != 0 && expected.hash != rep.fingerprint())
    throw RepresentationMismatch("representation does not match the model's " +
                                 std::string(side == Side::query ? "query" : "candidate") +
                                 " side" + (expected.id.empty() ? "" : " (" + expected.id + ")"));
  if (rep.dim() != model.rep_dim())
    throw DimensionError("representation dimension " + std::to_string(rep.dim()) +
                         " differs from model dimension " + std::to_string(model.rep_dim()));
  const Matrix& factor = side == Side::query ? model.query_factor() : model.candidate_factor();
  return Representation(rep.vocab(), rep.multiply(factor));
}

}  // namespace bilex
