#pragma once

#include <cstdint>
#include <string>

#include "bilex/dataset.hpp"
#include "bilex/numerics.hpp"
#include "bilex/representation.hpp"

namespace bilex {

enum class Side { query, candidate };

/// Scores a word pair as phi(q)^T W phi(c), with W held either densely or
/// as factors U, V (n x k) with W = U V^T.
class BilinearModel {
 public:
  /// `sparse_storage` marks an operator whose cost is charged by its
  /// non-zeros (l1-trained).
  static BilinearModel dense(Matrix w, bool sparse_storage = false);

  /// `rank` is the number of non-trivial factor columns (0 for the zero
  /// operator, whose factors are single zero columns).
  static BilinearModel factorized(Matrix u, Matrix v, std::size_t rank);
  static BilinearModel factorized(Matrix u, Matrix v);

  bool is_factorized() const { return factorized_; }
  bool sparse_storage() const { return sparse_storage_; }
  std::size_t rep_dim() const { return n_; }
  /// Effective rank: factor width for factorized models, numerical rank of
  /// W otherwise.
  std::size_t rank() const;

  /// Dense W; throws InvalidArgument on factorized models.
  const Matrix& weights() const;
  /// Throws RequiresFactorized on dense models.
  const Matrix& query_factor() const;
  const Matrix& candidate_factor() const;

  /// W (or U V^T for factorized models).
  Matrix materialize() const;

  /// W^T phi_q (length n), or U^T phi_q (length k).
  Vector project_query(const Vector& phi_q) const;
  /// Candidate rows as seen by project_query's output: C itself for dense
  /// models, C V for factorized ones.
  Matrix project_candidates(const Matrix& candidates) const;

  RepRef query_rep;
  RepRef candidate_rep;

 private:
  BilinearModel() = default;

  bool factorized_ = false;
  bool sparse_storage_ = false;
  std::size_t n_ = 0;
  std::size_t rank_ = 0;
  Matrix w_;
  Matrix u_;
  Matrix v_;
};

double score(const BilinearModel& model, const Vector& phi_q, const Vector& phi_c);

/// Candidate-side work done once; scoring a query is then one projection
/// plus one product per candidate.
class CandidateScorer {
 public:
  CandidateScorer(const BilinearModel& model, const Matrix& candidates);

  Vector scores(const Vector& phi_q) const;
  std::size_t size() const { return static_cast<std::size_t>(projected_.rows()); }

 private:
  const BilinearModel* model_;
  Matrix projected_;
};

/// Scores of every candidate row of `candidates` (|M| x n).
Vector score_all(const BilinearModel& model, const Vector& phi_q, const Matrix& candidates);

/// Numerically stable softmax. Throws EmptyCandidates on an empty input.
Vector softmax(const Vector& scores);
double log_sum_exp(const Vector& scores);

Vector distribution(const BilinearModel& model, const Vector& phi_q, const Matrix& candidates);

/// Splits W = A S B^T into U = A_k S_k^{1/2}, V = B_k S_k^{1/2} keeping
/// singular values above epsilon * sigma_max.
BilinearModel factorize(const Matrix& w, double epsilon);

/// Double operations to score all candidates for one query (multiply-add
/// counts 2). Factorized models assume precomputed candidate projections.
std::uint64_t op_count(const BilinearModel& model, std::size_t n_candidates);

std::uint64_t dense_ops(std::size_t n, std::size_t n_candidates);
std::uint64_t sparse_ops(std::size_t nnz, std::size_t n, std::size_t n_candidates);
std::uint64_t factorized_ops(std::size_t n, std::size_t k, std::size_t n_candidates);

/// Offline cost of projecting all candidates through V (2 n k |M|).
std::uint64_t candidate_precompute_ops(const BilinearModel& model, std::size_t n_candidates);

/// k-dimensional embeddings U^T phi(w) or V^T phi(w) for every word of `rep`.
/// Throws RequiresFactorized for dense models and RepresentationMismatch
/// when `rep` is not the one recorded for that side.
Representation export_embeddings(const BilinearModel& model, Side side,
                                 const Representation& rep);

}  // namespace bilex
