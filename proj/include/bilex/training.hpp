#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bilex/dataset.hpp"
#include "bilex/model.hpp"
#include "bilex/numerics.hpp"

namespace bilex {

enum class Schedule { constant, inv_sqrt_t };

std::string_view to_string(Schedule s);
Schedule parse_schedule(std::string_view s);

/// Full-batch or fixed-size minibatches.
struct Batch {
  std::size_t size = 0;  // 0 = full batch

  static Batch full() { return {0}; }
  static Batch minibatch(std::size_t n) { return {n}; }
  bool is_full() const { return size == 0; }

  friend bool operator==(const Batch&, const Batch&) = default;
};

struct TrainConfig {
  Regularizer regularizer = Regularizer::nuclear;
  double tau = 0.1;
  double step0 = 1.0;
  Schedule schedule = Schedule::inv_sqrt_t;
  int epochs = 20;
  Batch batch = Batch::minibatch(100);
  int prox_period = 10;
  std::uint64_t seed = 0;
  /// Epochs without dev improvement before stopping; 0 disables early stopping.
  int early_stop_patience = 0;

  /// Defaults with prox_period 1 for l1/l2 and 10 for nuclear.
  static TrainConfig defaults_for(Regularizer r);

  /// Throws InvalidArgument.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  int epoch = 0;
  double nll = 0.0;        // summed train NLL
  double objective = 0.0;  // train NLL + tau * rho(W)
  double dev_accuracy = 0.0;
  std::size_t rank_or_nnz = 0;
  std::uint64_t ops = 0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainedModel {
  BilinearModel model;
  std::vector<EpochRecord> history;
  int selected_epoch = 0;
  TrainConfig config;
};

/// Sum over pairs of -weight * log Pr(c | q; W), softmax over all of M.
/// Throws EmptySplit when there are no pairs.
double nll(const BilinearModel& model, const IndexedDataset& data, Split split);
double nll(const BilinearModel& model, const IndexedDataset& data,
           std::span<const WeightedPair> pairs);

/// Gradient of nll with respect to W:
///   sum_(q,c) weight * phi(q) (E_{c'~Pr(.|q)}[phi(c')] - phi(c))^T.
Matrix gradient(const BilinearModel& model, const IndexedDataset& data,
                std::span<const WeightedPair> pairs);

/// w - eta * grad, followed by prox_reg(., eta * tau) when `apply_prox`.
Matrix fobos_step(const Matrix& w, const Matrix& grad, double eta, Regularizer reg, double tau,
                  bool apply_prox);

/// Summed NLL of `split` plus tau * rho(W): the quantity FOBOS minimizes.
double regularized_objective(const Matrix& w, const IndexedDataset& data, Split split,
                             Regularizer reg, double tau);

/// Upper bound on the Lipschitz constant of the gradient of the summed NLL of
/// `split`: lambda_max(weighted query scatter) * max ||phi(c)||^2, with
/// the eigenvalue estimated by power iteration.
double smoothness_bound(const IndexedDataset& data, Split split, int iterations = 200);

/// Rank for nuclear-regularized operators, non-zero count otherwise.
std::size_t complexity(Regularizer reg, const Matrix& w);

/// Op count of the model a given regularizer produces from W.
std::uint64_t operator_ops(Regularizer reg, const Matrix& w, std::size_t n_candidates);

/// Wraps W into the model form for its regularizer: factorized for
/// nuclear, sparse-costed dense for l1, dense for l2.
BilinearModel finalize_operator(Regularizer reg, const Matrix& w);

/// FOBOS training from W = 0 with dev-set epoch selection. Minibatch
/// gradients are averaged over the batch weight, so the prox threshold is
/// eta * tau / (train weight); the fixed point matches NLL + tau * rho.
TrainedModel train(const TrainConfig& cfg, const IndexedDataset& data);

struct SweepCell {
  TrainConfig config;
  std::optional<TrainedModel> result;
  std::string error;  // set when training failed

  bool ok() const { return result.has_value(); }
};

/// Trains every config independently; failures are recorded per cell.
std::vector<SweepCell> sweep(std::span<const TrainConfig> cfgs, const IndexedDataset& data);

}  // namespace bilex
