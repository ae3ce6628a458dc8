#include "bilex/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "bilex/error.hpp"
#include "bilex/evaluation.hpp"

namespace bilex {

std::string_view to_string(Schedule s) {
  return s == Schedule::constant ? "constant" : "inv_sqrt_t";
}

Schedule parse_schedule(std::string_view s) {
  if (s == "constant") return Schedule::constant;
  if (s == "inv_sqrt_t") return Schedule::inv_sqrt_t;
  throw InvalidArgument("unknown schedule: " + std::string(s));
}

TrainConfig TrainConfig::defaults_for(Regularizer r) {
  TrainConfig c;
  c.regularizer = r;
  c.prox_period = r == Regularizer::nuclear ? 10 : 1;
  return c;
}

void TrainConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be positive");
  if (!(step0 > 0.0) || !std::isfinite(step0)) throw InvalidArgument("step0 must be positive");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (prox_period < 1) throw InvalidArgument("prox_period must be >= 1");
  if (early_stop_patience < 0) throw InvalidArgument("early_stop_patience must be >= 0");
}

namespace {

/// Pairs grouped by query: per group the query row, the total weight and
/// the weighted sum of observed candidate vectors.
struct QueryGroups {
  std::vector<std::size_t> query;
  Vector weight;
  Matrix observed;  // groups x n
  std::vector<std::vector<std::pair<std::size_t, double>>> members;  // (candidate, weight)
};

QueryGroups group_by_query(const IndexedDataset& data, std::span<const WeightedPair> pairs) {
  QueryGroups g;
  std::unordered_map<std::size_t, std::size_t> slot;
  for (const auto& p : pairs) {
    auto [it, fresh] = slot.emplace(p.query, g.query.size());
    if (fresh) {
      g.query.push_back(p.query);
      g.members.emplace_back();
    }
    g.members[it->second].emplace_back(p.candidate, p.weight);
  }
  const auto groups = static_cast<Eigen::Index>(g.query.size());
  const auto n = static_cast<Eigen::Index>(data.dim());
  g.weight = Vector::Zero(groups);
  g.observed = Matrix::Zero(groups, n);
  const Matrix& c = data.candidate_matrix();
  for (Eigen::Index i = 0; i < groups; ++i) {
    for (const auto& [cand, w] : g.members[static_cast<std::size_t>(i)]) {
      g.weight(i) += w;
      g.observed.row(i) += w * c.row(static_cast<Eigen::Index>(cand));
    }
  }
  return g;
}

Matrix gather_queries(const IndexedDataset& data, const std::vector<std::size_t>& rows) {
  Matrix q(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.dim()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    q.row(static_cast<Eigen::Index>(i)) = data.query_matrix().row(static_cast<Eigen::Index>(rows[i]));
  return q;
}

/// groups x |M| score matrix.
Matrix batch_scores(const BilinearModel& model, const IndexedDataset& data, const Matrix& queries) {
  if (static_cast<std::size_t>(queries.cols()) != model.rep_dim())
    throw DimensionError("model dimension differs from the representation dimension");
  const Matrix& c = data.candidate_matrix();
  if (model.is_factorized())
    return (queries * model.query_factor()) * (c * model.candidate_factor()).transpose();
  return (queries * model.weights()) * c.transpose();
}

}  // namespace

double nll(const BilinearModel& model, const IndexedDataset& data,
           std::span<const WeightedPair> pairs) {
  if (pairs.empty()) throw EmptySplit("no pairs to evaluate");
  if (data.num_candidates() == 0) throw EmptyCandidates("empty candidate set");
  const QueryGroups g = group_by_query(data, pairs);
  const Matrix s = batch_scores(model, data, gather_queries(data, g.query));
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const Vector row = s.row(i).transpose();
    const double lse = log_sum_exp(row);
    for (const auto& [cand, w] : g.members[static_cast<std::size_t>(i)])
      total += w * (lse - row(static_cast<Eigen::Index>(cand)));
  }
  return total;
}

double nll(const BilinearModel& model, const IndexedDataset& data, Split split) {
  const auto pairs = data.pairs(split);
  if (pairs.empty()) throw EmptySplit("split " + std::string(to_string(split)) + " is empty");
  return nll(model, data, pairs);
}

Matrix gradient(const BilinearModel& model, const IndexedDataset& data,
                std::span<const WeightedPair> pairs) {
  if (pairs.empty()) throw EmptySplit("empty batch");
  if (data.num_candidates() == 0) throw EmptyCandidates("empty candidate set");
  const QueryGroups g = group_by_query(data, pairs);
  const Matrix q = gather_queries(data, g.query);
  Matrix p = batch_scores(model, data, q);
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) = softmax(p.row(i).transpose()).transpose();
  // Row i: total weight times the model's expected candidate vector, minus
  // the observed candidate vectors.
  const Matrix diff = g.weight.asDiagonal() * (p * data.candidate_matrix()) - g.observed;
  return q.transpose() * diff;
}

Matrix fobos_step(const Matrix& w, const Matrix& grad, double eta, Regularizer reg, double tau,
                  bool apply_prox) {
  if (w.rows() != grad.rows() || w.cols() != grad.cols())
    throw DimensionError("gradient shape differs from operator shape");
  if (!(eta > 0.0)) throw InvalidArgument("step size must be positive");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  Matrix next = w - eta * grad;
  if (apply_prox) next = prox(reg, next, eta * tau);
  return next;
}

double regularized_objective(const Matrix& w, const IndexedDataset& data, Split split,
                             Regularizer reg, double tau) {
  return nll(BilinearModel::dense(w), data, split) + tau * penalty(reg, w);
}

double smoothness_bound(const IndexedDataset& data, Split split, int iterations) {
  const auto pairs = data.pairs(split);
  if (pairs.empty()) throw EmptySplit("split " + std::string(to_string(split)) + " is empty");
  const auto n = static_cast<Eigen::Index>(data.dim());
  Matrix second = Matrix::Zero(n, n);
  for (const auto& p : pairs) {
    const Vector phi = data.query_matrix().row(static_cast<Eigen::Index>(p.query)).transpose();
    second.noalias() += p.weight * phi * phi.transpose();
  }

  Vector x = Vector::Ones(n).normalized();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector y = second * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    lambda = x.dot(y);
    x = y / norm;
  }
  lambda = std::max(lambda, x.dot(second * x));
  const double max_cand = data.candidate_matrix().rowwise().squaredNorm().maxCoeff();
  return lambda * max_cand;
}

std::size_t complexity(Regularizer reg, const Matrix& w) {
  return reg == Regularizer::nuclear ? numerical_rank(w) : nnz(w);
}

std::uint64_t operator_ops(Regularizer reg, const Matrix& w, std::size_t n_candidates) {
  const auto n = static_cast<std::size_t>(w.rows());
  switch (reg) {
    case Regularizer::nuclear: return factorized_ops(n, numerical_rank(w), n_candidates);
    case Regularizer::l1: return sparse_ops(nnz(w), n, n_candidates);
    case Regularizer::l2: return dense_ops(n, n_candidates);
  }
  return 0;
}

BilinearModel finalize_operator(Regularizer reg, const Matrix& w) {
  switch (reg) {
    case Regularizer::nuclear: return factorize(w, kRankTolerance);
    case Regularizer::l1: return BilinearModel::dense(w, true);
    case Regularizer::l2: break;
  }
  return BilinearModel::dense(w);
}

TrainedModel train(const TrainConfig& cfg, const IndexedDataset& data) {
  cfg.validate();
  const auto train_pairs = data.pairs(Split::train);
  if (train_pairs.empty()) throw EmptySplit("train split is empty");
  if (data.pairs(Split::dev).empty()) throw EmptySplit("dev split is empty");

  const auto n = static_cast<Eigen::Index>(data.dim());
  const std::size_t m = data.num_candidates();
  const double total_weight = data.total_weight(Split::train);

  Matrix w = Matrix::Zero(n, n);
  const double initial_nll = nll(BilinearModel::dense(w), data, Split::train);

  std::vector<WeightedPair> order(train_pairs.begin(), train_pairs.end());
  std::mt19937_64 rng(cfg.seed);
  const std::size_t batch = cfg.batch.is_full() ? order.size()
                                                : std::min(cfg.batch.size, order.size());

  TrainedModel out{BilinearModel::dense(w), {}, 0, cfg};
  Matrix best_w = w;
  double best_acc = -1.0;
  int since_best = 0;
  long long step = 0;
  double pending_eta = 0.0;  // step sizes accumulated since the last prox

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double eta = cfg.step0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const std::span<const WeightedPair> chunk(order.data() + start, end - start);
      ++step;
      eta = cfg.schedule == Schedule::constant ? cfg.step0
                                               : cfg.step0 / std::sqrt(static_cast<double>(step));
      double chunk_weight = 0.0;
      for (const auto& p : chunk) chunk_weight += p.weight;

      const Matrix grad = gradient(BilinearModel::dense(w), data, chunk) / chunk_weight;
      w = fobos_step(w, grad, eta, cfg.regularizer, cfg.tau, false);
      pending_eta += eta;
      const bool epoch_end = end == order.size();
      if (step % cfg.prox_period == 0 || epoch_end) {
        w = prox(cfg.regularizer, w, pending_eta * cfg.tau / total_weight);
        pending_eta = 0.0;
      }
      if (!w.allFinite()) throw DivergenceError(epoch, eta, "operator became non-finite");
    }

    const BilinearModel current = BilinearModel::dense(w);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.nll = nll(current, data, Split::train);
    if (!std::isfinite(rec.nll)) throw DivergenceError(epoch, eta, "training NLL is not finite");
    if (rec.nll > 10.0 * initial_nll)
      throw DivergenceError(epoch, eta, "training NLL exceeds 10x its initial value");
    rec.objective = rec.nll + cfg.tau * penalty(cfg.regularizer, w);
    rec.dev_accuracy = pairwise_accuracy(current, data, Split::dev).accuracy;
    rec.rank_or_nnz = complexity(cfg.regularizer, w);
    rec.ops = operator_ops(cfg.regularizer, w, m);
    out.history.push_back(rec);

    if (rec.dev_accuracy > best_acc) {
      best_acc = rec.dev_accuracy;
      best_w = w;
      out.selected_epoch = epoch;
      since_best = 0;
    } else if (cfg.early_stop_patience > 0 && ++since_best >= cfg.early_stop_patience) {
      break;
    }
  }

  out.model = finalize_operator(cfg.regularizer, best_w);
  out.model.query_rep = data.query_ref();
  out.model.candidate_rep = data.candidate_ref();
  return out;
}

std::vector<SweepCell> sweep(std::span<const TrainConfig> cfgs, const IndexedDataset& data) {
  if (cfgs.empty()) throw InvalidArgument("sweep needs at least one config");
  std::vector<SweepCell> cells;
  cells.reserve(cfgs.size());
  for (const auto& cfg : cfgs) {
    SweepCell cell{cfg, std::nullopt, {}};
    try {
      cell.result = train(cfg, data);
    } catch (const Error& e) {
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace bilex
