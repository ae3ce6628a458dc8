#include "planted.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cstdio>
#include <numeric>

#include "bilex/io.hpp"
#include "bilex/model.hpp"

namespace bilex::synth {

std::string query_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%03d", i);
  return buf;
}

std::string candidate_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%03d", i);
  return buf;
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

Representation random_sparse_rep(const std::vector<std::string>& words, int n, int active,
                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value(0.5, 1.5);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(words.size()), n);
  std::vector<int> dims(static_cast<std::size_t>(n));
  std::iota(dims.begin(), dims.end(), 0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::shuffle(dims.begin(), dims.end(), rng);
    for (int a = 0; a < active; ++a) m(static_cast<Eigen::Index>(i), dims[static_cast<std::size_t>(a)]) = value(rng);
  }
  return Representation(Vocabulary(words), std::move(m));
}

PlantedInstance make_planted(const PlantedConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::string> words;
  std::vector<std::string> cands;
  for (int i = 0; i < cfg.queries; ++i) words.push_back(query_name(i));
  for (int i = 0; i < cfg.candidates; ++i) {
    words.push_back(candidate_name(i));
    cands.push_back(candidate_name(i));
  }
  Representation rep = random_sparse_rep(words, cfg.n, cfg.active_dims, rng);
  if (cfg.operator_seed != 0) rng.seed(cfg.operator_seed);

  Matrix w = gaussian(cfg.n, cfg.rank, rng) * gaussian(cfg.n, cfg.rank, rng).transpose();
  const Matrix q = rep.dense().topRows(cfg.queries);
  const Matrix c = rep.dense().bottomRows(cfg.candidates);
  Matrix scores = q * w * c.transpose();
  // Centre per query (softmax is shift invariant) before measuring spread.
  const Matrix centred = scores.colwise() - scores.rowwise().mean();
  const double sd = std::sqrt(centred.squaredNorm() / static_cast<double>(centred.size()));
  w *= cfg.score_scale / sd;
  scores *= cfg.score_scale / sd;

  std::vector<PairRow> pairs;
  for (int i = 0; i < cfg.queries; ++i) {
    const Vector p = softmax(scores.row(i).transpose());
    std::discrete_distribution<int> pick(p.data(), p.data() + p.size());
    for (int s = 0; s < cfg.samples_per_query; ++s)
      pairs.push_back({query_name(i), candidate_name(pick(rng)), 1});
  }
  pairs = aggregate_pairs(pairs);

  RelationDataset data = split_dataset(pairs, {0.6, 0.2, 0.2}, cfg.seed + 1);
  data.candidates = cands;
  return PlantedInstance{std::move(rep), std::move(data), std::move(w)};
}

TrainConfig planted_train_config(double tau, int epochs) {
  TrainConfig cfg = TrainConfig::defaults_for(Regularizer::nuclear);
  cfg.tau = tau;
  cfg.step0 = 20.0;
  cfg.epochs = epochs;
  return cfg;
}

RelationDataset make_uniform_pairs(const PlantedInstance& base, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& cands = base.data.candidates;
  std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
  RelationDataset out = base.data;
  out.pairs.clear();
  for (const auto& [q, split] : base.data.split_of) {
    (void)split;
    for (int s = 0; s < 5; ++s) out.pairs.push_back({q, cands[pick(rng)], 1});
  }
  out.pairs = aggregate_pairs(out.pairs);
  return out;
}

}  // namespace bilex::synth
