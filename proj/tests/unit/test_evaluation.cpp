#include <gtest/gtest.h>

#include <algorithm>
#include <iterator>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "bilex/error.hpp"
#include "bilex/evaluation.hpp"
#include "bilex/training.hpp"
#include "planted.hpp"

using namespace bilex;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

const synth::PlantedInstance& planted() {
  static const synth::PlantedInstance inst = synth::make_planted({});
  return inst;
}

const IndexedDataset& planted_data() {
  static const IndexedDataset data(planted().data, planted().rep, planted().rep);
  return data;
}

const TrainedModel& planted_model() {
  static const TrainedModel m = train(synth::planted_train_config(30.0), planted_data());
  return m;
}

EvalReport report(std::string label, double acc, std::uint64_t ops) {
  EvalReport r;
  r.label = std::move(label);
  r.accuracy = acc;
  r.ops = ops;
  r.model_desc = "m";
  return r;
}

}  // namespace

TEST(PairAccuracy, HandExample) {
  const std::vector<std::size_t> golds{0};
  EXPECT_DOUBLE_EQ(*pair_accuracy(vec({2, 1, 3}), 0, golds), 0.5);
}

TEST(PairAccuracy, PerfectAndConstant) {
  const std::vector<std::size_t> golds{1};
  EXPECT_DOUBLE_EQ(*pair_accuracy(vec({0, 5, 1, 2}), 1, golds), 1.0);
  EXPECT_DOUBLE_EQ(*pair_accuracy(vec({7, 7, 7, 7}), 1, golds), 0.5);
}

TEST(PairAccuracy, OtherGoldsExcluded) {
  const std::vector<std::size_t> golds{0, 1};
  EXPECT_DOUBLE_EQ(*pair_accuracy(vec({2, 3, 1}), 0, golds), 1.0);
  const std::vector<std::size_t> all{0, 1, 2};
  EXPECT_FALSE(pair_accuracy(vec({2, 3, 1}), 0, all).has_value());
}

TEST(PairwiseAccuracy, MonotoneTransformInvariant) {
  const auto& data = planted_data();
  std::mt19937_64 rng(1);
  const Matrix w = synth::gaussian(30, 30, rng);
  const auto m = BilinearModel::dense(w);
  auto raw = [&](std::size_t q) { return score_all(m, data.query_matrix().row(q).transpose(), data.candidate_matrix()); };
  auto cubed = [&](std::size_t q) -> Vector { return raw(q).array().cube(); };
  const double a = pairwise_accuracy(raw, data, Split::dev).accuracy;
  EXPECT_DOUBLE_EQ(pairwise_accuracy(cubed, data, Split::dev).accuracy, a);
  auto bounded = [&](std::size_t q) -> Vector { return (raw(q) / 1e3).array().tanh(); };
  EXPECT_DOUBLE_EQ(pairwise_accuracy(bounded, data, Split::dev).accuracy, a);
}

TEST(PairwiseAccuracy, NegationComplements) {
  const auto& data = planted_data();
  std::mt19937_64 rng(2);
  const auto m = BilinearModel::dense(synth::gaussian(30, 30, rng));
  const auto neg = BilinearModel::dense(-m.weights());
  const double a = pairwise_accuracy(m, data, Split::test).accuracy;
  const double b = pairwise_accuracy(neg, data, Split::test).accuracy;
  EXPECT_NEAR(a + b, 1.0, 1e-12);
}

TEST(PairwiseAccuracy, ConstantScorerIsHalf) {
  const auto& data = planted_data();
  const auto m = BilinearModel::dense(Matrix::Zero(30, 30));
  EXPECT_DOUBLE_EQ(pairwise_accuracy(m, data, Split::test).accuracy, 0.5);
}

TEST(PairwiseAccuracy, RandomScorerIsCalibrated) {
  const auto& data = planted_data();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double sum = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    auto random = [&](std::size_t) {
      Vector s(static_cast<Eigen::Index>(data.num_candidates()));
      for (Eigen::Index j = 0; j < s.size(); ++j) s(j) = u(rng);
      return s;
    };
    sum += pairwise_accuracy(random, data, Split::test).accuracy;
  }
  EXPECT_NEAR(sum / reps, 0.5, 0.01);
}

TEST(PairwiseAccuracy, Errors) {
  RelationDataset d;
  d.candidates = {"c0"};
  d.pairs = {{"q", "c0", 1}};
  d.split_of["q"] = Split::train;
  const Representation rep(Vocabulary({"q", "c0"}), Matrix::Identity(2, 2));
  const IndexedDataset data(d, rep, rep);
  const auto m = BilinearModel::dense(Matrix::Identity(2, 2));
  EXPECT_THROW(pairwise_accuracy(m, data, Split::dev), EmptySplit);
  EXPECT_THROW(pairwise_accuracy(m, data, Split::train), DataError);
}

TEST(Unsupervised, FullRankEqualsInnerProducts) {
  // Dense Gaussian vectors: sparse ones tie at exactly zero, and projection
  // round-off would break those ties.
  const auto& inst = planted();
  std::mt19937_64 rng(4);
  const Representation dense(inst.rep.vocab(), synth::gaussian(400, 12, rng));
  const EvalReport full = eval_unsupervised(dense, 12, inst.data, Split::test);
  const IndexedDataset data(inst.data, dense, dense);
  const double raw = pairwise_accuracy(BilinearModel::dense(Matrix::Identity(12, 12)), data, Split::test).accuracy;
  EXPECT_DOUBLE_EQ(full.accuracy, raw);
  EXPECT_EQ(full.ops, factorized_ops(12, 12, 200));
  EXPECT_THROW(eval_unsupervised(inst.rep, 0, inst.data, Split::test), InvalidRank);
}

TEST(Unsupervised, SupervisedModelIsBetter) {
  const auto& m = planted_model();
  const double sup = pairwise_accuracy(m.model, planted_data(), Split::test).accuracy;
  const double unsup = eval_unsupervised(planted().rep, m.model.rank(), planted().data, Split::test).accuracy;
  EXPECT_GT(sup - unsup, 0.05);
}

TEST(Curve, SingleAndDuplicateOps) {
  std::vector<EvalReport> one{report("a", 0.7, 10)};
  EXPECT_EQ(tradeoff_curve(one).points.size(), 1u);
  std::vector<EvalReport> two{report("a", 0.7, 10), report("b", 0.8, 10), report("c", 0.6, 5)};
  const TradeoffCurve c = tradeoff_curve(two);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0].ops, 5u);
  EXPECT_EQ(c.points[1].label, "b");
  EXPECT_DOUBLE_EQ(c.points[1].accuracy, 0.8);
}

TEST(TopCandidates, IdentityRanksByInnerProduct) {
  Matrix v(4, 2);
  v << 1, 0.5,  // q
      1, 0,     // a
      0, 1,     // b
      2, 2;     // c
  const Representation rep(Vocabulary({"q", "a", "b", "c"}), v);
  const std::vector<std::string> cands{"a", "b", "c"};
  const auto m = BilinearModel::dense(Matrix::Identity(2, 2));
  const Ranked top = top_candidates(m, "q", 10, rep, rep, cands);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].first, "c");
  EXPECT_EQ(top[1].first, "a");
  EXPECT_EQ(top[2].first, "b");
  EXPECT_EQ(top_candidates(m, "q", 1, rep, rep, cands).size(), 1u);
  EXPECT_THROW(top_candidates(m, "zz", 1, rep, rep, cands), UnknownWord);
}

TEST(TopCandidates, TiesAreLexicographic) {
  const Representation rep(Vocabulary({"q", "b", "a"}), Matrix::Ones(3, 1));
  const std::vector<std::string> cands{"b", "a"};
  const Ranked top = top_candidates(BilinearModel::dense(Matrix::Identity(1, 1)), "q", 2, rep, rep, cands);
  EXPECT_EQ(top[0].first, "a");
}

TEST(TopCandidates, FollowsDistributionOrder) {
  const auto& m = planted_model();
  const auto& data = planted_data();
  const std::string q = data.query_words()[0];
  const Ranked top = top_candidates(m.model, q, 200, planted().rep, planted().rep, data.candidate_words());
  const Vector p = distribution(m.model, planted().rep.vector(q), data.candidate_matrix());
  for (std::size_t i = 1; i < top.size(); ++i) {
    const auto a = std::find(data.candidate_words().begin(), data.candidate_words().end(), top[i - 1].first);
    const auto b = std::find(data.candidate_words().begin(), data.candidate_words().end(), top[i].first);
    EXPECT_GE(p(a - data.candidate_words().begin()), p(b - data.candidate_words().begin()));
  }
}

TEST(TopCandidates, GoldsRankHighForTrainingQueries) {
  const auto& m = planted_model();
  const auto& inst = planted();
  double mrr = 0.0;
  const auto queries = inst.data.queries(Split::train);
  for (const auto& q : queries) {
    std::set<std::string> golds;
    for (const auto& p : inst.data.pairs)
      if (p.query == q) golds.insert(p.candidate);
    const Ranked top = top_candidates(m.model, q, 200, inst.rep, inst.rep, inst.data.candidates);
    for (std::size_t r = 0; r < top.size(); ++r)
      if (golds.count(top[r].first)) {
        mrr += 1.0 / static_cast<double>(r + 1);
        break;
      }
  }
  EXPECT_GE(mrr / static_cast<double>(queries.size()), 0.5);
}

TEST(Neighbors, DuplicateVectorIsNearest) {
  Matrix v(3, 2);
  v << 1, 2, 1, 2, -1, 0.5;
  const Representation rep(Vocabulary({"a", "b", "c"}), v);
  const Ranked n = query_neighbors(rep, "a", 2);
  EXPECT_EQ(n[0].first, "b");
  EXPECT_NEAR(n[0].second, 1.0, 1e-12);
}

TEST(Neighbors, OrthogonalFallsBackToLexicographic) {
  const Representation rep(Vocabulary({"d", "c", "b", "a"}), Matrix::Identity(4, 4));
  const Ranked n = query_neighbors(rep, "c", 3);
  ASSERT_EQ(n.size(), 3u);
  EXPECT_EQ(n[0].first, "a");
  EXPECT_EQ(n[1].first, "b");
  EXPECT_EQ(n[2].first, "d");
  for (const auto& [w, cos] : n) EXPECT_EQ(cos, 0.0);
}

TEST(Neighbors, DegenerateAndUnknown) {
  Matrix v = Matrix::Identity(3, 2);
  const Representation rep(Vocabulary({"a", "b", "z"}), v);
  EXPECT_THROW(query_neighbors(rep, "z", 1), DegenerateVector);
  EXPECT_THROW(query_neighbors(rep, "nope", 1), UnknownWord);
}

TEST(Neighbors, DependOnTheRelation) {
  synth::PlantedConfig other;
  other.operator_seed = 1234;
  const auto inst_b = synth::make_planted(other);
  ASSERT_EQ(inst_b.rep.fingerprint(), planted().rep.fingerprint());
  const IndexedDataset data_b(inst_b.data, inst_b.rep, inst_b.rep);
  const TrainedModel mb = train(synth::planted_train_config(30.0), data_b);
  const Representation ea = export_embeddings(planted_model().model, Side::query, planted().rep);
  const Representation eb = export_embeddings(mb.model, Side::query, inst_b.rep);
  double jaccard_sum = 0.0;
  int count = 0;
  for (int i = 0; i < 200; i += 20) {
    const std::string q = synth::query_name(i);
    std::set<std::string> a, b, both;
    for (const auto& [w, c] : query_neighbors(ea, q, 5)) a.insert(w);
    for (const auto& [w, c] : query_neighbors(eb, q, 5)) b.insert(w);
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(both, both.begin()));
    jaccard_sum += static_cast<double>(both.size()) / static_cast<double>(a.size() + b.size() - both.size());
    ++count;
  }
  EXPECT_LT(jaccard_sum / count, 1.0);
}

TEST(Reports, CsvAndJsonRoundTrip) {
  std::vector<EvalReport> reports{report("plain", 0.75, 100), report("with,comma \"q\"", 0.5, 7)};
  std::stringstream csv;
  write_reports_csv(csv, reports);
  auto back = read_reports(csv);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].label, "with,comma \"q\"");
  EXPECT_EQ(back[0].ops, 100u);
  EXPECT_DOUBLE_EQ(back[0].accuracy, 0.75);
  std::stringstream json;
  write_reports_json(json, reports);
  back = read_reports(json);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].label, "with,comma \"q\"");
}

TEST(Reports, CurveCsvHeader) {
  std::vector<EvalReport> reports{report("a", 0.75, 100)};
  std::stringstream out;
  write_curve_csv(out, tradeoff_curve(reports));
  std::string header;
  std::getline(out, header);
  EXPECT_EQ(header, "ops,accuracy,label");
}
