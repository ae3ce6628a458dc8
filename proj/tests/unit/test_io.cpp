#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "bilex/error.hpp"
#include "bilex/io.hpp"
#include "planted.hpp"

using namespace bilex;

namespace {

std::size_t format_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no FormatError";
  return 0;
}

std::vector<PairRow> pairs_from(const std::string& text) {
  std::istringstream in(text);
  return parse_pairs(in);
}

const char* kConll =
    "# sent 1\n"
    "1\tthe\tthe\tDT\tDT\t_\t3\tdet\t_\t_\n"
    "2\tred\tred\tJJ\tJJ\t_\t3\tamod\t_\t_\n"
    "3\tcar\tcar\tNN\tNN\t_\t4\tnsubj\t_\t_\n"
    "4\tstops\tstop\tVB\tVBZ\t_\t0\troot\t_\t_\n"
    "\n";

ConllExtraction extract(const std::string& text, const std::string& pattern) {
  std::istringstream in(text);
  return extract_pairs_conll(in, parse_relation_pattern(pattern));
}

TrainedModel small_model(bool factorized) {
  std::mt19937_64 rng(5);
  TrainedModel m{factorized ? BilinearModel::factorized(synth::gaussian(4, 2, rng), synth::gaussian(4, 2, rng))
                            : BilinearModel::dense(synth::gaussian(4, 4, rng)),
                 {}, 2, TrainConfig{}};
  m.history.push_back({1, 10.5, 11.0, 0.6, 2, 100});
  m.history.push_back({2, 9.25, 9.5, 0.7, 2, 100});
  return m;
}

Representation small_rep(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return Representation(Vocabulary({"a", "b", "c"}), synth::gaussian(3, 4, rng));
}

}  // namespace

TEST(Pairs, Examples) {
  EXPECT_EQ(pairs_from("red\tcar\n"), (std::vector<PairRow>{{"red", "car", 1}}));
  EXPECT_EQ(pairs_from("red\tcar\t3\n"), (std::vector<PairRow>{{"red", "car", 3}}));
  EXPECT_EQ(format_error_line([] { pairs_from("red car\n"); }), 1u);
}

TEST(Pairs, RejectsMalformedRows) {
  EXPECT_EQ(format_error_line([] { pairs_from("a\tb\n\na\tb\t0\n"); }), 3u);
  EXPECT_EQ(format_error_line([] { pairs_from("a\tb\tx\n"); }), 1u);
  EXPECT_EQ(format_error_line([] { pairs_from("a\t\n"); }), 1u);
  EXPECT_EQ(format_error_line([] { pairs_from("a\tb\t1\t2\n"); }), 1u);
  EXPECT_THROW(pairs_from("\n\n"), EmptyData);
}

TEST(Pairs, WriteAndAggregate) {
  const std::vector<PairRow> rows{{"a", "x", 1}, {"b", "y", 2}, {"a", "x", 3}};
  const auto agg = aggregate_pairs(rows);
  EXPECT_EQ(agg, (std::vector<PairRow>{{"a", "x", 4}, {"b", "y", 2}}));
  std::stringstream out;
  write_pairs(out, agg);
  EXPECT_EQ(out.str(), "a\tx\t4\nb\ty\t2\n");
  EXPECT_EQ(parse_pairs(out), agg);
}

TEST(Conll, ExtractsHeadQuery) {
  const auto r = extract(kConll, "NN*:JJ*:amod:head");
  EXPECT_EQ(r.pairs, (std::vector<PairRow>{{"car", "red", 1}}));
}

TEST(Conll, ExtractsDependentQuery) {
  const auto r = extract(kConll, "NN*:JJ*:amod:dependent");
  EXPECT_EQ(r.pairs, (std::vector<PairRow>{{"red", "car", 1}}));
}

TEST(Conll, NoMatchWarns) {
  const auto r = extract(kConll, "NN*:RB*:advmod:head");
  EXPECT_TRUE(r.pairs.empty());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Conll, WildcardsAndRoot) {
  const auto r = extract(kConll, "*:*:*:head");
  EXPECT_EQ(r.pairs.size(), 3u);
}

TEST(Conll, MalformedLines) {
  EXPECT_EQ(format_error_line([] { extract("1\tred\tred\tJJ\n", "*:*:*:head"); }), 1u);
  EXPECT_EQ(format_error_line([] {
              extract("1\ta\ta\tNN\tNN\t_\t0\troot\t_\t_\n2\tb\tb\tNN\tNN\t_\t7\tdep\t_\t_\n", "*:*:*:head");
            }),
            2u);
  EXPECT_EQ(format_error_line([] {
              extract("1\ta\ta\tNN\tNN\t_\tx\troot\t_\t_\n", "*:*:*:head");
            }),
            1u);
  EXPECT_THROW(parse_relation_pattern("NN:JJ:amod"), InvalidArgument);
}

TEST(Split, ExactRatios) {
  std::vector<PairRow> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({"q" + std::to_string(i), "c" + std::to_string(i % 3), 1});
  const RelationDataset d = split_dataset(rows, {0.6, 0.2, 0.2}, 1);
  EXPECT_EQ(d.queries(Split::train).size(), 6u);
  EXPECT_EQ(d.queries(Split::dev).size(), 2u);
  EXPECT_EQ(d.queries(Split::test).size(), 2u);
  EXPECT_EQ(d.candidates, (std::vector<std::string>{"c0", "c1", "c2"}));
}

TEST(Split, DeterministicPartition) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    std::uniform_int_distribution<int> q(0, 40), c(0, 15);
    std::vector<PairRow> rows;
    for (int i = 0; i < 120; ++i) rows.push_back({"q" + std::to_string(q(rng)), "c" + std::to_string(c(rng)), 1});
    const auto a = split_dataset(rows, {0.6, 0.2, 0.2}, static_cast<std::uint64_t>(t));
    const auto b = split_dataset(rows, {0.6, 0.2, 0.2}, static_cast<std::uint64_t>(t));
    EXPECT_EQ(a.split_of, b.split_of);
    std::set<std::string> all;
    for (const auto& r : rows) all.insert(r.query);
    std::set<std::string> seen;
    std::size_t total = 0;
    for (Split s : {Split::train, Split::dev, Split::test}) {
      const auto qs = a.queries(s);
      total += qs.size();
      seen.insert(qs.begin(), qs.end());
    }
    EXPECT_EQ(seen, all);
    EXPECT_EQ(total, all.size());
  }
}

TEST(Split, Guards) {
  const std::vector<PairRow> two{{"a", "x", 1}, {"b", "x", 1}};
  EXPECT_THROW(split_dataset(two, {0.6, 0.2, 0.2}, 0), InsufficientData);
  const std::vector<PairRow> three{{"a", "x", 1}, {"b", "x", 1}, {"c", "x", 1}};
  EXPECT_THROW(split_dataset(three, {0.5, 0.2, 0.2}, 0), InvalidArgument);
}

TEST(Dataset, WriteReadRoundTrip) {
  const auto inst = synth::make_planted({});
  const std::string prefix = ::testing::TempDir() + "bilex_ds";
  write_dataset(prefix, inst.data);
  const RelationDataset back = read_dataset(prefix);
  EXPECT_EQ(back.candidates, inst.data.candidates);
  EXPECT_EQ(back.split_of, inst.data.split_of);
  for (Split s : {Split::train, Split::dev, Split::test}) EXPECT_EQ(back.pairs_in(s), inst.data.pairs_in(s));
}

TEST(Config, ParsesSubsetAndRejectsUnknown) {
  std::istringstream in(R"({"tau": 0.5, "batch": "full", "regularizer": "l1", "epochs": 3})");
  const TrainConfig c = parse_train_config(in, TrainConfig{});
  EXPECT_DOUBLE_EQ(c.tau, 0.5);
  EXPECT_TRUE(c.batch.is_full());
  EXPECT_EQ(c.regularizer, Regularizer::l1);
  EXPECT_EQ(c.prox_period, 1);
  std::istringstream unknown(R"({"taux": 1})");
  EXPECT_THROW(parse_train_config(unknown, TrainConfig{}), FormatError);
  std::istringstream invalid(R"({"tau": -1})");
  EXPECT_THROW(parse_train_config(invalid, TrainConfig{}), InvalidArgument);
  std::stringstream out;
  write_train_config(out, c);
  EXPECT_EQ(parse_train_config(out, TrainConfig{}), c);
}

TEST(ModelFile, RoundTripsBothEncodings) {
  std::mt19937_64 rng(9);
  const Matrix probes_q = synth::gaussian(5, 4, rng);
  const Matrix cands = synth::gaussian(6, 4, rng);
  for (bool factorized : {true, false})
    for (PayloadEncoding enc : {PayloadEncoding::binary, PayloadEncoding::text}) {
      const TrainedModel m = small_model(factorized);
      std::stringstream buf;
      save_model(buf, m, enc);
      const TrainedModel back = load_model(buf);
      EXPECT_EQ(back.history, m.history);
      EXPECT_EQ(back.selected_epoch, m.selected_epoch);
      EXPECT_EQ(back.config, m.config);
      EXPECT_EQ(back.model.is_factorized(), factorized);
      for (Eigen::Index i = 0; i < probes_q.rows(); ++i)
        EXPECT_EQ(score_all(back.model, probes_q.row(i).transpose(), cands),
                  score_all(m.model, probes_q.row(i).transpose(), cands));
    }
}

TEST(ModelFile, TruncationDetected) {
  std::stringstream buf;
  save_model(buf, small_model(true));
  const std::string full = buf.str();
  std::istringstream cut(full.substr(0, full.size() - 5));
  EXPECT_THROW(load_model(cut), FormatError);
  std::istringstream extra(full + "x");
  EXPECT_THROW(load_model(extra), FormatError);
}

TEST(ModelFile, VersionChecked) {
  std::stringstream buf;
  save_model(buf, small_model(false), PayloadEncoding::text);
  std::string s = buf.str();
  const auto pos = s.find("\"version\":1");
  ASSERT_NE(pos, std::string::npos);
  s.replace(pos, 11, "\"version\":9");
  std::istringstream in(s);
  EXPECT_THROW(load_model(in), VersionError);
}

TEST(ModelFile, RepresentationMismatch) {
  const Representation a = small_rep(1), b = small_rep(2);
  TrainedModel m = small_model(true);
  m.model.query_rep = RepRef{"a.vec", a.fingerprint()};
  m.model.candidate_rep = RepRef{"a.vec", a.fingerprint()};
  std::stringstream buf;
  save_model(buf, m);
  const std::string bytes = buf.str();
  {
    std::istringstream in(bytes);
    EXPECT_NO_THROW(load_model(in, {&a, &a, false}));
  }
  {
    std::istringstream in(bytes);
    EXPECT_THROW(load_model(in, {&b, &a, false}), RepresentationMismatch);
  }
  {
    std::istringstream in(bytes);
    EXPECT_NO_THROW(load_model(in, {&b, &b, true}));
  }
}

TEST(History, CsvColumns) {
  std::stringstream out;
  write_history_csv(out, small_model(true).history);
  std::string header;
  std::getline(out, header);
  EXPECT_EQ(header, "epoch,nll,dev_acc,rank_or_nnz,ops");
}
