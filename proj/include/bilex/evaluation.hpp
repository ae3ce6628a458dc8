#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bilex/dataset.hpp"
#include "bilex/model.hpp"
#include "bilex/representation.hpp"

namespace bilex {

/// Fraction of non-gold candidates that `gold` outscores, ties counting
/// 0.5. Every index in `all_golds` is excluded from the comparison set.
/// Returns nullopt when no non-gold candidate remains.
std::optional<double> pair_accuracy(const Vector& scores, std::size_t gold,
                                    std::span<const std::size_t> all_golds);

/// Scores over the candidate set M for query row `q` of an IndexedDataset.
using QueryScores = std::function<Vector(std::size_t q)>;

struct AccuracyResult {
  double accuracy = 0.0;  // mean over distinct gold pairs
  std::vector<std::pair<std::size_t, double>> per_query;  // (query index, mean accuracy)
};

/// Per-gold-pair accuracy against all non-gold candidates, averaged over the
/// split's distinct gold pairs. Throws EmptySplit / DataError.
AccuracyResult pairwise_accuracy(const QueryScores& scores, const IndexedDataset& data,
                                 Split split);
AccuracyResult pairwise_accuracy(const BilinearModel& model, const IndexedDataset& data,
                                 Split split);

struct EvalReport {
  std::string label;
  double accuracy = 0.0;
  std::uint64_t ops = 0;
  std::string model_desc;
  std::vector<std::pair<std::string, double>> per_query;
};

/// Accuracy of `model` on `split`, with its op count over the full M.
EvalReport evaluate(const BilinearModel& model, const IndexedDataset& data, Split split,
                    std::string label, std::string model_desc);

/// Inner products of k-dimensional SVD projections of `rep`; charges the
/// query projection (2nk) plus candidate products (2k|M|).
EvalReport eval_unsupervised(const Representation& rep, std::size_t k,
                             const RelationDataset& data, Split split);

struct CurvePoint {
  std::uint64_t ops = 0;
  double accuracy = 0.0;
  std::string label;
};

struct TradeoffCurve {
  std::vector<CurvePoint> points;  // strictly ascending ops
};

/// Sorts by ops; for equal ops keeps the most accurate report (first on ties).
TradeoffCurve tradeoff_curve(std::span<const EvalReport> reports);

using Ranked = std::vector<std::pair<std::string, double>>;

/// Best `top_k` candidates of `query` by score, descending; ties lexicographic.
/// Throws UnknownWord when the query has no vector.
Ranked top_candidates(const BilinearModel& model, std::string_view query, std::size_t top_k,
                      const Representation& query_rep, const Representation& candidate_rep,
                      std::span<const std::string> candidates);

/// Nearest words to `word` by cosine similarity, excluding itself; ties
/// lexicographic. Zero-norm neighbours are skipped. Throws UnknownWord, or
/// DegenerateVector when `word` has a zero vector.
Ranked query_neighbors(const Representation& embeddings, std::string_view word,
                       std::size_t top_k);

void write_reports_csv(std::ostream& out, std::span<const EvalReport> reports);
void write_reports_json(std::ostream& out, std::span<const EvalReport> reports);
void write_curve_csv(std::ostream& out, const TradeoffCurve& curve);
void write_curve_json(std::ostream& out, const TradeoffCurve& curve);

/// Reads reports written by write_reports_csv / write_reports_json.
std::vector<EvalReport> read_reports(std::istream& in);

}  // namespace bilex
