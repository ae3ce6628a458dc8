#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bilex/numerics.hpp"
#include "bilex/representation.hpp"

namespace bilex {

/// One (query, candidate) observation with multiplicity.
struct PairRow {
  std::string query;
  std::string candidate;
  long long count = 1;

  friend bool operator==(const PairRow&, const PairRow&) = default;
};

enum class Split { train, dev, test };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

/// Labeled pairs plus the candidate set M and a query-word partition.
/// Splits partition query words, so test pairs always involve unseen queries.
struct RelationDataset {
  std::vector<std::string> candidates;
  std::vector<PairRow> pairs;
  std::map<std::string, Split> split_of;

  std::vector<std::string> queries() const;
  std::vector<std::string> queries(Split s) const;
  std::vector<PairRow> pairs_in(Split s) const;

  /// Throws DataError if a pair's query has no split or its candidate is
  /// not in `candidates`.
  void validate() const;
};

/// Identifies the representation a model was trained against.
struct RepRef {
  std::string id;
  std::uint64_t hash = 0;

  friend bool operator==(const RepRef&, const RepRef&) = default;
};

struct WeightedPair {
  std::size_t query;
  std::size_t candidate;
  double weight;
};

/// A RelationDataset resolved against query/candidate representations:
/// words become row indices and vectors are gathered into dense matrices.
class IndexedDataset {
 public:
  IndexedDataset(const RelationDataset& data, const Representation& query_rep,
                 const Representation& candidate_rep, std::string query_rep_id = "",
                 std::string candidate_rep_id = "");

  std::size_t dim() const { return static_cast<std::size_t>(candidates_.cols()); }
  std::size_t num_candidates() const { return candidate_words_.size(); }

  /// |M| x n, row j = phi(candidate j).
  const Matrix& candidate_matrix() const { return candidates_; }
  /// |H| x n, row i = phi(query i).
  const Matrix& query_matrix() const { return queries_; }

  const std::vector<std::string>& candidate_words() const { return candidate_words_; }
  const std::vector<std::string>& query_words() const { return query_words_; }

  /// Distinct (query, candidate) pairs of a split; repeated rows are merged
  /// into the weight.
  std::span<const WeightedPair> pairs(Split s) const;

  /// Indices of every gold candidate of query `q` (within its split).
  std::span<const std::size_t> golds(std::size_t q) const { return golds_[q]; }

  double total_weight(Split s) const;

  const RepRef& query_ref() const { return query_ref_; }
  const RepRef& candidate_ref() const { return candidate_ref_; }

 private:
  Matrix candidates_;
  Matrix queries_;
  std::vector<std::string> candidate_words_;
  std::vector<std::string> query_words_;
  std::vector<WeightedPair> by_split_[3];
  std::vector<std::vector<std::size_t>> golds_;
  RepRef query_ref_;
  RepRef candidate_ref_;
};

}  // namespace bilex
