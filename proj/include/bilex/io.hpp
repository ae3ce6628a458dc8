#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bilex/dataset.hpp"
#include "bilex/training.hpp"

namespace bilex {

// ---- corpus -------------------------------------------------------------

/// One sentence per line, tokens separated by spaces. Blank lines are skipped.
std::vector<std::vector<std::string>> read_corpus(std::istream& in);
std::vector<std::vector<std::string>> read_corpus_file(const std::string& path);

// ---- pair files ---------------------------------------------------------

/// "query<TAB>candidate[<TAB>count]" rows. Throws FormatError(line) on a
/// malformed row and EmptyData when there are no rows.
std::vector<PairRow> parse_pairs(std::istream& in);
std::vector<PairRow> parse_pairs_file(const std::string& path);
void write_pairs(std::ostream& out, std::span<const PairRow> pairs);

/// Merges rows with the same (query, candidate), summing counts; keeps
/// first-occurrence order.
std::vector<PairRow> aggregate_pairs(std::span<const PairRow> pairs);

// ---- CoNLL extraction ---------------------------------------------------

enum class QuerySide { head, dependent };

/// Edge filter. POS patterns match either POS column exactly, or by prefix
/// when they end in '*'; "*" matches anything. Same for the label.
struct RelationPattern {
  std::string head_pos = "*";
  std::string dep_pos = "*";
  std::string label = "*";
  QuerySide query_side = QuerySide::head;
};

/// Parses "HEADPOS:DEPPOS:LABEL:head|dependent", e.g. "NN*:JJ*:amod:head".
RelationPattern parse_relation_pattern(std::string_view text);

struct ConllExtraction {
  std::vector<PairRow> pairs;
  std::vector<std::string> warnings;
};

/// One pair per matching dependency edge of a 10-column CoNLL-X/CoNLL-U file.
ConllExtraction extract_pairs_conll(std::istream& in, const RelationPattern& pattern);

// ---- splits -------------------------------------------------------------

/// Partitions distinct query words (not pairs) by `ratios` after a seeded
/// shuffle. Candidates are the distinct candidate words, sorted.
RelationDataset split_dataset(std::span<const PairRow> pairs, std::array<double, 3> ratios,
                              std::uint64_t seed);

/// <prefix>.{train,dev,test}.tsv plus <prefix>.candidates.txt.
void write_dataset(const std::string& prefix, const RelationDataset& data);
RelationDataset read_dataset(const std::string& prefix);

// ---- configs and history -------------------------------------------------

/// JSON object with any subset of the TrainConfig fields; missing fields
/// keep the values of `base`.
TrainConfig parse_train_config(std::istream& in, const TrainConfig& base);
void write_train_config(std::ostream& out, const TrainConfig& cfg);

/// Columns: epoch,nll,dev_acc,rank_or_nnz,ops.
void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

// ---- model archive ------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

enum class PayloadEncoding { binary, text };

/// Header line (JSON) followed by the matrices as little-endian float64, or
/// as shortest round-trip decimals one per line.
void save_model(std::ostream& out, const TrainedModel& m,
                PayloadEncoding encoding = PayloadEncoding::binary);
void save_model_file(const std::string& path, const TrainedModel& m,
                     PayloadEncoding encoding = PayloadEncoding::binary);

/// Optional representations are checked against the recorded fingerprints;
/// a mismatch throws RepresentationMismatch unless `allow_mismatch`.
struct LoadOptions {
  const Representation* query_rep = nullptr;
  const Representation* candidate_rep = nullptr;
  bool allow_mismatch = false;
};

TrainedModel load_model(std::istream& in, const LoadOptions& opts = {});
TrainedModel load_model_file(const std::string& path, const LoadOptions& opts = {});

}  // namespace bilex
