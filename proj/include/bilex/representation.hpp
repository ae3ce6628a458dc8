#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bilex/numerics.hpp"
#include "bilex/vocabulary.hpp"

namespace bilex {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A word -> R^n map. Row i of the storage holds the vector of vocab word i.
/// Immutable once built.
class Representation {
 public:
  Representation(Vocabulary vocab, Matrix vectors,
                 std::vector<std::string> context_labels = {});
  Representation(Vocabulary vocab, SparseRows vectors,
                 std::vector<std::string> context_labels = {});

  const Vocabulary& vocab() const { return vocab_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vocab_.size(); }
  bool is_sparse() const { return std::holds_alternative<SparseRows>(storage_); }
  bool contains(std::string_view word) const { return vocab_.contains(word); }

  /// Names of the dimensions (BoW context words); empty when unnamed.
  const std::vector<std::string>& context_labels() const { return labels_; }

  Vector row(std::size_t i) const;
  /// Throws UnknownWord.
  Vector vector(std::string_view word) const;

  /// Stacks the vectors of `words` as rows. Throws UnknownWord.
  Matrix gather(std::span<const std::string> words) const;

  /// All vectors as a dense size() x dim() matrix.
  Matrix dense() const;

  /// dense() * right, without densifying sparse storage.
  Matrix multiply(const Matrix& right) const;

  Representation to_dense() const;
  Representation to_sparse() const;

  /// Content hash over words and non-zero values; equal for the dense and
  /// sparse storage of the same vectors.
  std::uint64_t fingerprint() const;

 private:
  Vocabulary vocab_;
  std::size_t dim_ = 0;
  std::variant<Matrix, SparseRows> storage_;
  std::vector<std::string> labels_;
};

enum class Weighting { raw_count, log1p };

struct BowConfig {
  int window = 10;
  int dim = 2000;
  int min_count = 0;
  Weighting weighting = Weighting::raw_count;
};

struct BowResult {
  Representation rep;
  std::vector<std::string> warnings;
};

/// Bag-of-words context counts. Dimensions are the `cfg.dim` most frequent
/// tokens with count >= min_count (ties lexicographic). Windows are clipped
/// at sentence boundaries and never include the target position itself.
BowResult build_bow(std::span<const std::vector<std::string>> sentences,
                    const BowConfig& cfg);

/// Projects every vector onto the top-k right singular vectors of the
/// stacked matrix. No singular-value scaling.
Representation svd_project(const Representation& rep, std::size_t k);

/// Reads "<count> <dim>" then "<word> <v1> ... <vdim>" rows.
Representation import_vectors(std::istream& in);
Representation import_vectors_file(const std::string& path);

/// Writes the same format with 9 significant digits.
void write_vectors(std::ostream& out, const Representation& rep);
void write_vectors_file(const std::string& path, const Representation& rep);

std::string_view to_string(Weighting w);
Weighting parse_weighting(std::string_view s);

}  // namespace bilex
