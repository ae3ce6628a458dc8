#include "bilex/representation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "bilex/error.hpp"
#include "bilex/hash.hpp"
#include "bilex/text.hpp"

namespace bilex {

Representation::Representation(Vocabulary vocab, Matrix vectors,
                               std::vector<std::string> context_labels)
    : vocab_(std::move(vocab)),
      dim_(static_cast<std::size_t>(vectors.cols())),
      storage_(std::move(vectors)),
      labels_(std::move(context_labels)) {
  const auto& m = std::get<Matrix>(storage_);
  if (vocab_.empty()) throw InvalidArgument("representation needs at least one word");
  if (dim_ == 0) throw InvalidArgument("representation dimension must be positive");
  if (static_cast<std::size_t>(m.rows()) != vocab_.size())
    throw DimensionError("representation has " + std::to_string(m.rows()) +
                         " rows for " + std::to_string(vocab_.size()) + " words");
  if (!labels_.empty() && labels_.size() != dim_)
    throw DimensionError("context label count differs from dimension");
  require_finite(m, "representation");
}

Representation::Representation(Vocabulary vocab, SparseRows vectors,
                               std::vector<std::string> context_labels)
    : vocab_(std::move(vocab)),
      dim_(static_cast<std::size_t>(vectors.cols())),
      storage_(std::move(vectors)),
      labels_(std::move(context_labels)) {
  auto& m = std::get<SparseRows>(storage_);
  m.makeCompressed();
  if (vocab_.empty()) throw InvalidArgument("representation needs at least one word");
  if (dim_ == 0) throw InvalidArgument("representation dimension must be positive");
  if (static_cast<std::size_t>(m.rows()) != vocab_.size())
    throw DimensionError("representation has " + std::to_string(m.rows()) +
                         " rows for " + std::to_string(vocab_.size()) + " words");
  if (!labels_.empty() && labels_.size() != dim_)
    throw DimensionError("context label count differs from dimension");
  for (Eigen::Index k = 0; k < m.nonZeros(); ++k)
    if (!std::isfinite(m.valuePtr()[k])) throw NumericError("representation has non-finite entries");
}

Vector Representation::row(std::size_t i) const {
  if (i >= size()) throw InvalidArgument("row index out of range");
  const auto r = static_cast<Eigen::Index>(i);
  if (const auto* d = std::get_if<Matrix>(&storage_)) return d->row(r).transpose();
  const auto& s = std::get<SparseRows>(storage_);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (SparseRows::InnerIterator it(s, r); it; ++it) v(it.col()) = it.value();
  return v;
}

Vector Representation::vector(std::string_view word) const {
  return row(vocab_.index(word));
}

Matrix Representation::gather(std::span<const std::string> words) const {
  Matrix out(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < words.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = vector(words[i]).transpose();
  return out;
}

Matrix Representation::dense() const {
  if (const auto* d = std::get_if<Matrix>(&storage_)) return *d;
  return Matrix(std::get<SparseRows>(storage_));
}

Matrix Representation::multiply(const Matrix& right) const {
  if (static_cast<std::size_t>(right.rows()) != dim_)
    throw DimensionError("projection has " + std::to_string(right.rows()) + " rows, expected " +
                         std::to_string(dim_));
  if (const auto* d = std::get_if<Matrix>(&storage_)) return *d * right;
  return std::get<SparseRows>(storage_) * right;
}

Representation Representation::to_dense() const {
  return Representation(vocab_, dense(), labels_);
}

Representation Representation::to_sparse() const {
  if (const auto* s = std::get_if<SparseRows>(&storage_)) return Representation(vocab_, *s, labels_);
  SparseRows s = std::get<Matrix>(storage_).sparseView(0.0, 0.0);
  return Representation(vocab_, std::move(s), labels_);
}

std::uint64_t Representation::fingerprint() const {
  Fnv1a h;
  h.update_u64(dim_);
  h.update_u64(size());
  for (std::size_t i = 0; i < size(); ++i) {
    h.update(vocab_.word(i));
    const Vector v = row(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (v(j) == 0.0) continue;
      h.update_u64(static_cast<std::uint64_t>(j));
      h.update_double(v(j));
    }
  }
  return h.digest();
}

BowResult build_bow(std::span<const std::vector<std::string>> sentences, const BowConfig& cfg) {
  if (cfg.window < 1) throw InvalidArgument("bow window must be >= 1");
  if (cfg.dim < 1) throw InvalidArgument("bow dim must be >= 1");
  if (cfg.min_count < 0) throw InvalidArgument("bow min_count must be >= 0");

  Vocabulary vocab = build_vocab(sentences);

  std::vector<long long> freq(vocab.size(), 0);
  for (const auto& s : sentences)
    for (const auto& t : s) ++freq[*vocab.find(t)];

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (freq[i] >= cfg.min_count) eligible.push_back(i);
  std::sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
    if (freq[a] != freq[b]) return freq[a] > freq[b];
    return vocab.word(a) < vocab.word(b);
  });

  std::vector<std::string> warnings;
  if (eligible.empty()) throw InvalidArgument("no context words satisfy min_count");
  std::size_t dim = static_cast<std::size_t>(cfg.dim);
  if (eligible.size() < dim) {
    warnings.push_back("only " + std::to_string(eligible.size()) +
                       " distinct context words available; dimension truncated from " +
                       std::to_string(dim));
    dim = eligible.size();
  }

  std::vector<int> context_of(vocab.size(), -1);
  std::vector<std::string> labels;
  labels.reserve(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    context_of[eligible[d]] = static_cast<int>(d);
    labels.push_back(vocab.word(eligible[d]));
  }

  std::vector<std::map<int, double>> counts(vocab.size());
  const auto w = static_cast<std::ptrdiff_t>(cfg.window);
  std::vector<std::size_t> ids;
  for (const auto& s : sentences) {
    ids.clear();
    for (const auto& t : s) ids.push_back(*vocab.find(t));
    const auto len = static_cast<std::ptrdiff_t>(ids.size());
    for (std::ptrdiff_t i = 0; i < len; ++i) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - w);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, i + w);
      for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        const int d = context_of[ids[static_cast<std::size_t>(j)]];
        if (d >= 0) counts[ids[static_cast<std::size_t>(i)]][d] += 1.0;
      }
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    for (const auto& [d, c] : counts[r]) {
      const double v = cfg.weighting == Weighting::log1p ? std::log1p(c) : c;
      triplets.emplace_back(static_cast<int>(r), d, v);
    }
  }
  SparseRows m(static_cast<Eigen::Index>(vocab.size()), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return BowResult{Representation(std::move(vocab), std::move(m), std::move(labels)),
                   std::move(warnings)};
}

Representation svd_project(const Representation& rep, std::size_t k) {
  const std::size_t bound = std::min(rep.size(), rep.dim());
  if (k == 0 || k > bound)
    throw InvalidRank("projection rank " + std::to_string(k) + " outside [1, " +
                      std::to_string(bound) + "]");
  const Matrix phi = rep.dense();
  SvdResult d = svd(phi);
  Matrix basis = d.right.leftCols(static_cast<Eigen::Index>(k));
  canonicalize_signs(basis);
  return Representation(rep.vocab(), rep.multiply(basis));
}

Representation import_vectors(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t count = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != 2 || !parse_size(fields[0], count) || !parse_size(fields[1], dim) ||
        dim == 0)
      throw FormatError(line_no, "expected header \"<count> <dim>\"");
    break;
  }
  if (dim == 0) throw FormatError(line_no, "missing embedding header");

  Vocabulary vocab;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1)
      throw FormatError(line_no, "expected " + std::to_string(dim) + " values, found " +
                                     std::to_string(fields.size() - 1));
    if (vocab.contains(fields[0]))
      throw FormatError(line_no, "duplicate word \"" + std::string(fields[0]) + "\"");
    std::vector<double> values(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_double(fields[j + 1], values[j]) || !std::isfinite(values[j]))
        throw FormatError(line_no, "bad value \"" + std::string(fields[j + 1]) + "\"");
    }
    vocab.add(fields[0]);
    rows.push_back(std::move(values));
  }
  if (rows.size() != count)
    throw FormatError(line_no, "header declares " + std::to_string(count) + " rows, found " +
                                   std::to_string(rows.size()));
  if (rows.empty()) throw FormatError(line_no, "no embedding rows");

  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return Representation(std::move(vocab), std::move(m));
}

Representation import_vectors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return import_vectors(in);
}

void write_vectors(std::ostream& out, const Representation& rep) {
  out << rep.size() << ' ' << rep.dim() << '\n';
  for (std::size_t i = 0; i < rep.size(); ++i) {
    out << rep.vocab().word(i);
    const Vector v = rep.row(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) out << ' ' << format_g9(v(j));
    out << '\n';
  }
}

void write_vectors_file(const std::string& path, const Representation& rep) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_vectors(out, rep);
  if (!out) throw Error("write failed: " + path);
}

std::string_view to_string(Weighting w) {
  return w == Weighting::log1p ? "log1p" : "raw_count";
}

Weighting parse_weighting(std::string_view s) {
  if (s == "raw_count" || s == "raw") return Weighting::raw_count;
  if (s == "log1p") return Weighting::log1p;
  throw InvalidArgument("unknown weighting: " + std::string(s));
}

}  // namespace bilex
