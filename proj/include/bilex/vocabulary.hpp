#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bilex {

/// Bidirectional word <-> index map. Words keep insertion order.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Builds from a list of unique words; throws InvalidArgument on duplicates.
  explicit Vocabulary(std::vector<std::string> words);

  /// Adds `word` if absent and returns its index.
  std::size_t add(std::string_view word);

  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  /// Index of `word`; throws UnknownWord when absent.
  std::size_t index(std::string_view word) const;

  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Distinct tokens of `tokens` in first-occurrence order. Throws EmptyCorpus
/// when there are none.
Vocabulary build_vocab(std::span<const std::string> tokens);

/// Same, over a sentence stream.
Vocabulary build_vocab(std::span<const std::vector<std::string>> sentences);

}  // namespace bilex
