#include "bilex/vocabulary.hpp"

#include "bilex/error.hpp"

namespace bilex {

Vocabulary::Vocabulary(std::vector<std::string> words) {
  words_.reserve(words.size());
  for (auto& w : words) {
    if (index_.contains(w)) throw InvalidArgument("duplicate word in vocabulary: " + w);
    index_.emplace(w, words_.size());
    words_.push_back(std::move(w));
  }
}

std::size_t Vocabulary::add(std::string_view word) {
  std::string key(word);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  const std::size_t i = words_.size();
  index_.emplace(key, i);
  words_.push_back(std::move(key));
  return i;
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::index(std::string_view word) const {
  auto i = find(word);
  if (!i) throw UnknownWord("unknown word: " + std::string(word));
  return *i;
}

Vocabulary build_vocab(std::span<const std::string> tokens) {
  Vocabulary v;
  for (const auto& t : tokens) v.add(t);
  if (v.empty()) throw EmptyCorpus("corpus contains no tokens");
  return v;
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> sentences) {
  Vocabulary v;
  for (const auto& s : sentences)
    for (const auto& t : s) v.add(t);
  if (v.empty()) throw EmptyCorpus("corpus contains no tokens");
  return v;
}

}  // namespace bilex
