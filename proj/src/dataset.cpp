#include "bilex/dataset.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "bilex/error.hpp"

namespace bilex {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev") return Split::dev;
  if (s == "test") return Split::test;
  throw InvalidArgument("unknown split: " + std::string(s));
}

std::vector<std::string> RelationDataset::queries() const {
  std::vector<std::string> out;
  out.reserve(split_of.size());
  for (const auto& [q, s] : split_of) out.push_back(q);
  return out;
}

std::vector<std::string> RelationDataset::queries(Split s) const {
  std::vector<std::string> out;
  for (const auto& [q, sp] : split_of)
    if (sp == s) out.push_back(q);
  return out;
}

std::vector<PairRow> RelationDataset::pairs_in(Split s) const {
  std::vector<PairRow> out;
  for (const auto& p : pairs) {
    auto it = split_of.find(p.query);
    if (it != split_of.end() && it->second == s) out.push_back(p);
  }
  return out;
}

void RelationDataset::validate() const {
  std::unordered_set<std::string_view> cands(candidates.begin(), candidates.end());
  if (cands.size() != candidates.size()) throw DataError("duplicate word in candidate set");
  for (const auto& p : pairs) {
    if (!split_of.contains(p.query))
      throw DataError("pair (" + p.query + ", " + p.candidate + "): query has no split");
    if (!cands.contains(p.candidate))
      throw DataError("pair (" + p.query + ", " + p.candidate +
                      "): candidate not in candidate set");
    if (p.count < 1)
      throw DataError("pair (" + p.query + ", " + p.candidate + "): non-positive count");
  }
}

IndexedDataset::IndexedDataset(const RelationDataset& data, const Representation& query_rep,
                               const Representation& candidate_rep, std::string query_rep_id,
                               std::string candidate_rep_id)
    : candidate_words_(data.candidates),
      query_words_(data.queries()),
      query_ref_{std::move(query_rep_id), query_rep.fingerprint()},
      candidate_ref_{std::move(candidate_rep_id), candidate_rep.fingerprint()} {
  data.validate();
  if (query_rep.dim() != candidate_rep.dim())
    throw DimensionError("query and candidate representations differ in dimension");
  candidates_ = candidate_rep.gather(candidate_words_);
  queries_ = query_rep.gather(query_words_);

  std::unordered_map<std::string_view, std::size_t> qidx, cidx;
  for (std::size_t i = 0; i < query_words_.size(); ++i) qidx.emplace(query_words_[i], i);
  for (std::size_t j = 0; j < candidate_words_.size(); ++j) cidx.emplace(candidate_words_[j], j);

  // Merge repeated rows; keep first-occurrence order for determinism.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  golds_.assign(query_words_.size(), {});
  for (const auto& p : data.pairs) {
    const std::size_t q = qidx.at(p.query);
    const std::size_t c = cidx.at(p.candidate);
    auto& bucket = by_split_[static_cast<int>(data.split_of.at(p.query))];
    auto [it, fresh] = seen.emplace(std::make_pair(q, c), bucket.size());
    if (fresh) {
      bucket.push_back({q, c, static_cast<double>(p.count)});
      golds_[q].push_back(c);
    } else {
      bucket[it->second].weight += static_cast<double>(p.count);
    }
  }
  for (auto& g : golds_) std::sort(g.begin(), g.end());
}

std::span<const WeightedPair> IndexedDataset::pairs(Split s) const {
  return by_split_[static_cast<int>(s)];
}

double IndexedDataset::total_weight(Split s) const {
  double w = 0.0;
  for (const auto& p : pairs(s)) w += p.weight;
  return w;
}

}  // namespace bilex
