#include "bilex/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "bilex/error.hpp"
#include "bilex/text.hpp"
#include "json.hpp"

namespace bilex {

std::optional<double> pair_accuracy(const Vector& scores, std::size_t gold,
                                    std::span<const std::size_t> all_golds) {
  const auto g = static_cast<Eigen::Index>(gold);
  if (g >= scores.size()) throw DataError("gold candidate index out of range");
  const double s = scores(g);
  double wins = 0.0;
  std::size_t compared = 0;
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (ju == gold || std::find(all_golds.begin(), all_golds.end(), ju) != all_golds.end())
      continue;
    ++compared;
    if (s > scores(j))
      wins += 1.0;
    else if (s == scores(j))
      wins += 0.5;
  }
  if (compared == 0) return std::nullopt;
  return wins / static_cast<double>(compared);
}

AccuracyResult pairwise_accuracy(const QueryScores& scores, const IndexedDataset& data,
                                 Split split) {
  const auto pairs = data.pairs(split);
  if (pairs.empty()) throw EmptySplit("split " + std::string(to_string(split)) + " is empty");
  if (data.num_candidates() < 2) throw DataError("pairwise accuracy needs at least 2 candidates");

  // Queries in first-appearance order so per-query output is deterministic.
  std::vector<std::size_t> order;
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_query;
  for (const auto& p : pairs) {
    auto [it, fresh] = by_query.try_emplace(p.query);
    if (fresh) order.push_back(p.query);
    it->second.push_back(p.candidate);
  }

  AccuracyResult result;
  double sum = 0.0;
  std::size_t counted = 0;
  for (const std::size_t q : order) {
    const Vector s = scores(q);
    if (static_cast<std::size_t>(s.size()) != data.num_candidates())
      throw DimensionError("scorer returned the wrong number of candidate scores");
    double qsum = 0.0;
    std::size_t qcount = 0;
    for (const std::size_t c : by_query[q]) {
      if (auto a = pair_accuracy(s, c, data.golds(q))) {
        qsum += *a;
        ++qcount;
      }
    }
    if (qcount == 0) continue;
    sum += qsum;
    counted += qcount;
    result.per_query.emplace_back(q, qsum / static_cast<double>(qcount));
  }
  if (counted == 0) throw DataError("no gold pair has a non-gold candidate to compare against");
  result.accuracy = sum / static_cast<double>(counted);
  return result;
}

AccuracyResult pairwise_accuracy(const BilinearModel& model, const IndexedDataset& data,
                                 Split split) {
  const CandidateScorer scorer(model, data.candidate_matrix());
  return pairwise_accuracy(
      [&](std::size_t q) {
        return scorer.scores(data.query_matrix().row(static_cast<Eigen::Index>(q)).transpose());
      },
      data, split);
}

namespace {

std::vector<std::pair<std::string, double>> named(const AccuracyResult& r,
                                                  const IndexedDataset& data) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(r.per_query.size());
  for (const auto& [q, a] : r.per_query) out.emplace_back(data.query_words()[q], a);
  return out;
}

}  // namespace

EvalReport evaluate(const BilinearModel& model, const IndexedDataset& data, Split split,
                    std::string label, std::string model_desc) {
  const AccuracyResult r = pairwise_accuracy(model, data, split);
  return EvalReport{std::move(label), r.accuracy, op_count(model, data.num_candidates()),
                    std::move(model_desc), named(r, data)};
}

EvalReport eval_unsupervised(const Representation& rep, std::size_t k,
                             const RelationDataset& data, Split split) {
  const Representation projected = svd_project(rep, k);
  const IndexedDataset idx(data, projected, projected);
  const Matrix& cands = idx.candidate_matrix();
  const AccuracyResult r = pairwise_accuracy(
      [&](std::size_t q) {
        return Vector(cands * idx.query_matrix().row(static_cast<Eigen::Index>(q)).transpose());
      },
      idx, split);
  return EvalReport{"unsupervised-k" + std::to_string(k), r.accuracy,
                    factorized_ops(rep.dim(), k, idx.num_candidates()),
                    "unsupervised svd k=" + std::to_string(k), named(r, idx)};
}

TradeoffCurve tradeoff_curve(std::span<const EvalReport> reports) {
  std::vector<const EvalReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const EvalReport* a, const EvalReport* b) { return a->ops < b->ops; });
  TradeoffCurve curve;
  for (const EvalReport* r : sorted) {
    if (!curve.points.empty() && curve.points.back().ops == r->ops) {
      if (r->accuracy > curve.points.back().accuracy)
        curve.points.back() = CurvePoint{r->ops, r->accuracy, r->label};
      continue;
    }
    curve.points.push_back(CurvePoint{r->ops, r->accuracy, r->label});
  }
  return curve;
}

namespace {

Ranked rank_by_score(const std::vector<std::string>& words, const Vector& scores,
                     std::size_t top_k) {
  std::vector<std::size_t> idx(words.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores(static_cast<Eigen::Index>(a));
    const double sb = scores(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    return words[a] < words[b];
  });
  Ranked out;
  for (std::size_t i = 0; i < std::min(top_k, idx.size()); ++i)
    out.emplace_back(words[idx[i]], scores(static_cast<Eigen::Index>(idx[i])));
  return out;
}

}  // namespace

Ranked top_candidates(const BilinearModel& model, std::string_view query, std::size_t top_k,
                      const Representation& query_rep, const Representation& candidate_rep,
                      std::span<const std::string> candidates) {
  if (top_k == 0) throw InvalidArgument("top_k must be positive");
  const Vector phi_q = query_rep.vector(query);
  const Vector s = score_all(model, phi_q, candidate_rep.gather(candidates));
  return rank_by_score(std::vector<std::string>(candidates.begin(), candidates.end()), s, top_k);
}

Ranked query_neighbors(const Representation& embeddings, std::string_view word,
                       std::size_t top_k) {
  if (top_k == 0) throw InvalidArgument("top_k must be positive");
  const std::size_t self = embeddings.vocab().index(word);
  const Matrix all = embeddings.dense();
  const Vector norms = all.rowwise().norm();
  if (norms(static_cast<Eigen::Index>(self)) == 0.0)
    throw DegenerateVector("word \"" + std::string(word) + "\" has a zero vector");
  const Vector target = all.row(static_cast<Eigen::Index>(self)).transpose();
  const Vector dots = all * target;

  std::vector<std::string> words;
  std::vector<double> cos;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (i == self || norms(r) == 0.0) continue;
    words.push_back(embeddings.vocab().word(i));
    cos.push_back(dots(r) / (norms(r) * norms(static_cast<Eigen::Index>(self))));
  }
  return rank_by_score(words, Eigen::Map<const Vector>(cos.data(), static_cast<Eigen::Index>(cos.size())),
                       top_k);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw FormatError(line_no, "unterminated quoted field");
  return fields;
}

nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["label"] = r.label;
  j["accuracy"] = r.accuracy;
  j["ops"] = r.ops;
  j["model_desc"] = r.model_desc;
  auto& pq = j["per_query"] = nlohmann::ordered_json::array();
  for (const auto& [w, a] : r.per_query) pq.push_back({{"query", w}, {"accuracy", a}});
  return j;
}

}  // namespace

void write_reports_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "label,accuracy,ops,model_desc\n";
  for (const auto& r : reports)
    out << csv_field(r.label) << ',' << format_exact(r.accuracy) << ',' << r.ops << ','
        << csv_field(r.model_desc) << '\n';
}

void write_reports_json(std::ostream& out, std::span<const EvalReport> reports) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  out << arr.dump(2) << '\n';
}

void write_curve_csv(std::ostream& out, const TradeoffCurve& curve) {
  out << "ops,accuracy,label\n";
  for (const auto& p : curve.points)
    out << p.ops << ',' << format_exact(p.accuracy) << ',' << csv_field(p.label) << '\n';
}

void write_curve_json(std::ostream& out, const TradeoffCurve& curve) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : curve.points)
    arr.push_back({{"ops", p.ops}, {"accuracy", p.accuracy}, {"label", p.label}});
  out << arr.dump(2) << '\n';
}

std::vector<EvalReport> read_reports(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string_view body = trim(text);
  if (body.empty()) throw EmptyData("empty report file");

  std::vector<EvalReport> out;
  if (body.front() == '[' || body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(0, std::string("invalid report JSON: ") + e.what());
    }
    if (j.is_object()) j = nlohmann::json::array({j});
    for (const auto& r : j) {
      try {
        EvalReport rep;
        rep.label = r.at("label").get<std::string>();
        rep.accuracy = r.at("accuracy").get<double>();
        rep.ops = r.at("ops").get<std::uint64_t>();
        rep.model_desc = r.value("model_desc", "");
        out.push_back(std::move(rep));
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(0, std::string("invalid report entry: ") + e.what());
      }
    }
    return out;
  }

  std::istringstream lines{std::string(body)};
  std::string line;
  std::size_t line_no = 1;
  std::getline(lines, line);
  const auto header = parse_csv_line(line, line_no);
  auto column = [&](std::string_view name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto c_label = column("label"), c_acc = column("accuracy"), c_ops = column("ops"),
             c_desc = column("model_desc");
  if (c_label < 0 || c_acc < 0 || c_ops < 0)
    throw FormatError(1, "report header needs label, accuracy and ops columns");
  while (std::getline(lines, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = parse_csv_line(line, line_no);
    if (f.size() != header.size()) throw FormatError(line_no, "wrong number of report fields");
    EvalReport r;
    r.label = f[static_cast<std::size_t>(c_label)];
    std::size_t ops = 0;
    if (!parse_double(f[static_cast<std::size_t>(c_acc)], r.accuracy) ||
        !parse_size(f[static_cast<std::size_t>(c_ops)], ops))
      throw FormatError(line_no, "bad accuracy or ops value");
    r.ops = ops;
    if (c_desc >= 0) r.model_desc = f[static_cast<std::size_t>(c_desc)];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bilex
