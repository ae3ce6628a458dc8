#include "bilex/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bilex/error.hpp"
#include "bilex/hash.hpp"
#include "bilex/text.hpp"
#include "json.hpp"

namespace bilex {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::vector<std::string>> read_corpus(std::istream& in) {
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto toks = split_whitespace(line);
    if (toks.empty()) continue;
    out.emplace_back(toks.begin(), toks.end());
  }
  return out;
}

std::vector<std::vector<std::string>> read_corpus_file(const std::string& path) {
  auto in = open_in(path);
  return read_corpus(in);
}

std::vector<PairRow> parse_pairs(std::istream& in) {
  std::vector<PairRow> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = strip_cr(line);
    if (trim(row).empty()) continue;
    const auto f = split_on(row, '\t');
    if (f.size() < 2 || f.size() > 3)
      throw FormatError(line_no, "expected query<TAB>candidate[<TAB>count]");
    for (const auto field : f) {
      if (field.empty()) throw FormatError(line_no, "empty field");
      if (field.find_first_of(" \t") != std::string_view::npos)
        throw FormatError(line_no, "field contains whitespace");
    }
    PairRow p{std::string(f[0]), std::string(f[1]), 1};
    if (f.size() == 3 && (!parse_int(f[2], p.count) || p.count < 1))
      throw FormatError(line_no, "count must be a positive integer");
    out.push_back(std::move(p));
  }
  if (out.empty()) throw EmptyData("pair file has no rows");
  return out;
}

std::vector<PairRow> parse_pairs_file(const std::string& path) {
  auto in = open_in(path);
  return parse_pairs(in);
}

void write_pairs(std::ostream& out, std::span<const PairRow> pairs) {
  for (const auto& p : pairs) {
    out << p.query << '\t' << p.candidate;
    if (p.count != 1) out << '\t' << p.count;
    out << '\n';
  }
}

std::vector<PairRow> aggregate_pairs(std::span<const PairRow> pairs) {
  std::vector<PairRow> out;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  for (const auto& p : pairs) {
    auto [it, fresh] = slot.emplace(std::make_pair(p.query, p.candidate), out.size());
    if (fresh)
      out.push_back(p);
    else
      out[it->second].count += p.count;
  }
  return out;
}

// ---- CoNLL ----------------------------------------------------------------

namespace {

bool matches(std::string_view pattern, std::string_view value) {
  if (pattern == "*") return true;
  if (!pattern.empty() && pattern.back() == '*') {
    pattern.remove_suffix(1);
    return value.substr(0, pattern.size()) == pattern;
  }
  return pattern == value;
}

struct ConllToken {
  std::string form;
  std::string cpos;
  std::string pos;
  std::size_t head = 0;
  std::string label;
  std::size_t line = 0;
};

void emit_sentence(const std::vector<ConllToken>& sent, const RelationPattern& pat,
                   std::vector<PairRow>& out) {
  for (const auto& dep : sent) {
    if (dep.head == 0) continue;
    if (dep.head > sent.size())
      throw FormatError(dep.line, "HEAD " + std::to_string(dep.head) + " outside sentence of " +
                                      std::to_string(sent.size()) + " tokens");
    const ConllToken& head = sent[dep.head - 1];
    const bool head_ok = matches(pat.head_pos, head.cpos) || matches(pat.head_pos, head.pos);
    const bool dep_ok = matches(pat.dep_pos, dep.cpos) || matches(pat.dep_pos, dep.pos);
    if (!head_ok || !dep_ok || !matches(pat.label, dep.label)) continue;
    if (pat.query_side == QuerySide::head)
      out.push_back({head.form, dep.form, 1});
    else
      out.push_back({dep.form, head.form, 1});
  }
}

}  // namespace

RelationPattern parse_relation_pattern(std::string_view text) {
  const auto f = split_on(text, ':');
  if (f.size() != 4) throw InvalidArgument("relation pattern must be HEADPOS:DEPPOS:LABEL:SIDE");
  RelationPattern p{std::string(f[0]), std::string(f[1]), std::string(f[2]), QuerySide::head};
  if (f[3] == "head")
    p.query_side = QuerySide::head;
  else if (f[3] == "dependent" || f[3] == "dep")
    p.query_side = QuerySide::dependent;
  else
    throw InvalidArgument("query side must be 'head' or 'dependent'");
  for (const auto* s : {&p.head_pos, &p.dep_pos, &p.label})
    if (s->empty()) throw InvalidArgument("empty field in relation pattern");
  return p;
}

ConllExtraction extract_pairs_conll(std::istream& in, const RelationPattern& pattern) {
  ConllExtraction result;
  std::vector<ConllToken> sent;
  std::string line;
  std::size_t line_no = 0;
  std::size_t sentences = 0;
  auto flush = [&] {
    if (sent.empty()) return;
    emit_sentence(sent, pattern, result.pairs);
    sent.clear();
    ++sentences;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = strip_cr(line);
    if (trim(row).empty()) {
      flush();
      continue;
    }
    if (row.front() == '#') continue;
    const auto f = row.find('\t') != std::string_view::npos ? split_on(row, '\t')
                                                             : split_whitespace(row);
    if (f.size() < 10)
      throw FormatError(line_no, "expected 10 columns, found " + std::to_string(f.size()));
    // Multiword ranges (1-2) and empty nodes (1.1) carry no basic edge.
    if (f[0].find_first_of("-.") != std::string_view::npos) continue;
    std::size_t id = 0;
    if (!parse_size(f[0], id) || id != sent.size() + 1)
      throw FormatError(line_no, "token ID \"" + std::string(f[0]) + "\" out of sequence");
    ConllToken t;
    if (!parse_size(f[6], t.head))
      throw FormatError(line_no, "HEAD \"" + std::string(f[6]) + "\" is not an integer");
    t.form = std::string(f[1]);
    t.cpos = std::string(f[3]);
    t.pos = std::string(f[4]);
    t.label = std::string(f[7]);
    t.line = line_no;
    if (t.form.empty() || t.form.find(' ') != std::string::npos)
      throw FormatError(line_no, "FORM is empty or contains spaces");
    sent.push_back(std::move(t));
  }
  flush();
  if (result.pairs.empty())
    result.warnings.push_back("no dependency edges matched the relation pattern (" +
                              std::to_string(sentences) + " sentences read)");
  return result;
}

// ---- splits ---------------------------------------------------------------

RelationDataset split_dataset(std::span<const PairRow> pairs, std::array<double, 3> ratios,
                              std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw InvalidArgument("split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("split ratios must sum to 1");

  std::set<std::string> query_set, cand_set;
  for (const auto& p : pairs) {
    query_set.insert(p.query);
    cand_set.insert(p.candidate);
  }
  if (query_set.size() < 3)
    throw InsufficientData("need at least 3 distinct query words, found " +
                           std::to_string(query_set.size()));

  std::vector<std::string> queries(query_set.begin(), query_set.end());
  std::mt19937_64 rng(seed);
  std::shuffle(queries.begin(), queries.end(), rng);

  const auto total = static_cast<long long>(queries.size());
  long long n_train = std::max(1LL, std::llround(ratios[0] * static_cast<double>(total)));
  long long n_dev = std::max(1LL, std::llround(ratios[1] * static_cast<double>(total)));
  while (n_train + n_dev > total - 1) {
    if (n_train >= n_dev && n_train > 1)
      --n_train;
    else
      --n_dev;
  }

  RelationDataset data;
  data.candidates.assign(cand_set.begin(), cand_set.end());
  data.pairs.assign(pairs.begin(), pairs.end());
  for (long long i = 0; i < total; ++i) {
    const Split s = i < n_train ? Split::train : i < n_train + n_dev ? Split::dev : Split::test;
    data.split_of.emplace(queries[static_cast<std::size_t>(i)], s);
  }
  return data;
}

void write_dataset(const std::string& prefix, const RelationDataset& data) {
  for (Split s : {Split::train, Split::dev, Split::test}) {
    auto out = open_out(prefix + "." + std::string(to_string(s)) + ".tsv");
    const auto rows = data.pairs_in(s);
    write_pairs(out, rows);
  }
  auto out = open_out(prefix + ".candidates.txt");
  for (const auto& c : data.candidates) out << c << '\n';
}

RelationDataset read_dataset(const std::string& prefix) {
  RelationDataset data;
  for (Split s : {Split::train, Split::dev, Split::test}) {
    const std::string path = prefix + "." + std::string(to_string(s)) + ".tsv";
    auto in = open_in(path);
    std::vector<PairRow> rows;
    try {
      rows = parse_pairs(in);
    } catch (const EmptyData&) {
      continue;  // an empty split is legal on disk; consumers check what they need
    } catch (const FormatError& e) {
      throw FormatError(e.line(), path + ": " + e.what());
    }
    for (auto& r : rows) {
      auto [it, fresh] = data.split_of.emplace(r.query, s);
      if (!fresh && it->second != s)
        throw DataError("query \"" + r.query + "\" appears in more than one split");
      data.pairs.push_back(std::move(r));
    }
  }
  auto in = open_in(prefix + ".candidates.txt");
  std::string line;
  while (std::getline(in, line)) {
    const auto w = trim(line);
    if (!w.empty()) data.candidates.emplace_back(w);
  }
  data.validate();
  return data;
}

// ---- configs ----------------------------------------------------------------

namespace {

nlohmann::ordered_json config_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["regularizer"] = std::string(to_string(c.regularizer));
  j["tau"] = c.tau;
  j["step0"] = c.step0;
  j["schedule"] = std::string(to_string(c.schedule));
  j["epochs"] = c.epochs;
  if (c.batch.is_full())
    j["batch"] = "full";
  else
    j["batch"] = c.batch.size;
  j["prox_period"] = c.prox_period;
  j["seed"] = c.seed;
  j["early_stop_patience"] = c.early_stop_patience;
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j, TrainConfig c) {
  if (!j.is_object()) throw FormatError(0, "train config must be a JSON object");
  static const std::set<std::string> known = {"regularizer", "tau", "step0", "schedule",
                                              "epochs", "batch", "prox_period", "seed",
                                              "early_stop_patience"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw FormatError(0, "unknown train config field \"" + key + "\"");
  try {
    if (j.contains("regularizer")) {
      const auto r = parse_regularizer(j["regularizer"].get<std::string>());
      // Picking a regularizer without a period picks its default period.
      if (!j.contains("prox_period")) c.prox_period = TrainConfig::defaults_for(r).prox_period;
      c.regularizer = r;
    }
    if (j.contains("tau")) c.tau = j["tau"].get<double>();
    if (j.contains("step0")) c.step0 = j["step0"].get<double>();
    if (j.contains("schedule")) c.schedule = parse_schedule(j["schedule"].get<std::string>());
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("batch")) {
      const auto& b = j["batch"];
      if (b.is_string() && b.get<std::string>() == "full")
        c.batch = Batch::full();
      else if (b.is_number_unsigned() && b.get<std::size_t>() > 0)
        c.batch = Batch::minibatch(b.get<std::size_t>());
      else
        throw FormatError(0, "batch must be \"full\" or a positive integer");
    }
    if (j.contains("prox_period")) c.prox_period = j["prox_period"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("early_stop_patience"))
      c.early_stop_patience = j["early_stop_patience"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(0, std::string("bad train config value: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json history_json(std::span<const EpochRecord> history) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : history)
    arr.push_back({{"epoch", r.epoch},
                   {"nll", r.nll},
                   {"objective", r.objective},
                   {"dev_acc", r.dev_accuracy},
                   {"rank_or_nnz", r.rank_or_nnz},
                   {"ops", r.ops}});
  return arr;
}

std::vector<EpochRecord> history_from_json(const nlohmann::json& arr) {
  std::vector<EpochRecord> out;
  for (const auto& r : arr)
    out.push_back({r.at("epoch").get<int>(), r.at("nll").get<double>(),
                   r.at("objective").get<double>(), r.at("dev_acc").get<double>(),
                   r.at("rank_or_nnz").get<std::size_t>(), r.at("ops").get<std::uint64_t>()});
  return out;
}

}  // namespace

TrainConfig parse_train_config(std::istream& in, const TrainConfig& base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(0, std::string("invalid train config JSON: ") + e.what());
  }
  return config_from_json(j, base);
}

void write_train_config(std::ostream& out, const TrainConfig& cfg) {
  out << config_json(cfg).dump(2) << '\n';
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
  out << "epoch,nll,dev_acc,rank_or_nnz,ops\n";
  for (const auto& r : history)
    out << r.epoch << ',' << format_exact(r.nll) << ',' << format_exact(r.dev_accuracy) << ','
        << r.rank_or_nnz << ',' << r.ops << '\n';
}

// ---- model archive ------------------------------------------------------------

namespace {

constexpr std::string_view kMagic = "bilex-model";

void put_matrix(std::ostream& out, const Matrix& m, PayloadEncoding enc) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (enc == PayloadEncoding::text) {
        out << format_exact(m(i, j)) << '\n';
        continue;
      }
      const auto bits = std::bit_cast<std::uint64_t>(m(i, j));
      char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      out.write(bytes, 8);
    }
  }
}

Matrix get_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols, PayloadEncoding enc) {
  Matrix m(rows, cols);
  std::string line;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (enc == PayloadEncoding::text) {
        if (!std::getline(in, line) || !parse_double(trim(line), m(i, j)))
          throw FormatError(0, "model payload truncated or malformed");
        continue;
      }
      unsigned char bytes[8];
      if (!in.read(reinterpret_cast<char*>(bytes), 8))
        throw FormatError(0, "model payload truncated");
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
      m(i, j) = std::bit_cast<double>(bits);
    }
  }
  if (!m.allFinite()) throw FormatError(0, "model payload has non-finite values");
  return m;
}

nlohmann::ordered_json rep_json(const RepRef& r) {
  return {{"id", r.id}, {"hash", to_hex(r.hash)}};
}

RepRef rep_from_json(const nlohmann::json& j) {
  RepRef r;
  r.id = j.at("id").get<std::string>();
  r.hash = std::stoull(j.at("hash").get<std::string>(), nullptr, 16);
  return r;
}

void check_rep(const RepRef& recorded, const Representation* rep, std::string_view side,
               bool allow_mismatch) {
  if (rep == nullptr || allow_mismatch || recorded.hash == 0) return;
  if (rep->fingerprint() != recorded.hash)
    throw RepresentationMismatch(std::string(side) + " representation fingerprint " +
                                 to_hex(rep->fingerprint()) + " differs from the model's " +
                                 to_hex(recorded.hash) +
                                 (recorded.id.empty() ? "" : " (" + recorded.id + ")"));
}

}  // namespace

void save_model(std::ostream& out, const TrainedModel& m, PayloadEncoding encoding) {
  const BilinearModel& model = m.model;
  nlohmann::ordered_json h;
  h["format"] = kMagic;
  h["version"] = kModelFormatVersion;
  h["form"] = model.is_factorized() ? "factorized" : "dense";
  h["storage"] = model.sparse_storage() ? "sparse" : "dense";
  h["n"] = model.rep_dim();
  h["k"] = model.is_factorized() ? model.query_factor().cols() : 0;
  h["rank"] = model.is_factorized() ? model.rank() : 0;
  h["regularizer"] = std::string(to_string(m.config.regularizer));
  h["tau"] = m.config.tau;
  h["query_rep"] = rep_json(model.query_rep);
  h["candidate_rep"] = rep_json(model.candidate_rep);
  h["selected_epoch"] = m.selected_epoch;
  h["config"] = config_json(m.config);
  h["history"] = history_json(m.history);
  h["payload"] = encoding == PayloadEncoding::binary ? "f64le" : "text";
  out << h.dump() << '\n';
  if (model.is_factorized()) {
    put_matrix(out, model.query_factor(), encoding);
    put_matrix(out, model.candidate_factor(), encoding);
  } else {
    put_matrix(out, model.weights(), encoding);
  }
  if (!out) throw Error("failed to write model archive");
}

void save_model_file(const std::string& path, const TrainedModel& m, PayloadEncoding encoding) {
  auto out = open_out(path);
  save_model(out, m, encoding);
}

TrainedModel load_model(std::istream& in, const LoadOptions& opts) {
  std::string header;
  if (!std::getline(in, header)) throw FormatError(1, "empty model archive");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception&) {
    throw FormatError(1, "model archive header is not valid JSON");
  }
  if (!h.is_object() || h.value("format", "") != kMagic)
    throw FormatError(1, "not a bilex model archive");
  if (!h.contains("version") || !h["version"].is_number_integer())
    throw FormatError(1, "model archive has no version");
  if (h["version"].get<int>() != kModelFormatVersion)
    throw VersionError("model archive version " + std::to_string(h["version"].get<int>()) +
                       " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");

  try {
    const std::string form = h.at("form").get<std::string>();
    const auto n = h.at("n").get<Eigen::Index>();
    const auto k = h.at("k").get<Eigen::Index>();
    const std::string payload = h.at("payload").get<std::string>();
    PayloadEncoding enc;
    if (payload == "f64le")
      enc = PayloadEncoding::binary;
    else if (payload == "text")
      enc = PayloadEncoding::text;
    else
      throw FormatError(1, "unknown payload encoding \"" + payload + "\"");
    if (n <= 0 || (form == "factorized" && k <= 0))
      throw FormatError(1, "model archive has invalid dimensions");

    TrainedModel out{BilinearModel::dense(Matrix::Zero(1, 1)), {}, 0, {}};
    if (form == "factorized") {
      Matrix u = get_matrix(in, n, k, enc);
      Matrix v = get_matrix(in, n, k, enc);
      out.model = BilinearModel::factorized(std::move(u), std::move(v),
                                            h.at("rank").get<std::size_t>());
    } else if (form == "dense") {
      Matrix w = get_matrix(in, n, n, enc);
      out.model = BilinearModel::dense(std::move(w), h.at("storage").get<std::string>() == "sparse");
    } else {
      throw FormatError(1, "unknown model form \"" + form + "\"");
    }
    if (enc == PayloadEncoding::binary && in.peek() != std::char_traits<char>::eof())
      throw FormatError(0, "trailing bytes after model payload");

    out.model.query_rep = rep_from_json(h.at("query_rep"));
    out.model.candidate_rep = rep_from_json(h.at("candidate_rep"));
    out.config = config_from_json(h.at("config"), TrainConfig{});
    out.history = history_from_json(h.at("history"));
    out.selected_epoch = h.at("selected_epoch").get<int>();

    check_rep(out.model.query_rep, opts.query_rep, "query", opts.allow_mismatch);
    check_rep(out.model.candidate_rep, opts.candidate_rep, "candidate", opts.allow_mismatch);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(1, std::string("model archive header: ") + e.what());
  }
}

TrainedModel load_model_file(const std::string& path, const LoadOptions& opts) {
  auto in = open_in(path);
  return load_model(in, opts);
}

}  // namespace bilex
