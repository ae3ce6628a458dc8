// bilex: command-line front end for bilexical operator training and evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bilex/error.hpp"
#include "bilex/evaluation.hpp"
#include "bilex/hash.hpp"
#include "bilex/io.hpp"
#include "bilex/model.hpp"
#include "bilex/representation.hpp"
#include "bilex/text.hpp"
#include "bilex/training.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bilex;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string config_path;
  std::string format = "csv";
};

/// Writes to `path`, or stdout when empty / "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string stem(const std::string& path) { return fs::path(path).filename().string(); }

/// Query/candidate representations named on the command line.
struct RepArgs {
  std::string both;
  std::string query;
  std::string candidate;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--repr", both, "Representation for both sides (embedding text format)");
    cmd->add_option("--query-repr", query, "Query-side representation");
    cmd->add_option("--candidate-repr", candidate, "Candidate-side representation");
  }
};

struct LoadedReps {
  std::shared_ptr<Representation> query;
  std::shared_ptr<Representation> candidate;
  std::string query_id;
  std::string candidate_id;
};

LoadedReps load_reps(const RepArgs& a) {
  const std::string q = a.query.empty() ? a.both : a.query;
  const std::string c = a.candidate.empty() ? a.both : a.candidate;
  if (q.empty() || c.empty()) throw InvalidArgument("give --repr, or both --query-repr and --candidate-repr");
  LoadedReps r;
  r.query = std::make_shared<Representation>(import_vectors_file(q));
  r.candidate = q == c ? r.query : std::make_shared<Representation>(import_vectors_file(c));
  r.query_id = stem(q);
  r.candidate_id = stem(c);
  return r;
}

std::string describe(const BilinearModel& m, const TrainConfig& cfg) {
  std::string d = std::string(to_string(cfg.regularizer)) + " tau=" + format_exact(cfg.tau);
  if (m.is_factorized()) return d + " rank=" + std::to_string(m.rank());
  if (m.sparse_storage()) return d + " nnz=" + std::to_string(nnz(m.weights()));
  return d + " dense";
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (auto f : split_on(s, ',')) {
    double v = 0.0;
    if (!parse_double(trim(f), v)) throw InvalidArgument("bad number in list: " + std::string(f));
    out.push_back(v);
  }
  return out;
}

/// TrainConfig flags; unset flags leave the config-file/default value.
struct ConfigArgs {
  std::optional<std::string> regularizer;
  std::optional<double> tau;
  std::optional<double> step0;
  std::optional<std::string> schedule;
  std::optional<int> epochs;
  std::optional<std::string> batch;
  std::optional<int> prox_period;
  std::optional<int> patience;

  void add_to(CLI::App* cmd, bool with_reg_and_tau) {
    if (with_reg_and_tau) {
      cmd->add_option("--regularizer", regularizer, "l1 | l2 | nuclear");
      cmd->add_option("--tau", tau, "Regularization strength");
    }
    cmd->add_option("--step0", step0, "Initial step size");
    cmd->add_option("--schedule", schedule, "constant | inv_sqrt_t");
    cmd->add_option("--epochs", epochs, "Training epochs");
    cmd->add_option("--batch", batch, "'full' or minibatch size");
    cmd->add_option("--prox-period", prox_period, "Steps between prox applications");
    cmd->add_option("--early-stop-patience", patience, "Epochs without improvement (0 = off)");
  }

  TrainConfig resolve(const Globals& g) const {
    TrainConfig cfg = TrainConfig::defaults_for(
        regularizer ? parse_regularizer(*regularizer) : Regularizer::nuclear);
    if (!g.config_path.empty()) {
      std::ifstream in(g.config_path);
      if (!in) throw Error("cannot open " + g.config_path);
      cfg = parse_train_config(in, cfg);
    }
    if (regularizer) {
      const Regularizer r = parse_regularizer(*regularizer);
      if (r != cfg.regularizer && !prox_period)
        cfg.prox_period = TrainConfig::defaults_for(r).prox_period;
      cfg.regularizer = r;
    }
    if (tau) cfg.tau = *tau;
    if (step0) cfg.step0 = *step0;
    if (schedule) cfg.schedule = parse_schedule(*schedule);
    if (epochs) cfg.epochs = *epochs;
    if (batch) {
      std::size_t size = 0;
      if (*batch == "full")
        cfg.batch = Batch::full();
      else if (parse_size(*batch, size) && size > 0)
        cfg.batch = Batch::minibatch(size);
      else
        throw InvalidArgument("--batch must be 'full' or a positive integer");
    }
    if (prox_period) cfg.prox_period = *prox_period;
    if (patience) cfg.early_stop_patience = *patience;
    if (g.seed_given) cfg.seed = g.seed;
    cfg.validate();
    return cfg;
  }
};

void write_reports(std::ostream& out, const std::vector<EvalReport>& reports, const Globals& g) {
  if (g.format == "json")
    write_reports_json(out, reports);
  else
    write_reports_csv(out, reports);
}

void write_ranked(std::ostream& out, const Ranked& ranked, const Globals& g) {
  if (g.format == "json") {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [w, s] : ranked) arr.push_back({{"word", w}, {"score", s}});
    out << arr.dump(2) << '\n';
    return;
  }
  out << "rank,word,score\n";
  for (std::size_t i = 0; i < ranked.size(); ++i)
    out << i + 1 << ',' << ranked[i].first << ',' << format_exact(ranked[i].second) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilexical operators: train low-rank word-pair scorers and task-specific embeddings"};
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed")->default_val(0);
  app.add_option("--config", g.config_path, "JSON file with TrainConfig fields")
      ->check(CLI::ExistingFile);
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->default_val("csv");

  // build-repr
  auto* build = app.add_subcommand("build-repr", "Bag-of-words context-count representation");
  std::string corpus, repr_out;
  BowConfig bow;
  std::string weighting = "raw_count";
  build->add_option("--corpus", corpus, "Tokenized corpus, one sentence per line")->required();
  build->add_option("--window", bow.window, "Context tokens on each side")->default_val(10);
  build->add_option("--dim", bow.dim, "Number of context-word dimensions")->default_val(2000);
  build->add_option("--min-count", bow.min_count, "Context-word frequency floor")->default_val(0);
  build->add_option("--weighting", weighting, "raw_count | log1p")->default_val("raw_count");
  build->add_option("-o,--output", repr_out, "Output embedding file")->required();

  // import-vectors
  auto* import = app.add_subcommand("import-vectors", "Validate and normalize an embedding file");
  std::string import_in, import_out;
  import->add_option("--input", import_in, "Embedding text file")->required();
  import->add_option("-o,--output", import_out, "Normalized output (9 significant digits)");

  // extract-pairs
  auto* extract = app.add_subcommand("extract-pairs", "Pairs from a dependency-parsed CoNLL file");
  std::string conll, pattern, pairs_out;
  extract->add_option("--conll", conll, "CoNLL-X / CoNLL-U file")->required();
  extract->add_option("--pattern", pattern, "HEADPOS:DEPPOS:LABEL:head|dependent")->required();
  extract->add_option("-o,--output", pairs_out, "Pair TSV output");

  // split
  auto* split = app.add_subcommand("split", "Partition query words into train/dev/test");
  std::string split_pairs, split_prefix, ratios = "0.6,0.2,0.2";
  split->add_option("--pairs", split_pairs, "Pair TSV")->required();
  split->add_option("--ratios", ratios, "train,dev,test ratios")->default_val("0.6,0.2,0.2");
  split->add_option("--out-prefix", split_prefix, "Writes PREFIX.{train,dev,test}.tsv, PREFIX.candidates.txt")
      ->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one operator with FOBOS");
  std::string data_prefix, model_out, history_out;
  RepArgs train_reps;
  ConfigArgs train_cfg;
  bool text_payload = false;
  train_cmd->add_option("--data", data_prefix, "Dataset prefix written by 'split'")->required();
  train_reps.add_to(train_cmd);
  train_cfg.add_to(train_cmd, true);
  train_cmd->add_option("-o,--output", model_out, "Model archive")->required();
  train_cmd->add_option("--history", history_out, "Per-epoch history CSV");
  train_cmd->add_flag("--text-payload", text_payload, "Store matrices as decimal text");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Train a grid of regularizers and strengths");
  std::string sweep_data, sweep_dir, sweep_out, taus = "0.01,0.1,1", regs = "nuclear";
  RepArgs sweep_reps;
  ConfigArgs sweep_cfg;
  sweep_cmd->add_option("--data", sweep_data, "Dataset prefix")->required();
  sweep_reps.add_to(sweep_cmd);
  sweep_cfg.add_to(sweep_cmd, false);
  sweep_cmd->add_option("--taus", taus, "Comma-separated tau values")->default_val("0.01,0.1,1");
  sweep_cmd->add_option("--regularizers", regs, "Comma-separated regularizers")->default_val("nuclear");
  sweep_cmd->add_option("--model-dir", sweep_dir, "Save every trained model here");
  sweep_cmd->add_option("-o,--output", sweep_out, "Summary output");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Pairwise accuracy and op count of a model");
  std::string eval_model, eval_data, eval_split = "test", eval_label, eval_out;
  RepArgs eval_reps;
  bool allow_mismatch = false;
  eval_cmd->add_option("--model", eval_model, "Model archive")->required();
  eval_cmd->add_option("--data", eval_data, "Dataset prefix")->required();
  eval_reps.add_to(eval_cmd);
  eval_cmd->add_option("--split", eval_split, "train | dev | test")->default_val("test");
  eval_cmd->add_option("--label", eval_label, "Report label (default: model file name)");
  eval_cmd->add_option("-o,--output", eval_out, "Report output");
  eval_cmd->add_flag("--allow-mismatch", allow_mismatch, "Load despite representation mismatch");

  // eval-unsup
  auto* unsup = app.add_subcommand("eval-unsup", "Unsupervised SVD-projection baseline");
  std::string unsup_repr, unsup_data, unsup_split = "test", unsup_out;
  std::size_t unsup_k = 0;
  unsup->add_option("--repr", unsup_repr, "Representation")->required();
  unsup->add_option("--k", unsup_k, "Projection rank")->required();
  unsup->add_option("--data", unsup_data, "Dataset prefix")->required();
  unsup->add_option("--split", unsup_split, "train | dev | test")->default_val("test");
  unsup->add_option("-o,--output", unsup_out, "Report output");

  // curve
  auto* curve_cmd = app.add_subcommand("curve", "Accuracy vs. operations curve from reports");
  std::vector<std::string> report_files;
  std::string curve_out;
  curve_cmd->add_option("--reports", report_files, "Report files (CSV or JSON)")->required();
  curve_cmd->add_option("-o,--output", curve_out, "Curve output");

  // top-candidates
  auto* top = app.add_subcommand("top-candidates", "Highest-scoring candidates of a query");
  std::string top_model, top_data, top_query, top_out;
  std::size_t top_k = 5;
  RepArgs top_reps;
  top->add_option("--model", top_model, "Model archive")->required();
  top->add_option("--data", top_data, "Dataset prefix (for the candidate set)")->required();
  top_reps.add_to(top);
  top->add_option("--query", top_query, "Query word")->required();
  top->add_option("--top-k", top_k, "How many candidates")->default_val(5);
  top->add_option("-o,--output", top_out, "Output");

  // neighbors
  auto* neigh = app.add_subcommand("neighbors", "Cosine neighbours in an embedding space");
  std::string neigh_emb, neigh_word, neigh_out;
  std::size_t neigh_k = 5;
  neigh->add_option("--embeddings", neigh_emb, "Embedding file")->required();
  neigh->add_option("--word", neigh_word, "Word")->required();
  neigh->add_option("--top-k", neigh_k, "How many neighbours")->default_val(5);
  neigh->add_option("-o,--output", neigh_out, "Output");

  // export-embeddings
  auto* exp = app.add_subcommand("export-embeddings", "Task-specific embeddings of a low-rank model");
  std::string exp_model, exp_repr, exp_side = "query", exp_out;
  exp->add_option("--model", exp_model, "Factorized model archive")->required();
  exp->add_option("--repr", exp_repr, "Representation of that side")->required();
  exp->add_option("--side", exp_side, "query | candidate")
      ->check(CLI::IsMember({"query", "candidate"}))
      ->default_val("query");
  exp->add_option("-o,--output", exp_out, "Embedding output")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*build) {
      bow.weighting = parse_weighting(weighting);
      const auto sentences = read_corpus_file(corpus);
      if (sentences.empty()) throw EmptyCorpus("corpus " + corpus + " has no tokens");
      const BowResult r = build_bow(sentences, bow);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      write_vectors_file(repr_out, r.rep);
      std::cerr << "wrote " << r.rep.size() << " vectors of dimension " << r.rep.dim() << '\n';
    } else if (*import) {
      const Representation rep = import_vectors_file(import_in);
      if (!import_out.empty()) write_vectors_file(import_out, rep);
      std::cout << "words=" << rep.size() << " dim=" << rep.dim()
                << " fingerprint=" << to_hex(rep.fingerprint()) << '\n';
    } else if (*extract) {
      std::ifstream in(conll);
      if (!in) throw Error("cannot open " + conll);
      const ConllExtraction r = extract_pairs_conll(in, parse_relation_pattern(pattern));
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      Output out(pairs_out);
      write_pairs(out.stream(), aggregate_pairs(r.pairs));
    } else if (*split) {
      const auto rs = parse_double_list(ratios);
      if (rs.size() != 3) throw InvalidArgument("--ratios needs three values");
      const RelationDataset data =
          split_dataset(parse_pairs_file(split_pairs), {rs[0], rs[1], rs[2]}, g.seed);
      write_dataset(split_prefix, data);
      std::cerr << "queries train/dev/test: " << data.queries(Split::train).size() << '/'
                << data.queries(Split::dev).size() << '/' << data.queries(Split::test).size()
                << ", candidates: " << data.candidates.size() << '\n';
    } else if (*train_cmd) {
      const TrainConfig cfg = train_cfg.resolve(g);
      const LoadedReps reps = load_reps(train_reps);
      const IndexedDataset data(read_dataset(data_prefix), *reps.query, *reps.candidate,
                                reps.query_id, reps.candidate_id);
      const TrainedModel m = train(cfg, data);
      save_model_file(model_out, m, text_payload ? PayloadEncoding::text : PayloadEncoding::binary);
      if (!history_out.empty()) {
        Output h(history_out);
        write_history_csv(h.stream(), m.history);
      }
      const auto& sel = m.history.at(static_cast<std::size_t>(m.selected_epoch - 1));
      std::cerr << "selected epoch " << m.selected_epoch << " dev_acc "
                << format_exact(sel.dev_accuracy) << " (" << describe(m.model, cfg) << ")\n";
    } else if (*sweep_cmd) {
      const TrainConfig base = sweep_cfg.resolve(g);
      const LoadedReps reps = load_reps(sweep_reps);
      const RelationDataset rel = read_dataset(sweep_data);
      const IndexedDataset data(rel, *reps.query, *reps.candidate, reps.query_id,
                                reps.candidate_id);
      std::vector<TrainConfig> cfgs;
      for (auto r : split_on(regs, ',')) {
        for (double tau : parse_double_list(taus)) {
          TrainConfig c = base;
          const Regularizer reg = parse_regularizer(trim(r));
          if (reg != base.regularizer && !sweep_cfg.prox_period)
            c.prox_period = TrainConfig::defaults_for(reg).prox_period;
          c.regularizer = reg;
          c.tau = tau;
          cfgs.push_back(c);
        }
      }
      const auto cells = sweep(cfgs, data);
      const bool has_test = !data.pairs(Split::test).empty();
      if (!sweep_dir.empty()) fs::create_directories(sweep_dir);
      auto rows = nlohmann::ordered_json::array();
      for (const auto& cell : cells) {
        const std::string label =
            std::string(to_string(cell.config.regularizer)) + "-tau" + format_exact(cell.config.tau);
        nlohmann::ordered_json row{{"label", label},
                                   {"regularizer", std::string(to_string(cell.config.regularizer))},
                                   {"tau", cell.config.tau}};
        if (!cell.ok()) {
          row["status"] = "failed: " + cell.error;
          rows.push_back(row);
          continue;
        }
        const TrainedModel& m = *cell.result;
        const auto& sel = m.history.at(static_cast<std::size_t>(m.selected_epoch - 1));
        row["selected_epoch"] = m.selected_epoch;
        row["dev_acc"] = sel.dev_accuracy;
        row["test_acc"] = has_test ? pairwise_accuracy(m.model, data, Split::test).accuracy : -1.0;
        row["rank_or_nnz"] = m.model.is_factorized() ? m.model.rank() : nnz(m.model.weights());
        row["ops"] = op_count(m.model, data.num_candidates());
        row["status"] = "ok";
        rows.push_back(row);
        if (!sweep_dir.empty())
          save_model_file((fs::path(sweep_dir) / (label + ".model")).string(), m);
      }
      Output out(sweep_out);
      if (g.format == "json") {
        out.stream() << rows.dump(2) << '\n';
      } else {
        out.stream() << "label,regularizer,tau,selected_epoch,dev_acc,test_acc,rank_or_nnz,ops,status\n";
        for (const auto& r : rows) {
          out.stream() << r["label"].get<std::string>() << ',' << r["regularizer"].get<std::string>()
                       << ',' << format_exact(r["tau"].get<double>()) << ',';
          if (r["status"] == "ok")
            out.stream() << r["selected_epoch"].get<int>() << ','
                         << format_exact(r["dev_acc"].get<double>()) << ','
                         << format_exact(r["test_acc"].get<double>()) << ','
                         << r["rank_or_nnz"].get<std::size_t>() << ','
                         << r["ops"].get<std::uint64_t>() << ",ok\n";
          else
            out.stream() << ",,,,,\"" << r["status"].get<std::string>() << "\"\n";
        }
      }
    } else if (*eval_cmd) {
      const LoadedReps reps = load_reps(eval_reps);
      const TrainedModel m =
          load_model_file(eval_model, {reps.query.get(), reps.candidate.get(), allow_mismatch});
      const IndexedDataset data(read_dataset(eval_data), *reps.query, *reps.candidate);
      const EvalReport r = evaluate(m.model, data, parse_split(eval_split),
                                    eval_label.empty() ? stem(eval_model) : eval_label,
                                    describe(m.model, m.config));
      Output out(eval_out);
      write_reports(out.stream(), {r}, g);
    } else if (*unsup) {
      const Representation rep = import_vectors_file(unsup_repr);
      const EvalReport r =
          eval_unsupervised(rep, unsup_k, read_dataset(unsup_data), parse_split(unsup_split));
      Output out(unsup_out);
      write_reports(out.stream(), {r}, g);
    } else if (*curve_cmd) {
      std::vector<EvalReport> all;
      for (const auto& f : report_files) {
        std::ifstream in(f);
        if (!in) throw Error("cannot open " + f);
        auto rs = read_reports(in);
        all.insert(all.end(), rs.begin(), rs.end());
      }
      const TradeoffCurve curve = tradeoff_curve(all);
      Output out(curve_out);
      if (g.format == "json")
        write_curve_json(out.stream(), curve);
      else
        write_curve_csv(out.stream(), curve);
    } else if (*top) {
      const LoadedReps reps = load_reps(top_reps);
      const TrainedModel m = load_model_file(top_model, {reps.query.get(), reps.candidate.get()});
      const RelationDataset rel = read_dataset(top_data);
      const Ranked ranked = top_candidates(m.model, top_query, top_k, *reps.query,
                                           *reps.candidate, rel.candidates);
      Output out(top_out);
      write_ranked(out.stream(), ranked, g);
    } else if (*neigh) {
      const Representation emb = import_vectors_file(neigh_emb);
      Output out(neigh_out);
      write_ranked(out.stream(), query_neighbors(emb, neigh_word, neigh_k), g);
    } else if (*exp) {
      const Representation rep = import_vectors_file(exp_repr);
      const Side side = exp_side == "query" ? Side::query : Side::candidate;
      LoadOptions opts;
      (side == Side::query ? opts.query_rep : opts.candidate_rep) = &rep;
      const TrainedModel m = load_model_file(exp_model, opts);
      write_vectors_file(exp_out, export_embeddings(m.model, side, rep));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
