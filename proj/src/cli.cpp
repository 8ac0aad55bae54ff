#include "bass/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bass/active.hpp"
#include "bass/btrank.hpp"
#include "bass/corpus.hpp"
#include "bass/error.hpp"
#include "bass/evalmetrics.hpp"
#include "bass/io.hpp"
#include "bass/service.hpp"
#include "bass/simharness.hpp"
#include "bass/suggest.hpp"
#include "bass/synthgen.hpp"
#include "bass/text.hpp"
#include "bass/topicmodel.hpp"

namespace bass::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  bool json = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output path");
  cmd->add_flag("--json", c.json, "Machine-readable report on stdout");
}

void report(const Common& c, std::ostream& out, const json& j, const std::string& text) {
  if (c.json) {
    out << j.dump() << '\n';
  } else {
    out << text;
  }
}

Corpus read_corpus_any(const fs::path& path, CorpusOptions options) {
  const std::string content = io::read_file(path);
  if (path.extension() != ".csv") return parse_corpus_jsonl(content, options);
  const auto rows = io::parse_csv(content);
  if (rows.empty()) throw ParseError("empty CSV", 1);
  const auto& header = rows.front();
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (text::trim(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  const auto id = column("id");
  const auto body = column("text");
  const auto label = column("label");
  if (!id || !body) throw ParseError("CSV corpus needs id and text columns", 1);
  std::vector<Document> docs;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) throw ParseError("field count differs from header", r + 1);
    std::optional<std::string> gold;
    if (label && !row[*label].empty()) gold = row[*label];
    docs.push_back(make_document(row[*id], row[*body], gold));
  }
  return Corpus(std::move(docs), options);
}

json read_json_file(const fs::path& path) {
  try {
    return json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json scores_json(const ClusterScores& s) { return {{"purity", s.purity}, {"ari", s.ari}, {"nmi", s.nmi}}; }

std::string scores_text(const ClusterScores& s) {
  std::ostringstream os;
  os << "purity " << io::format_double(s.purity) << "  ari " << io::format_double(s.ari) << "  nmi "
     << io::format_double(s.nmi);
  return os.str();
}

// ---- ingest

struct IngestArgs {
  Common common;
  std::string input;
  int min_df = 2;
};

int run_ingest(const IngestArgs& a, std::ostream& out) {
  const Corpus corpus = read_corpus_any(a.input, CorpusOptions{a.min_df});
  if (!a.common.out.empty()) save_corpus(corpus, a.common.out);
  std::size_t labeled = 0;
  for (const auto& d : corpus.documents()) labeled += d.gold_label.has_value();
  const json j = {{"documents", corpus.size()},
                  {"vocabulary", corpus.vocabulary().size()},
                  {"tokens", corpus.token_count()},
                  {"labeled", labeled},
                  {"labels", corpus.label_set()},
                  {"vocab_hash", vocabulary_hash(corpus.vocabulary())},
                  {"stopwords", kStopwordVersion}};
  std::ostringstream os;
  os << corpus.size() << " documents, " << corpus.vocabulary().size() << " terms, " << corpus.token_count()
     << " tokens, " << labeled << " labeled (" << corpus.label_set().size() << " labels)\n";
  report(a.common, out, j, os.str());
  return 0;
}

// ---- lda

struct LdaArgs {
  Common common;
  std::string corpus;
  LdaOptions lda;
  int min_df = 2;
  int top_words = 10;
};

int run_lda(LdaArgs a, std::ostream& out) {
  a.lda.seed = a.common.seed;
  const Corpus corpus = load_corpus(a.corpus, CorpusOptions{a.min_df});
  const TopicModelState model = train_lda(corpus, a.lda);
  if (!a.common.out.empty()) save_model(model, a.common.out);

  json j = {{"topics", model.num_topics},
            {"documents", model.num_documents()},
            {"vocabulary", model.vocabulary_size()},
            {"vocab_hash", model.vocab_hash},
            {"sweeps", model.sweeps},
            {"seed", model.seed}};
  std::ostringstream os;
  os << "K=" << model.num_topics << " over " << model.num_documents() << " documents, " << model.vocabulary_size()
     << " terms, " << model.sweeps << " sweeps\n";
  json words = json::array();
  const int n = std::min<int>(a.top_words, static_cast<int>(model.vocabulary_size()));
  for (int k = 0; k < model.num_topics; ++k) {
    const auto top = bass::top_words(model, k, static_cast<std::size_t>(n));
    words.push_back(top);
    os << "topic_" << k << ": " << text::join(top, " ") << '\n';
  }
  j["top_words"] = std::move(words);
  if (corpus.fully_labeled()) {
    const auto s = cluster_scores(baseline_assignment(model), gold_partition(corpus));
    j["baseline"] = scores_json(s);
    os << "dominant-topic baseline: " << scores_text(s) << '\n';
  }
  report(a.common, out, j, os.str());
  return 0;
}

// ---- simulate

struct SimArgs {
  Common common;
  std::string corpus;
  std::string model;
  SimOptions sim;
  int min_df = 2;
};

int run_simulate(SimArgs a, std::ostream& out) {
  a.sim.seed = a.common.seed;
  const Corpus corpus = load_corpus(a.corpus, CorpusOptions{a.min_df});
  const TopicModelState model = load_model(a.model);
  const SimResult result = simulate(corpus, model, a.sim);
  if (!a.common.out.empty()) io::write_file(a.common.out, result.to_csv());

  const auto baseline = cluster_scores(baseline_assignment(model), gold_partition(corpus));
  const ClusterScores final_median = result.medians.empty() ? ClusterScores{} : result.medians.back().scores;
  const int steps = result.medians.empty() ? 0 : result.medians.back().step;
  const json j = {{"budget", a.sim.budget},
                  {"iterations", a.sim.iterations},
                  {"steps", steps},
                  {"seed", a.sim.seed},
                  {"final_median", scores_json(final_median)},
                  {"baseline", scores_json(baseline)}};
  std::ostringstream os;
  os << a.sim.iterations << " iterations x " << steps << " labels\n"
     << "median after last label: " << scores_text(final_median) << '\n'
     << "dominant-topic baseline:  " << scores_text(baseline) << '\n';
  if (a.common.out.empty() && !a.common.json) os << result.to_csv();
  report(a.common, out, j, os.str());
  return 0;
}

// ---- eval-clusters

struct EvalArgs {
  Common common;
  std::string pred;
  std::string gold;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const auto s = cluster_scores(load_partition(a.pred), load_partition(a.gold));
  const std::string csv = metrics_csv({{"purity", s.purity}, {"ari", s.ari}, {"nmi", s.nmi}});
  if (!a.common.out.empty()) io::write_file(a.common.out, csv);
  if (a.common.json) {
    out << scores_json(s).dump() << '\n';
  } else if (a.common.out.empty()) {
    out << csv;
  }
  return 0;
}

// ---- bt

struct BtArgs {
  Common common;
  std::string duels;
  BtOptions bt;
};

int run_bt(const BtArgs& a, std::ostream& out) {
  const std::string content = io::read_file(a.duels);
  const auto rows = io::parse_csv(content);
  bool annotated = false;
  if (!rows.empty()) {
    for (const auto& h : rows.front()) annotated = annotated || text::trim(h) == "annotator";
  }
  const JudgmentSet judgments =
      annotated ? majority_vote(parse_annotated_duels_csv(content)) : JudgmentSet(parse_duels_csv(content));
  const BtResult result = fit_bt(judgments, a.bt);
  const auto order = rank(result);
  const json j = {{"strengths", strengths_json(result)},
                  {"ranking", order},
                  {"duels", judgments.duels().size()},
                  {"iterations", result.iterations},
                  {"converged", result.converged}};
  if (!a.common.out.empty()) io::write_file(a.common.out, j.dump(2) + "\n");
  std::ostringstream os;
  for (std::size_t i = 0; i < order.size(); ++i) {
    os << i + 1 << ". " << order[i] << "  " << io::format_double(result.strengths.at(order[i])) << '\n';
  }
  report(a.common, out, j, os.str());
  return 0;
}

// ---- alpha

struct AlphaArgs {
  Common common;
  std::string ratings;
};

int run_alpha(const AlphaArgs& a, std::ostream& out) {
  const auto ratings = parse_ratings_csv(io::read_file(a.ratings));
  const double alpha = krippendorff_alpha(ratings);
  const std::string csv = metrics_csv({{"krippendorff_alpha", alpha}, {"ratings", static_cast<double>(ratings.size())}});
  if (!a.common.out.empty()) io::write_file(a.common.out, csv);
  if (a.common.json) {
    out << json{{"krippendorff_alpha", alpha}, {"ratings", ratings.size()}}.dump() << '\n';
  } else if (a.common.out.empty()) {
    out << csv;
  }
  return 0;
}

// ---- gen-scifi

struct GenArgs {
  Common common;
  std::string config;
  std::string backend;
  std::optional<std::size_t> max_docs;
  std::optional<std::string> label_rule;
  bool seed_given = false;
};

// Relative audit log paths resolve under the output directory.
json confine_audit_log(json cfg, const fs::path& out_dir) {
  if (cfg.contains("audit_log")) {
    const fs::path p = cfg["audit_log"].get<std::string>();
    if (p.is_relative()) cfg["audit_log"] = (out_dir / p).string();
  }
  return cfg;
}

int run_gen(const GenArgs& a, std::ostream& out) {
  if (a.common.out.empty()) throw ValidationError("gen-scifi needs --out DIR");
  GenSpec spec = load_gen_spec(a.config);
  if (a.seed_given) spec.seed = a.common.seed;
  if (a.max_docs) spec.max_docs = *a.max_docs;
  if (a.label_rule) spec.label_rule = parse_label_rule(*a.label_rule);
  spec.validate();

  const fs::path dir = a.common.out;
  json cfg = a.backend.empty() ? json{{"type", "mock"}} : read_json_file(a.backend);
  auto backend = make_backend(confine_audit_log(cfg, dir), std::make_shared<MockSciFiBackend>());
  const GenerationResult result = generate(spec, *backend);
  io::write_file(dir / "corpus.jsonl", result.to_jsonl());
  json meta = result.metadata();
  meta["backend"] = backend->identifier();
  io::write_file(dir / "metadata.json", meta.dump(2) + "\n");

  const json j = {{"records", result.records.size()},
                  {"failures", result.failures.size()},
                  {"attempted", result.attempted},
                  {"avoid_words", result.avoid.size()},
                  {"corpus", (dir / "corpus.jsonl").string()}};
  std::ostringstream os;
  os << result.records.size() << " records (" << result.failures.size() << " failures of " << result.attempted
     << " attempted) -> " << (dir / "corpus.jsonl").string() << '\n';
  report(a.common, out, j, os.str());
  return result.records.empty() && result.attempted > 0 ? 2 : 0;
}

// ---- serve

struct ServeArgs {
  Common common;
  std::string corpus_dir = ".";
  std::string model_dir = ".";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string backend;
  std::string profile = "bills";
  int budget = kDefaultBudget;
  int tfidf_dims = FeatureOptions{}.tfidf_dims;
  int min_df = 2;
};

int run_serve(const ServeArgs& a, std::ostream& out) {
  if (a.common.out.empty()) throw ValidationError("serve needs --out DIR for session snapshots");
  ServiceConfig config;
  config.corpus_dir = a.corpus_dir;
  config.model_dir = a.model_dir;
  config.session_dir = fs::path(a.common.out) / "sessions";
  config.budget = a.budget;
  config.profile = PromptProfile::named(a.profile);
  config.corpus_options.min_doc_freq = a.min_df;
  config.features.tfidf_dims = a.tfidf_dims;
  config.learner.seed = a.common.seed;
  json cfg = a.backend.empty() ? json{{"type", "mock"}} : read_json_file(a.backend);
  auto backend = make_backend(confine_audit_log(cfg, a.common.out));

  SessionManager manager(config, backend);
  const std::size_t restored = manager.restore_sessions();
  const json j = {{"host", a.host}, {"port", a.port}, {"restored_sessions", restored}, {"backend", backend->identifier()}};
  std::ostringstream os;
  os << "listening on " << a.host << ':' << a.port << " (" << restored << " sessions restored, backend "
     << backend->identifier() << ")\n";
  report(a.common, out, j, os.str());
  out.flush();
  serve(manager, a.host, a.port, fs::path(a.common.out) / "requests.jsonl");
  return 0;
}

}  // namespace

int run(int argc, char** argv) { return run(argc, argv, std::cout, std::cerr); }

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Active-learning topic construction and evaluation tools", "bass"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate and normalize a corpus (JSONL or CSV)");
  add_common(c_ingest, ingest.common);
  c_ingest->add_option("--input", ingest.input, "Corpus file")->required();
  c_ingest->add_option("--min-df", ingest.min_df, "Minimum document frequency")->capture_default_str();

  LdaArgs lda;
  auto* c_lda = app.add_subcommand("lda", "Train a collapsed-Gibbs LDA model");
  add_common(c_lda, lda.common);
  c_lda->add_option("--corpus", lda.corpus, "Corpus JSONL")->required();
  c_lda->add_option("--topics", lda.lda.topics, "Number of topics")->capture_default_str();
  c_lda->add_option("--sweeps", lda.lda.sweeps, "Gibbs sweeps")->capture_default_str();
  c_lda->add_option("--alpha-sum", lda.lda.alpha_sum, "Sum of the symmetric doc-topic prior")->capture_default_str();
  c_lda->add_option("--beta", lda.lda.beta, "Topic-word prior")->capture_default_str();
  c_lda->add_option("--min-df", lda.min_df, "Minimum document frequency")->capture_default_str();
  c_lda->add_option("--top-words", lda.top_words, "Words listed per topic")->capture_default_str();

  SimArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Pseudo-label active-learning simulation");
  add_common(c_sim, sim.common);
  c_sim->add_option("--corpus", sim.corpus, "Labeled corpus JSONL")->required();
  c_sim->add_option("--model", sim.model, "LDA model file")->required();
  c_sim->add_option("--budget", sim.sim.budget, "Labels per iteration")->capture_default_str();
  c_sim->add_option("--iterations", sim.sim.iterations, "Independent iterations")->capture_default_str();
  c_sim->add_option("--tfidf-dims", sim.sim.features.tfidf_dims, "Width of the tf-idf block")->capture_default_str();
  c_sim->add_option("--epochs", sim.sim.learner.epochs, "SGD passes per update")->capture_default_str();
  c_sim->add_option("--learning-rate", sim.sim.learner.learning_rate, "SGD step size")->capture_default_str();
  c_sim->add_option("--l2", sim.sim.learner.l2, "L2 penalty")->capture_default_str();
  c_sim->add_option("--min-df", sim.min_df, "Minimum document frequency")->capture_default_str();

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval-clusters", "Purity, ARI and NMI of a predicted partition");
  add_common(c_eval, eval.common);
  c_eval->add_option("--pred", eval.pred, "Predicted labels JSONL")->required();
  c_eval->add_option("--gold", eval.gold, "Gold labels JSONL")->required();

  BtArgs bt;
  auto* c_bt = app.add_subcommand("bt", "Bradley-Terry ranking from pairwise judgments");
  add_common(c_bt, bt.common);
  c_bt->add_option("--duels", bt.duels, "CSV question,group_a,group_b,winner[,annotator]")->required();
  c_bt->add_option("--tol", bt.bt.tol, "Convergence tolerance")->capture_default_str();
  c_bt->add_option("--max-iter", bt.bt.max_iter, "Iteration cap")->capture_default_str();
  c_bt->add_option("--pseudocount", bt.bt.pseudocount, "Win pseudocount per compared pair direction")
      ->capture_default_str();

  AlphaArgs alpha;
  auto* c_alpha = app.add_subcommand("alpha", "Nominal Krippendorff's alpha");
  add_common(c_alpha, alpha.common);
  c_alpha->add_option("--ratings", alpha.ratings, "CSV item,annotator,label")->required();

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-scifi", "Generate the synthetic sci-fi corpus");
  add_common(c_gen, gen.common);
  c_gen->add_option("--config", gen.config, "Generation spec JSON")->required();
  c_gen->add_option("--backend", gen.backend, "Backend config JSON (default: mock)");
  c_gen->add_option("--max-docs", gen.max_docs, "Cap applied after shuffling");
  c_gen->add_option("--label-rule", gen.label_rule, "Gold label: theme1 or pair")
      ->check(CLI::IsMember({"theme1", "pair"}));

  ServeArgs serve_args;
  auto* c_serve = app.add_subcommand("serve", "Run the labeling HTTP service");
  add_common(c_serve, serve_args.common);
  c_serve->add_option("--corpus-dir", serve_args.corpus_dir, "Directory of <corpus_id>.jsonl")->capture_default_str();
  c_serve->add_option("--model-dir", serve_args.model_dir, "Directory of <model_id>.json")->capture_default_str();
  c_serve->add_option("--host", serve_args.host)->capture_default_str();
  c_serve->add_option("--port", serve_args.port)->capture_default_str();
  c_serve->add_option("--backend", serve_args.backend, "Backend config JSON (default: mock)");
  c_serve->add_option("--profile", serve_args.profile, "Prompt profile")
      ->check(CLI::IsMember({"bills", "teaching"}))
      ->capture_default_str();
  c_serve->add_option("--budget", serve_args.budget, "Labels per session")->capture_default_str();
  c_serve->add_option("--tfidf-dims", serve_args.tfidf_dims, "Width of the tf-idf block")->capture_default_str();
  c_serve->add_option("--min-df", serve_args.min_df, "Minimum document frequency")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_ingest->parsed()) return run_ingest(ingest, out);
    if (c_lda->parsed()) return run_lda(lda, out);
    if (c_sim->parsed()) return run_simulate(sim, out);
    if (c_eval->parsed()) return run_eval(eval, out);
    if (c_bt->parsed()) return run_bt(bt, out);
    if (c_alpha->parsed()) return run_alpha(alpha, out);
    if (c_gen->parsed()) {
      gen.seed_given = c_gen->count("--seed") > 0;
      return run_gen(gen, out);
    }
    if (c_serve->parsed()) return run_serve(serve_args, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const BackendError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace bass::cli
