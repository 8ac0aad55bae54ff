// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "bass/active.hpp"
#include "bass/btrank.hpp"
#include "bass/cli.hpp"
#include "bass/evalmetrics.hpp"
#include "bass/io.hpp"
#include "bass/search.hpp"
#include "bass/simharness.hpp"
#include "bass/synthgen.hpp"
#include "bass/topicmodel.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bass;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// ---- metrics

Outcome metric_oracle() {
  Rng rng(20240601);
  const auto t0 = Clock::now();
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(11);
    const std::size_t kp = 1 + rng.index(n), kg = 1 + rng.index(n);
    Partition pred, gold;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "i" + std::to_string(i);
      pred[id] = "p" + std::to_string(rng.index(kp));
      gold[id] = "g" + std::to_string(rng.index(kg));
    }
    worst = std::max({worst, std::abs(purity(pred, gold) - oracle::purity(pred, gold)),
                      std::abs(ari(pred, gold) - oracle::ari(pred, gold)),
                      std::abs(nmi(pred, gold) - oracle::nmi(pred, gold))});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0, "max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.3f", secs) + " s"};
}

// ---- selection

Outcome selection_rule() {
  Rng rng(77);
  int matrix_ok = 0, learner_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t D = 1 + rng.index(50), K = 2 + rng.index(6), L = 1 + rng.index(4);
    RowMatrixXd theta(D, K), post(D, L);
    std::vector<std::vector<double>> t_std(D), p_std(D);
    std::vector<bool> labeled(D);
    std::vector<std::string> ids(D);
    for (std::size_t d = 0; d < D; ++d) {
      // Coarse weights so ties in medians and scores actually occur.
      double s = 0;
      for (std::size_t k = 0; k < K; ++k) s += theta(d, k) = 1.0 + static_cast<double>(rng.index(4));
      theta.row(d) /= s;
      double q = 0;
      for (std::size_t l = 0; l < L; ++l) q += post(d, l) = 1.0 + static_cast<double>(rng.index(3));
      post.row(d) /= q;
      t_std[d] = std::vector<double>(theta.row(d).data(), theta.row(d).data() + K);
      p_std[d] = std::vector<double>(post.row(d).data(), post.row(d).data() + L);
      labeled[d] = rng.uniform() < 0.3;
      ids[d] = "doc" + std::to_string(rng.index(1000)) + "-" + std::to_string(d);
    }
    const bool cold = trial % 5 == 0;
    if (select_next(theta, cold ? nullptr : &post, labeled, ids) ==
        oracle::select_next(t_std, cold ? nullptr : &p_std, labeled, ids)) {
      ++matrix_ok;
    }
  }

  // End to end: planted corpora, trained LDA, live classifier posteriors.
  for (int trial = 0; trial < 100; ++trial) {
    PlantedSpec ps;
    ps.topics = 3;
    ps.docs = 5 + static_cast<int>(rng.index(46));
    ps.doc_length = 15;
    ps.words_per_topic = 8;
    ps.seed = 1000 + static_cast<std::uint64_t>(trial);
    Corpus corpus(planted_documents(ps), CorpusOptions{1});
    LdaOptions lo;
    lo.topics = 2 + static_cast<int>(rng.index(4));
    lo.sweeps = 20;
    lo.seed = ps.seed;
    const auto lda = train_lda(corpus, lo);
    const auto index = build_index(corpus);
    auto features = std::make_shared<const FeatureTable>(FeatureTable::build(corpus, index, lda, {}));
    LearnerOptions opts;
    opts.seed = ps.seed;
    ActiveLearner learner(features, opts);
    const std::size_t n_labels = rng.index(corpus.size());
    for (std::size_t i : rng.permutation(corpus.size())) {
      if (learner.labels().size() >= n_labels) break;
      const auto& d = corpus.document(i);
      learner.add_label({d.id, *d.gold_label, LabelSource::manual});
    }
    std::vector<std::vector<double>> theta, post;
    for (Eigen::Index d = 0; d < lda.theta.rows(); ++d) theta.push_back(to_std(lda.theta.row(d).transpose()));
    const bool cold = learner.labels().size() == 0;
    if (!cold) {
      const auto p = learner.predict_proba_all();
      for (Eigen::Index d = 0; d < p.rows(); ++d) post.push_back(to_std(p.row(d).transpose()));
    }
    const auto want = oracle::select_next(theta, cold ? nullptr : &post, learner.labeled_mask(), features->doc_ids());
    if (want && learner.next_document(lda) == features->doc_ids()[*want]) ++learner_ok;
  }
  return {matrix_ok == 100 && learner_ok == 100,
          std::to_string(matrix_ok) + "/100 matrix fixtures, " + std::to_string(learner_ok) + "/100 learner fixtures"};
}

// ---- reinit

Outcome reinit_equality() {
  const Corpus corpus(testing_support::three_topic_docs(10, 3));
  const auto lda = train_lda(corpus, {4, 5.0, 0.01, 30, 3});
  const auto index = build_index(corpus);
  auto features = std::make_shared<const FeatureTable>(FeatureTable::build(corpus, index, lda, {}));
  const std::vector<std::string> labels{"agriculture", "defense", "education", "other", "misc"};
  Rng rng(8);
  int checks = 0, equal = 0;
  for (int run = 0; run < 10; ++run) {
    LearnerOptions o;
    o.seed = 500 + static_cast<std::uint64_t>(run);
    ActiveLearner learner(features, o);
    for (int step = 0; step < 15; ++step) {
      const auto& doc = corpus.document(rng.index(corpus.size()));
      const std::string label = labels[rng.index(labels.size())];
      const bool fresh = !learner.classifier().class_index(label).has_value();
      const auto kind = learner.add_label({doc.id, label, LabelSource::manual});
      if (!fresh) continue;
      ++checks;
      if (kind != ActiveLearner::Update::reinitialized) continue;
      std::vector<std::pair<std::vector<double>, std::string>> rows;
      for (const auto& e : learner.labels().examples()) {
        rows.emplace_back(to_std(features->dense_row(features->index_of(e.doc_id))), e.label);
      }
      const auto batch = oracle::fit_batch(rows, o.epochs, o.learning_rate, o.l2, o.seed);
      const auto& st = learner.classifier();
      bool same = st.classes == batch.classes && static_cast<std::size_t>(st.weights.rows()) == batch.w.size();
      for (std::size_t c = 0; same && c < batch.w.size(); ++c) {
        for (std::size_t j = 0; same && j < batch.w[c].size(); ++j) {
          same = st.weights(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) == batch.w[c][j];
        }
      }
      if (same) ++equal;
    }
  }
  return {checks > 0 && equal == checks, std::to_string(equal) + "/" + std::to_string(checks) + " reinits bit-identical"};
}

// ---- simulation

Outcome simulation_direction() {
  const auto t0 = Clock::now();
  PlantedSpec ps;
  ps.topics = 3;
  ps.docs = 300;
  ps.mix = 0.2;
  ps.seed = 2024;
  const Corpus corpus(planted_documents(ps));
  // More topics than planted classes, as in the real protocol (65 topics
  // over a corpus with fewer gold categories).
  LdaOptions lo;
  lo.topics = 9;
  lo.sweeps = 200;
  lo.seed = 2024;
  const auto lda = train_lda(corpus, lo);
  const auto base = cluster_scores(baseline_assignment(lda), gold_partition(corpus));
  SimOptions so;
  so.budget = 100;
  so.iterations = 5;
  so.seed = 31;
  const auto result = simulate(corpus, lda, so);
  const auto final_median = result.medians.back().scores;
  const double secs = seconds_since(t0);
  const bool pass = result.medians.back().step == 100 && final_median.nmi > base.nmi && final_median.ari > base.ari &&
                    secs < 120.0;
  return {pass, "median NMI " + fmt("%.3f", final_median.nmi) + " vs " + fmt("%.3f", base.nmi) + ", ARI " +
                    fmt("%.3f", final_median.ari) + " vs " + fmt("%.3f", base.ari) + ", " + fmt("%.1f", secs) + " s"};
}

// ---- protocol constants

int run_cli(std::vector<std::string> args, std::string& out) {
  args.insert(args.begin(), "bass");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(args.size()), argv.data(), o, e);
  out = o.str();
  return code;
}

Outcome protocol_constants() {
  const SimOptions so;
  const LdaOptions lo;
  bool ok = so.budget == 200 && so.iterations == 5 && lo.topics == 65;

  testing_support::TempDir dir;
  save_corpus(Corpus(testing_support::three_topic_docs(3, 1)), dir / "c.jsonl");
  std::string out;
  ok = ok && run_cli({"lda", "--corpus", (dir / "c.jsonl").string(), "--sweeps", "5", "--out", (dir / "m.json").string(),
                      "--json"},
                     out) == 0;
  ok = ok && load_model(dir / "m.json").num_topics == 65;
  ok = ok && run_cli({"simulate", "--corpus", (dir / "c.jsonl").string(), "--model", (dir / "m.json").string(), "--json"},
                     out) == 0;
  json j;
  if (ok) j = json::parse(out);
  ok = ok && j["budget"] == 200 && j["iterations"] == 5;
  return {ok, "budget " + std::to_string(so.budget) + ", iterations " + std::to_string(so.iterations) + ", K " +
                  std::to_string(lo.topics) + " (library and CLI defaults)"};
}

// ---- LDA

Outcome lda_sanity() {
  int good = 0;
  double worst_secs = 0, lowest = 1;
  for (int s = 0; s < 5; ++s) {
    PlantedSpec ps;
    ps.topics = 3;
    ps.docs = 300;
    ps.seed = 100 + static_cast<std::uint64_t>(s);
    const Corpus corpus(planted_documents(ps));
    const auto t0 = Clock::now();
    LdaOptions lo;
    lo.topics = 3;
    lo.sweeps = 500;
    lo.seed = ps.seed;
    const auto lda = train_lda(corpus, lo);
    worst_secs = std::max(worst_secs, seconds_since(t0));
    const double p = purity(baseline_assignment(lda), gold_partition(corpus));
    lowest = std::min(lowest, p);
    if (p >= 0.9) ++good;
  }
  return {good == 5 && worst_secs < 30.0, std::to_string(good) + "/5 seeds purity >= 0.9 (min " + fmt("%.3f", lowest) +
                                             "), slowest fit " + fmt("%.2f", worst_secs) + " s"};
}

// ---- Bradley-Terry

Outcome bt_recovery() {
  const std::vector<std::string> groups{"g1", "g2", "g3", "g4"};
  const std::vector<double> planted{0.4, 0.3, 0.2, 0.1};
  std::vector<double> rho;
  for (int s = 0; s < 5; ++s) {
    Rng rng(900 + static_cast<std::uint64_t>(s));
    JudgmentSet js;
    int q = 0;
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = 0; b < groups.size(); ++b) {
        if (a == b) continue;
        for (int i = 0; i < 50; ++i) {
          const bool a_wins = rng.uniform() < planted[a] / (planted[a] + planted[b]);
          js.add({"q" + std::to_string(q++), groups[a], groups[b], a_wins ? Winner::a : Winner::b});
        }
      }
    }
    rho.push_back(oracle::spearman(groups, rank(fit_bt(js))));
  }
  const double med = median(rho);

  BtOptions exact;
  exact.pseudocount = 0;
  JudgmentSet pair;
  for (int i = 0; i < 3; ++i) pair.add({"q" + std::to_string(i), "A", "B", Winner::a});
  pair.add({"q3", "A", "B", Winner::b});
  const auto fit = fit_bt(pair, exact);
  const double err = std::abs(fit.strengths.at("A") - 0.75) + std::abs(fit.strengths.at("B") - 0.25);
  return {med >= 0.9 && err <= 1e-6,
          "median Spearman " + fmt("%.3f", med) + ", closed-form error " + fmt("%.2g", err)};
}

// ---- consistency

Outcome consistency_formula() {
  Rng rng(3);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    // Vectors in a random 2-plane at known angles: cos(a_i, a_j) = cos(t_i - t_j).
    const int dim = 3 + static_cast<int>(rng.index(6));
    const std::size_t k = 2 + rng.index(6);
    VectorXd u = VectorXd::Zero(dim), v = VectorXd::Zero(dim);
    u(0) = 1;
    v(1) = 1;
    std::vector<double> angle(k);
    std::vector<VectorXd> answers;
    for (std::size_t i = 0; i < k; ++i) {
      angle[i] = rng.uniform() * 3.14159;
      const double scale = 0.5 + 3 * rng.uniform();
      answers.push_back(scale * (std::cos(angle[i]) * u + std::sin(angle[i]) * v));
    }
    double sum = 0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) sum += std::cos(angle[i] - angle[j]);
    }
    const double want = 2.0 / (static_cast<double>(k) * static_cast<double>(k - 1)) * sum;
    worst = std::max(worst, std::abs(consistency(answers) - want));

    std::vector<std::vector<double>> plain;
    for (const auto& a : answers) plain.push_back(to_std(a));
    worst = std::max(worst, std::abs(consistency(answers) - oracle::consistency(plain)));
  }
  // Two identical answers and two orthogonal ones.
  std::vector<VectorXd> same{VectorXd::Ones(4), 2 * VectorXd::Ones(4)};
  std::vector<VectorXd> ortho{VectorXd::Unit(4, 0), VectorXd::Unit(4, 1), -VectorXd::Unit(4, 0)};
  worst = std::max(worst, std::abs(consistency(same) - 1.0));
  worst = std::max(worst, std::abs(consistency(ortho) - (-1.0 / 3.0)));
  return {worst <= 1e-9, "max |diff| " + fmt("%.3g", worst)};
}

// ---- generator

Outcome generator_fidelity() {
  const auto data = testing_support::source_dir() / "tests/data";
  testing_support::TempDir dir;
  std::string out;
  const int code = run_cli({"gen-scifi", "--config", (data / "scifi_small.json").string(), "--out", (dir / "gen").string()}, out);
  if (code != 0) return {false, "gen-scifi exited " + std::to_string(code)};
  std::size_t records = 0, complete = 0;
  std::istringstream lines(io::read_file(dir / "gen/corpus.jsonl"));
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    ++records;
    const auto j = json::parse(line);
    bool full = true;
    for (const char* key : {"id", "text", "label", "style", "mood", "theme1", "theme2", "setting", "question", "answer"}) {
      full = full && j.contains(key) && j[key].is_string() && !j[key].get<std::string>().empty();
    }
    if (full) ++complete;
  }
  const auto spec = load_gen_spec(data / "scifi_small.json");
  const auto want = json::parse(io::read_file(data / "avoid_expected.json"));
  const auto seeded = seed_avoid_dict(spec.sample_text);
  const bool harvest_ok = json(harvest_words(spec.sample_text)) == want["harvest"] &&
                          json(seeded.counts()) == want["counts"] && json(seeded.most_common()) == want["most_common"];
  return {records == 24 && complete == 24 && harvest_ok, std::to_string(records) + " records, " +
                                                             std::to_string(complete) + " with full metadata, harvest " +
                                                             (harvest_ok ? "matches" : "differs from") + " fixture"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric-oracle-equivalence", metric_oracle},
      {"selection-rule-equivalence", selection_rule},
      {"reinit-equality", reinit_equality},
      {"simulation-direction", simulation_direction},
      {"protocol-constants", protocol_constants},
      {"lda-sanity", lda_sanity},
      {"bradley-terry-recovery", bt_recovery},
      {"consistency-formula", consistency_formula},
      {"generator-fidelity", generator_fidelity},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
