#include "bass/simharness.hpp"

#include <future>
#include <map>

#include "bass/error.hpp"
#include "bass/io.hpp"
#include "bass/search.hpp"

namespace bass {

std::uint64_t iteration_seed(std::uint64_t seed, int iteration) {
  return derive_seed(seed, static_cast<std::uint64_t>(iteration));
}

Partition baseline_assignment(const TopicModelState& lda) {
  Partition out;
  for (std::size_t d = 0; d < lda.num_documents(); ++d) {
    const auto dom = dominant_topic(lda.theta.row(static_cast<Eigen::Index>(d)));
    out.emplace(lda.doc_ids[d], "topic_" + std::to_string(dom.topic));
  }
  return out;
}

Partition gold_partition(const Corpus& corpus) {
  Partition out;
  for (const auto& d : corpus.documents()) {
    if (!d.gold_label) throw ValidationError("document \"" + d.id + "\" has no gold label");
    out.emplace(d.id, *d.gold_label);
  }
  return out;
}

std::vector<StepRecord> simulate_run(const Corpus& corpus, const TopicModelState& lda,
                                     std::shared_ptr<const FeatureTable> features, int budget, LearnerOptions learner,
                                     int iteration_index) {
  const Partition gold = gold_partition(corpus);
  ActiveLearner session(std::move(features), learner);
  std::vector<StepRecord> out;
  for (int step = 1; step <= budget; ++step) {
    std::string doc_id;
    try {
      doc_id = session.next_document(lda);
    } catch (const ExhaustedError&) {
      break;
    }
    session.add_label({doc_id, gold.at(doc_id), LabelSource::manual});
    out.push_back({iteration_index, step, doc_id, cluster_scores(session.propagate(), gold)});
  }
  return out;
}

SimResult simulate(const Corpus& corpus, const TopicModelState& lda, SimOptions options) {
  if (options.budget < 1) throw ValidationError("budget must be >= 1");
  if (options.iterations < 1) throw ValidationError("iterations must be >= 1");
  gold_partition(corpus);  // validates before any work
  check_compatible(lda, corpus);

  const TfidfIndex index = build_index(corpus);
  auto features = std::make_shared<const FeatureTable>(FeatureTable::build(corpus, index, lda, options.features));

  std::vector<std::future<std::vector<StepRecord>>> runs;
  for (int it = 0; it < options.iterations; ++it) {
    LearnerOptions learner = options.learner;
    learner.seed = iteration_seed(options.seed, it);
    runs.push_back(std::async(std::launch::async, [&, learner, it] {
      return simulate_run(corpus, lda, features, options.budget, learner, it);
    }));
  }

  SimResult result;
  std::map<int, std::vector<ClusterScores>> by_step;
  for (auto& f : runs) {
    for (auto& rec : f.get()) {
      by_step[rec.step].push_back(rec.scores);
      result.steps.push_back(std::move(rec));
    }
  }
  for (const auto& [step, scores] : by_step) {
    std::vector<double> p, a, n;
    for (const auto& s : scores) {
      p.push_back(s.purity);
      a.push_back(s.ari);
      n.push_back(s.nmi);
    }
    result.medians.push_back({-1, step, {}, {median(p), median(a), median(n)}});
  }
  return result;
}

std::string SimResult::to_csv() const {
  std::string out = "iteration,step,doc_id,purity,ari,nmi\n";
  auto row = [&](const StepRecord& r) {
    out += (r.iteration < 0 ? std::string("median") : std::to_string(r.iteration)) + "," + std::to_string(r.step) + "," +
           io::csv_escape(r.doc_id) + "," + io::format_double(r.scores.purity) + "," + io::format_double(r.scores.ari) +
           "," + io::format_double(r.scores.nmi) + "\n";
  };
  for (const auto& r : steps) row(r);
  for (const auto& r : medians) row(r);
  return out;
}

std::vector<StepRecord> SimResult::iteration(int index) const {
  std::vector<StepRecord> out;
  for (const auto& r : steps) {
    if (r.iteration == index) out.push_back(r);
  }
  return out;
}

}  // namespace bass
