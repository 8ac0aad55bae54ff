#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bass/active.hpp"
#include "bass/corpus.hpp"
#include "bass/evalmetrics.hpp"
#include "bass/topicmodel.hpp"

namespace bass {

inline constexpr int kDefaultBudget = 200;
inline constexpr int kDefaultIterations = 5;

struct SimOptions {
  int budget = kDefaultBudget;
  int iterations = kDefaultIterations;
  std::uint64_t seed = 0;
  LearnerOptions learner;  // learner.seed is replaced per iteration
  FeatureOptions features;
};

struct StepRecord {
  int iteration = 0;  // -1 marks the across-iteration median row
  int step = 0;       // number of labeled documents
  std::string doc_id;
  ClusterScores scores;
};

struct SimResult {
  std::vector<StepRecord> steps;    // iteration-major
  std::vector<StepRecord> medians;  // one per step, doc_id empty

  // iteration,step,doc_id,purity,ari,nmi. Median rows use iteration "median".
  std::string to_csv() const;
  // Records of one iteration in step order.
  std::vector<StepRecord> iteration(int index) const;
};

// Seed of the learner in a given iteration.
std::uint64_t iteration_seed(std::uint64_t seed, int iteration);

// Each doc is its dominant topic, labeled "topic_<k>".
Partition baseline_assignment(const TopicModelState& lda);

Partition gold_partition(const Corpus& corpus);

// Pseudo-label simulation: select, label with gold, update, propagate,
// score against gold, for `budget` steps (fewer if the corpus runs out), in
// each of `iterations` independent runs.
SimResult simulate(const Corpus& corpus, const TopicModelState& lda, SimOptions options = {});

// Same loop over a prebuilt feature table, one iteration.
std::vector<StepRecord> simulate_run(const Corpus& corpus, const TopicModelState& lda,
                                     std::shared_ptr<const FeatureTable> features, int budget, LearnerOptions learner,
                                     int iteration_index = 0);

}  // namespace bass
