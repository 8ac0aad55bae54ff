#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bass/common.hpp"
#include "bass/corpus.hpp"

namespace bass {

inline constexpr int kDefaultTopics = 65;

struct LdaOptions {
  int topics = kDefaultTopics;
  // Symmetric prior: alpha_k = alpha_sum / topics.
  double alpha_sum = 5.0;
  double beta = 0.01;
  int sweeps = 500;
  std::uint64_t seed = 0;
};

using IntRowMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TopicModelState {
  int num_topics = 0;
  VectorXd alpha;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int sweeps = 0;

  std::vector<std::string> vocabulary;
  std::string vocab_hash;
  std::vector<std::string> doc_ids;

  std::vector<std::vector<int>> assignments;  // topic of each in-vocabulary token
  IntRowMatrix doc_topic;                     // D x K counts
  Eigen::MatrixXi topic_word;                 // K x V counts
  Eigen::VectorXi topic_total;                // K

  RowMatrixXd theta;  // D x K, rows sum to 1
  RowMatrixXd phi;    // K x V, rows sum to 1

  std::size_t num_documents() const { return doc_ids.size(); }
  std::size_t vocabulary_size() const { return vocabulary.size(); }
  // Throws LookupError for unknown ids.
  std::size_t doc_index(std::string_view doc_id) const;

  // Rebuilds theta/phi from the count tables and the id lookup.
  void refresh();

 private:
  std::unordered_map<std::string, std::size_t> doc_lookup_;
};

// Collapsed Gibbs sampler over the in-vocabulary tokens of a corpus.
class GibbsSampler {
 public:
  GibbsSampler(const Corpus& corpus, LdaOptions options);

  void sweep();
  int completed_sweeps() const { return state_.sweeps; }
  // Snapshot with theta and phi computed from the current counts.
  TopicModelState state() const;

 private:
  const Corpus& corpus_;
  LdaOptions options_;
  Rng rng_;
  TopicModelState state_;
  std::vector<double> cumulative_;
};

TopicModelState train_lda(const Corpus& corpus, LdaOptions options = {});

// n most probable words of a topic, ties by ascending vocabulary index.
std::vector<std::string> top_words(const TopicModelState& state, int topic, std::size_t n);

struct DominantTopic {
  int topic = 0;
  double probability = 0.0;
};

template <typename Derived>
DominantTopic dominant_topic(const Eigen::MatrixBase<Derived>& theta_row) {
  const auto k = argmax_first(theta_row);
  return {static_cast<int>(k), static_cast<double>(theta_row.derived().coeff(k))};
}

DominantTopic dominant_topic(const TopicModelState& state, std::string_view doc_id);

// Checks count conservation and that theta/phi match the count tables within
// 1e-9. Returns a description of the first violation.
std::optional<std::string> find_inconsistency(const TopicModelState& state, const Corpus& corpus);

// Throws ValidationError when the model was not trained on this corpus.
void check_compatible(const TopicModelState& state, const Corpus& corpus);

nlohmann::json model_to_json(const TopicModelState& state);
TopicModelState model_from_json(const nlohmann::json& j);
void save_model(const TopicModelState& state, const std::filesystem::path& path);
TopicModelState load_model(const std::filesystem::path& path);

}  // namespace bass
