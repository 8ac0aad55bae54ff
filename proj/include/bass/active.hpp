#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bass/common.hpp"
#include "bass/corpus.hpp"
#include "bass/error.hpp"
#include "bass/search.hpp"
#include "bass/topicmodel.hpp"

namespace bass {

enum class LabelSource { approved, revised, manual };

std::string_view to_string(LabelSource source);
// Throws ValidationError for anything but approve(d)/revise(d)/manual.
LabelSource parse_label_source(std::string_view s);

struct LabeledExample {
  std::string doc_id;
  std::string label;
  LabelSource source = LabelSource::manual;

  bool operator==(const LabeledExample&) const = default;
};

// One live label per document. Relabeling replaces the entry in place, so
// the example order is the order documents were first labeled.
class LabelStore {
 public:
  void assign(LabeledExample example);
  const std::vector<LabeledExample>& examples() const { return examples_; }
  const LabeledExample* find(std::string_view doc_id) const;
  bool contains(std::string_view doc_id) const { return find(doc_id) != nullptr; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  // Live document count per label.
  std::map<std::string, int> counts() const;

  std::string to_jsonl() const;
  static LabelStore from_jsonl(std::string_view content);

 private:
  std::vector<LabeledExample> examples_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct FeatureOptions {
  // Width of the tf-idf block: the highest document-frequency terms.
  int tfidf_dims = 5000;
};

struct FeatureSpec {
  int topic_dims = 0;
  std::vector<int> tfidf_terms;  // vocabulary ids, ascending

  int tfidf_dims() const { return static_cast<int>(tfidf_terms.size()); }
  int dims() const { return topic_dims + tfidf_dims(); }
  bool operator==(const FeatureSpec&) const = default;
};

// Top-M vocabulary ids by document frequency (ties by ascending id), sorted ascending.
FeatureSpec make_feature_spec(const TfidfIndex& index, int topic_dims, FeatureOptions options = {});

// [theta | tf-idf restricted to FeatureSpec::tfidf_terms], each block L2-normalized.
// All-zero blocks stay zero.
class FeatureTable {
 public:
  static FeatureTable build(const Corpus& corpus, const TfidfIndex& index, const TopicModelState& lda,
                            FeatureOptions options = {});

  const FeatureSpec& spec() const { return spec_; }
  const SparseRowMatrix& rows() const { return rows_; }
  std::size_t size() const { return doc_ids_.size(); }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  std::size_t index_of(std::string_view doc_id) const;
  bool contains(std::string_view doc_id) const;
  VectorXd dense_row(std::size_t doc) const { return VectorXd(rows_.row(static_cast<Eigen::Index>(doc)).transpose()); }

 private:
  FeatureSpec spec_;
  SparseRowMatrix rows_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

VectorXd featurize(const Corpus& corpus, const TfidfIndex& index, const TopicModelState& lda, std::string_view doc_id,
                   FeatureOptions options = {});

struct LearnerOptions {
  int epochs = 10;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

// Multinomial logistic regression without intercept, weights |L| x (K+M).
struct ClassifierState {
  std::vector<std::string> classes;  // sorted
  RowMatrixXd weights;
  FeatureSpec spec;
  LearnerOptions options;
  std::uint64_t updates = 0;

  std::optional<std::size_t> class_index(std::string_view label) const;
};

// Class probabilities for one feature row. Empty for a model with no classes.
VectorXd predict_proba(const ClassifierState& state, const FeatureTable& features, std::size_t doc);

// One cross-entropy SGD step with L2 decay on a document's feature row.
void sgd_step(ClassifierState& state, const FeatureTable& features, std::size_t doc, std::size_t class_index);

// Zero weights, then options.epochs shuffled passes over the examples. The
// shuffle stream is seeded with options.seed on every call.
ClassifierState fit_batch(const std::vector<LabeledExample>& examples, const FeatureTable& features,
                          LearnerOptions options);

// H(posterior) * theta_star in nats. Throws ValidationError unless the
// posterior is a probability vector and theta_star is in (0, 1].
template <typename Derived>
double selection_score(const Eigen::MatrixBase<Derived>& posterior, double theta_star) {
  if (posterior.size() == 0) throw ValidationError("selection_score: empty posterior");
  if ((posterior.array() < 0).any() || std::abs(posterior.sum() - 1.0) > 1e-6) {
    throw ValidationError("selection_score: posterior does not sum to 1");
  }
  if (!(theta_star > 0.0 && theta_star <= 1.0)) throw ValidationError("selection_score: theta_star outside (0, 1]");
  return entropy(posterior) * theta_star;
}

struct SelectionScore {
  std::string doc_id;
  int topic = 0;
  double entropy = 1.0;
  double theta_star = 0.0;
  double score = 0.0;
};

// Scores of all unlabeled documents. With no posteriors (cold start) the
// entropy term is the constant 1.
std::vector<SelectionScore> selection_scores(const RowMatrixXd& theta, const RowMatrixXd* posteriors,
                                             const std::vector<bool>& labeled, const std::vector<std::string>& doc_ids);

// Two-level selection: the dominant-topic group with the highest median
// score (ties to the smaller topic), then the best document in it (ties to
// the smaller id). nullopt when every document is labeled.
std::optional<std::size_t> select_next(const RowMatrixXd& theta, const RowMatrixXd* posteriors,
                                       const std::vector<bool>& labeled, const std::vector<std::string>& doc_ids);

double median(std::vector<double> values);

// A labeling session's learner: label store plus classifier over a fixed
// feature table.
class ActiveLearner {
 public:
  enum class Update { reinitialized, incremental };

  explicit ActiveLearner(std::shared_ptr<const FeatureTable> features, LearnerOptions options = {});

  Update add_label(LabeledExample example);

  const ClassifierState& classifier() const { return state_; }
  const LabelStore& labels() const { return store_; }
  const FeatureTable& features() const { return *features_; }
  const LearnerOptions& options() const { return options_; }

  // D x |L|; zero columns when there are no classes.
  RowMatrixXd predict_proba_all() const;
  VectorXd predict_proba(std::string_view doc_id) const;

  // Throws ExhaustedError once every document is labeled.
  std::string next_document(const TopicModelState& lda) const;
  std::vector<bool> labeled_mask() const;

  // Human labels verbatim, argmax prediction elsewhere. Throws EmptyModelError
  // with no classes.
  Partition propagate() const;

  nlohmann::json snapshot() const;
  static ActiveLearner restore(const nlohmann::json& snapshot, std::shared_ptr<const FeatureTable> features);

 private:
  std::shared_ptr<const FeatureTable> features_;
  LearnerOptions options_;
  ClassifierState state_;
  LabelStore store_;
};

}  // namespace bass
