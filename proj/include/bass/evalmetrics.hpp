#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bass/common.hpp"
#include "bass/error.hpp"

namespace bass {

// Contingency table between two partitions over the same document set.
struct Contingency {
  Eigen::MatrixXd counts;  // predicted cluster x gold class
  double total = 0.0;
};

// Throws ValidationError when the partitions cover different documents.
Contingency contingency(const Partition& pred, const Partition& gold);

double purity(const Partition& pred, const Partition& gold);
// Pair-counting adjusted Rand index. Two identical trivial partitions score 1.
double ari(const Partition& pred, const Partition& gold);
// Mutual information over the arithmetic mean of the entropies (nats), 0/0 := 0.
double nmi(const Partition& pred, const Partition& gold);

struct ClusterScores {
  double purity = 0.0;
  double ari = 0.0;
  double nmi = 0.0;
};

ClusterScores cluster_scores(const Partition& pred, const Partition& gold);

// Mean pairwise cosine, 2 / (K (K - 1)) * sum_{i<j} cos(a_i, a_j).
template <typename Vector>
double consistency(const std::vector<Vector>& answers) {
  const std::size_t k = answers.size();
  if (k < 2) throw ValidationError("consistency needs at least two answers");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (answers[i].norm() == 0) throw ValidationError("consistency: zero-length answer embedding");
    if (answers[i].size() != answers[0].size()) throw ValidationError("consistency: embedding dimensions differ");
    for (std::size_t j = i + 1; j < k; ++j) sum += cosine(answers[i], answers[j]);
  }
  return 2.0 / (static_cast<double>(k) * static_cast<double>(k - 1)) * sum;
}

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Unit-norm vector of dimension(). Throws BackendError on failure.
  virtual VectorXd embed(std::string_view text) = 0;
  virtual int dimension() const = 0;
  virtual std::string identifier() const = 0;
};

// Signed feature hashing of the tokenized text, L2-normalized. Texts with no
// tokens hash their full lowercase string into a single bucket.
class MockEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit MockEmbeddingProvider(int dimension = 256) : dimension_(dimension) {}
  VectorXd embed(std::string_view text) override;
  int dimension() const override { return dimension_; }
  std::string identifier() const override { return "mock-hash-" + std::to_string(dimension_); }

 private:
  int dimension_;
};

// OpenAI-compatible /v1/embeddings client.
struct HttpEmbeddingConfig {
  std::string endpoint;  // e.g. https://api.openai.com/v1/embeddings
  std::string model = "all-mpnet-base-v2";
  std::string api_key_env = "BASS_EMBEDDING_API_KEY";
  double timeout_seconds = 30.0;
};

class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);
  VectorXd embed(std::string_view text) override;
  int dimension() const override { return dimension_; }
  std::string identifier() const override { return "http:" + config_.model; }

 private:
  HttpEmbeddingConfig config_;
  int dimension_ = 0;
};

double answer_quality(std::string_view answer, std::string_view gold_answer, EmbeddingProvider& provider);

// One nominal rating: (item, annotator, label).
struct Rating {
  std::string item;
  std::string annotator;
  std::string label;
};

// Nominal Krippendorff's alpha, 1 - D_o / D_e, from the coincidence matrix.
// Items with a single rating are not pairable and are ignored. Throws
// UndefinedAlphaError when nothing is pairable or only one category occurs.
double krippendorff_alpha(const std::vector<Rating>& ratings);

// CSV with header item,annotator,label.
std::vector<Rating> parse_ratings_csv(std::string_view content);

// metric,value
std::string metrics_csv(const std::vector<std::pair<std::string, double>>& metrics);

// JSONL records with "id" or "doc_id" and "label".
Partition parse_partition_jsonl(std::string_view content);
Partition load_partition(const std::filesystem::path& path);

}  // namespace bass
