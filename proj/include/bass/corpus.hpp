#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bass {

inline constexpr std::string_view kStopwordVersion = "en-v1";

// Shipped English stopword list (lowercase).
const std::unordered_set<std::string>& stopwords();
bool is_stopword(std::string_view lowercase_word);

// Lowercase alphabetic runs of length >= 3 that are not stopwords.
std::vector<std::string> tokenize(std::string_view text);

struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;
  std::optional<std::string> gold_label;
};

struct CorpusOptions {
  // Tokens must appear in at least this many documents to enter the vocabulary.
  int min_doc_freq = 2;
};

// Immutable document collection with a vocabulary over surviving tokens.
//
// Vocabulary indices are assigned in lexicographic token order, so two
// corpora with the same documents and options have identical vocabularies.
class Corpus {
 public:
  Corpus(std::vector<Document> documents, CorpusOptions options = {});

  std::size_t size() const { return documents_.size(); }
  const std::vector<Document>& documents() const { return documents_; }
  const Document& document(std::size_t index) const { return documents_.at(index); }
  // Throws LookupError for unknown ids.
  std::size_t index_of(std::string_view id) const;
  bool contains(std::string_view id) const;

  const std::vector<std::string>& vocabulary() const { return vocab_; }
  std::optional<int> term_id(std::string_view token) const;
  // Vocabulary ids of a document's tokens, in token order, out-of-vocabulary dropped.
  const std::vector<int>& term_ids(std::size_t index) const { return term_ids_.at(index); }
  std::size_t token_count() const { return token_count_; }

  // Sorted distinct gold labels.
  const std::vector<std::string>& label_set() const { return labels_; }
  bool fully_labeled() const;
  const CorpusOptions& options() const { return options_; }

 private:
  std::vector<Document> documents_;
  CorpusOptions options_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> vocab_index_;
  std::vector<std::vector<int>> term_ids_;
  std::vector<std::string> labels_;
  std::size_t token_count_ = 0;
};

// Builds documents from (id, text, label) triples and tokenizes them.
Document make_document(std::string id, std::string text, std::optional<std::string> label = std::nullopt);

Corpus parse_corpus_jsonl(std::string_view content, CorpusOptions options = {});
Corpus load_corpus(const std::filesystem::path& path, CorpusOptions options = {});
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string corpus_to_jsonl(const Corpus& corpus);

// Fingerprint of the vocabulary, stored in model files.
std::string vocabulary_hash(const std::vector<std::string>& vocab);

}  // namespace bass
