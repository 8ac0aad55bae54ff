#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bass/common.hpp"
#include "bass/corpus.hpp"

namespace bass {

// Raw-count tf times ln(N / df) idf over the corpus vocabulary.
struct TfidfIndex {
  SparseRowMatrix doc_vectors;  // documents x vocabulary
  VectorXd idf;
  Eigen::VectorXi doc_freq;
  VectorXd norm;  // L2 norm of each row of doc_vectors
  std::vector<std::string> folded_text;  // lowercased document texts for substring matching

  std::size_t num_documents() const { return static_cast<std::size_t>(doc_vectors.rows()); }
  std::size_t num_terms() const { return static_cast<std::size_t>(doc_vectors.cols()); }
  double weight(std::size_t doc, int term) const { return doc_vectors.coeff(static_cast<Eigen::Index>(doc), term); }
};

TfidfIndex build_index(const Corpus& corpus);

// Query vector in the index's term space.
SparseVectorXd query_vector(const TfidfIndex& index, const Corpus& corpus, std::string_view query);

struct SearchHit {
  std::string doc_id;
  double score = 0.0;  // cosine similarity, in [0, 1]
  bool exact_match = false;

  bool operator==(const SearchHit&) const = default;
};

// Two tiers: documents whose text contains the query (case-insensitive)
// first, then all others; each tier by descending cosine, ties by ascending
// document id. Empty or whitespace-only queries return nothing.
std::vector<SearchHit> search(const TfidfIndex& index, const Corpus& corpus, std::string_view query, std::size_t k);

}  // namespace bass
