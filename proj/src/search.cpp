#include "bass/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bass/error.hpp"
#include "bass/text.hpp"

namespace bass {

TfidfIndex build_index(const Corpus& corpus) {
  const auto n_docs = static_cast<Eigen::Index>(corpus.size());
  const auto n_terms = static_cast<Eigen::Index>(corpus.vocabulary().size());

  TfidfIndex index;
  index.doc_freq = Eigen::VectorXi::Zero(n_terms);
  std::vector<std::map<int, int>> counts(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (int t : corpus.term_ids(d)) ++counts[d][t];
    for (const auto& [t, c] : counts[d]) ++index.doc_freq[t];
  }

  index.idf = VectorXd::Zero(n_terms);
  for (Eigen::Index t = 0; t < n_terms; ++t) {
    if (index.doc_freq[t] > 0) index.idf[t] = std::log(static_cast<double>(n_docs) / index.doc_freq[t]);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& [t, c] : counts[d]) {
      triplets.emplace_back(static_cast<int>(d), t, c * index.idf[t]);
    }
  }
  index.doc_vectors.resize(n_docs, n_terms);
  index.doc_vectors.setFromTriplets(triplets.begin(), triplets.end());
  index.doc_vectors.makeCompressed();

  index.norm = VectorXd::Zero(n_docs);
  for (Eigen::Index d = 0; d < n_docs; ++d) index.norm[d] = index.doc_vectors.row(d).norm();
  for (const auto& doc : corpus.documents()) index.folded_text.push_back(text::lowercase(doc.text));
  return index;
}

SparseVectorXd query_vector(const TfidfIndex& index, const Corpus& corpus, std::string_view query) {
  SparseVectorXd q(static_cast<Eigen::Index>(index.num_terms()));
  std::map<int, int> counts;
  for (const auto& tok : tokenize(query)) {
    if (auto id = corpus.term_id(tok)) ++counts[*id];
  }
  for (const auto& [t, c] : counts) {
    const double w = c * index.idf[t];
    if (w != 0.0) q.insert(t) = w;
  }
  return q;
}

std::vector<SearchHit> search(const TfidfIndex& index, const Corpus& corpus, std::string_view query, std::size_t k) {
  if (k == 0) throw ValidationError("search: k must be >= 1");
  const std::string trimmed = text::trim(query);
  if (trimmed.empty()) return {};
  if (index.num_documents() != corpus.size()) throw ValidationError("search: index does not match corpus");

  const SparseVectorXd q = query_vector(index, corpus, trimmed);
  const double q_norm = q.norm();
  const std::string needle = text::lowercase(trimmed);

  std::vector<SearchHit> hits;
  hits.reserve(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    SearchHit hit;
    hit.doc_id = corpus.document(d).id;
    hit.exact_match = index.folded_text[d].find(needle) != std::string::npos;
    const double denom = q_norm * index.norm[static_cast<Eigen::Index>(d)];
    if (denom > 0.0) {
      const double dot = index.doc_vectors.row(static_cast<Eigen::Index>(d)).dot(q);
      hit.score = std::clamp(dot / denom, 0.0, 1.0);
    }
    hits.push_back(std::move(hit));
  }

  auto before = [](const SearchHit& a, const SearchHit& b) {
    if (a.exact_match != b.exact_match) return a.exact_match;
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  };
  const std::size_t keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), before);
  hits.resize(keep);
  return hits;
}

}  // namespace bass
