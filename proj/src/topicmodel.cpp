#include "bass/topicmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bass/error.hpp"
#include "bass/io.hpp"

namespace bass {

using nlohmann::json;

std::size_t TopicModelState::doc_index(std::string_view doc_id) const {
  auto it = doc_lookup_.find(std::string(doc_id));
  if (it == doc_lookup_.end()) throw LookupError("unknown document id \"" + std::string(doc_id) + "\"");
  return it->second;
}

void TopicModelState::refresh() {
  const auto D = static_cast<Eigen::Index>(doc_ids.size());
  const auto K = static_cast<Eigen::Index>(num_topics);
  const auto V = static_cast<Eigen::Index>(vocabulary.size());
  const double alpha_total = alpha.sum();

  theta.resize(D, K);
  for (Eigen::Index d = 0; d < D; ++d) {
    const double n_d = doc_topic.row(d).sum();
    for (Eigen::Index k = 0; k < K; ++k) theta(d, k) = (doc_topic(d, k) + alpha[k]) / (n_d + alpha_total);
  }
  phi.resize(K, V);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double denom = topic_total[k] + V * beta;
    for (Eigen::Index w = 0; w < V; ++w) phi(k, w) = (topic_word(k, w) + beta) / denom;
  }

  doc_lookup_.clear();
  for (std::size_t i = 0; i < doc_ids.size(); ++i) doc_lookup_.emplace(doc_ids[i], i);
}

GibbsSampler::GibbsSampler(const Corpus& corpus, LdaOptions options)
    : corpus_(corpus), options_(options), rng_(options.seed) {
  if (options_.topics < 2) throw ValidationError("LDA needs at least 2 topics");
  if (options_.sweeps < 0) throw ValidationError("sweep count must be non-negative");
  if (!(options_.alpha_sum > 0.0) || !(options_.beta > 0.0)) throw ValidationError("LDA priors must be positive");
  if (corpus_.token_count() == 0) throw TrainingError("corpus has no in-vocabulary tokens to train on");

  const auto D = static_cast<Eigen::Index>(corpus_.size());
  const int K = options_.topics;
  const auto V = static_cast<Eigen::Index>(corpus_.vocabulary().size());

  auto& s = state_;
  s.num_topics = K;
  s.alpha = VectorXd::Constant(K, options_.alpha_sum / K);
  s.beta = options_.beta;
  s.seed = options_.seed;
  s.sweeps = 0;
  s.vocabulary = corpus_.vocabulary();
  s.vocab_hash = vocabulary_hash(s.vocabulary);
  for (const auto& d : corpus_.documents()) s.doc_ids.push_back(d.id);

  s.doc_topic = IntRowMatrix::Zero(D, K);
  s.topic_word = Eigen::MatrixXi::Zero(K, V);
  s.topic_total = Eigen::VectorXi::Zero(K);
  s.assignments.resize(corpus_.size());
  for (std::size_t d = 0; d < corpus_.size(); ++d) {
    const auto& words = corpus_.term_ids(d);
    auto& z = s.assignments[d];
    z.resize(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int k = static_cast<int>(rng_.index(static_cast<std::size_t>(K)));
      z[i] = k;
      ++s.doc_topic(static_cast<Eigen::Index>(d), k);
      ++s.topic_word(k, words[i]);
      ++s.topic_total[k];
    }
  }
  cumulative_.resize(static_cast<std::size_t>(K));
}

void GibbsSampler::sweep() {
  auto& s = state_;
  const int K = s.num_topics;
  const double v_beta = static_cast<double>(s.vocabulary.size()) * s.beta;
  for (std::size_t d = 0; d < corpus_.size(); ++d) {
    const auto row = static_cast<Eigen::Index>(d);
    const auto& words = corpus_.term_ids(d);
    auto& z = s.assignments[d];
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int w = words[i];
      const int old = z[i];
      --s.doc_topic(row, old);
      --s.topic_word(old, w);
      --s.topic_total[old];

      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        total += (s.doc_topic(row, k) + s.alpha[k]) * (s.topic_word(k, w) + s.beta) / (s.topic_total[k] + v_beta);
        cumulative_[static_cast<std::size_t>(k)] = total;
      }
      const double u = rng_.uniform() * total;
      int next = K - 1;
      for (int k = 0; k < K; ++k) {
        if (u < cumulative_[static_cast<std::size_t>(k)]) {
          next = k;
          break;
        }
      }

      z[i] = next;
      ++s.doc_topic(row, next);
      ++s.topic_word(next, w);
      ++s.topic_total[next];
    }
  }
  ++s.sweeps;
}

TopicModelState GibbsSampler::state() const {
  TopicModelState out = state_;
  out.refresh();
  return out;
}

TopicModelState train_lda(const Corpus& corpus, LdaOptions options) {
  GibbsSampler sampler(corpus, options);
  for (int i = 0; i < options.sweeps; ++i) sampler.sweep();
  return sampler.state();
}

std::vector<std::string> top_words(const TopicModelState& state, int topic, std::size_t n) {
  if (topic < 0 || topic >= state.num_topics) {
    throw RangeError("topic " + std::to_string(topic) + " out of range [0, " + std::to_string(state.num_topics) + ")");
  }
  std::vector<int> order(state.vocabulary.size());
  std::iota(order.begin(), order.end(), 0);
  const auto row = state.phi.row(topic);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return row[a] > row[b]; });
  order.resize(std::min(n, order.size()));
  std::vector<std::string> out;
  for (int w : order) out.push_back(state.vocabulary[static_cast<std::size_t>(w)]);
  return out;
}

DominantTopic dominant_topic(const TopicModelState& state, std::string_view doc_id) {
  return dominant_topic(state.theta.row(static_cast<Eigen::Index>(state.doc_index(doc_id))));
}

std::optional<std::string> find_inconsistency(const TopicModelState& s, const Corpus& corpus) {
  const int K = s.num_topics;
  if (s.assignments.size() != corpus.size()) return "assignment table size differs from corpus";
  IntRowMatrix doc_topic = IntRowMatrix::Zero(s.doc_topic.rows(), K);
  Eigen::MatrixXi topic_word = Eigen::MatrixXi::Zero(K, s.topic_word.cols());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& words = corpus.term_ids(d);
    if (s.assignments[d].size() != words.size()) return "document " + std::to_string(d) + " token count changed";
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int k = s.assignments[d][i];
      if (k < 0 || k >= K) return "assignment out of topic range";
      ++doc_topic(static_cast<Eigen::Index>(d), k);
      ++topic_word(k, words[i]);
    }
  }
  if (doc_topic != s.doc_topic) return "document-topic counts disagree with assignments";
  if (topic_word != s.topic_word) return "topic-word counts disagree with assignments";
  if (topic_word.rowwise().sum() != s.topic_total) return "topic totals disagree with assignments";
  if (static_cast<std::size_t>(s.topic_total.sum()) != corpus.token_count()) return "token count not conserved";

  TopicModelState fresh = s;
  fresh.refresh();
  if (s.theta.rows() != fresh.theta.rows() || s.phi.rows() != fresh.phi.rows()) return "theta/phi shape mismatch";
  if ((s.theta - fresh.theta).cwiseAbs().maxCoeff() > 1e-9) return "theta differs from counts";
  if ((s.phi - fresh.phi).cwiseAbs().maxCoeff() > 1e-9) return "phi differs from counts";
  for (Eigen::Index d = 0; d < s.theta.rows(); ++d) {
    if (std::abs(s.theta.row(d).sum() - 1.0) > 1e-9) return "theta row " + std::to_string(d) + " not normalized";
  }
  for (Eigen::Index k = 0; k < s.phi.rows(); ++k) {
    if (std::abs(s.phi.row(k).sum() - 1.0) > 1e-9) return "phi row " + std::to_string(k) + " not normalized";
  }
  if ((s.theta.array() < 0).any() || (s.phi.array() < 0).any()) return "negative probability";
  return std::nullopt;
}

void check_compatible(const TopicModelState& state, const Corpus& corpus) {
  if (state.vocab_hash != vocabulary_hash(corpus.vocabulary())) {
    throw ValidationError("model vocabulary does not match corpus vocabulary");
  }
  if (state.doc_ids.size() != corpus.size()) throw ValidationError("model document count does not match corpus");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (state.doc_ids[i] != corpus.document(i).id) {
      throw ValidationError("model document order differs from corpus at \"" + corpus.document(i).id + "\"");
    }
  }
}

namespace {

template <typename M>
json matrix_rows(const M& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json model_to_json(const TopicModelState& s) {
  json j;
  j["format"] = "bass-lda-v1";
  j["K"] = s.num_topics;
  j["seed"] = s.seed;
  j["sweeps"] = s.sweeps;
  j["beta"] = s.beta;
  j["alpha"] = std::vector<double>(s.alpha.data(), s.alpha.data() + s.alpha.size());
  j["vocab_hash"] = s.vocab_hash;
  j["vocabulary"] = s.vocabulary;
  j["doc_ids"] = s.doc_ids;
  j["assignments"] = s.assignments;
  json topic_word = json::array();
  for (Eigen::Index w = 0; w < s.topic_word.cols(); ++w) {
    for (int k = 0; k < s.num_topics; ++k) {
      if (s.topic_word(k, w) != 0) topic_word.push_back({k, w, s.topic_word(k, w)});
    }
  }
  j["topic_word"] = std::move(topic_word);
  j["theta"] = matrix_rows(s.theta);
  j["phi"] = matrix_rows(s.phi);
  return j;
}

TopicModelState model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "bass-lda-v1") throw ValidationError("unsupported model format");
    TopicModelState s;
    s.num_topics = j.at("K").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.sweeps = j.at("sweeps").get<int>();
    s.beta = j.at("beta").get<double>();
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    s.alpha = Eigen::Map<const VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    s.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    s.vocab_hash = j.at("vocab_hash").get<std::string>();
    s.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    s.assignments = j.at("assignments").get<std::vector<std::vector<int>>>();
    if (s.vocab_hash != vocabulary_hash(s.vocabulary)) throw ValidationError("model vocab_hash does not match vocabulary");
    if (static_cast<int>(s.alpha.size()) != s.num_topics) throw ValidationError("alpha length differs from K");
    if (s.assignments.size() != s.doc_ids.size()) throw ValidationError("assignments length differs from doc_ids");

    const auto D = static_cast<Eigen::Index>(s.doc_ids.size());
    const auto V = static_cast<Eigen::Index>(s.vocabulary.size());
    s.doc_topic = IntRowMatrix::Zero(D, s.num_topics);
    s.topic_word = Eigen::MatrixXi::Zero(s.num_topics, V);
    s.topic_total = Eigen::VectorXi::Zero(s.num_topics);
    for (const auto& triple : j.at("topic_word")) {
      const int k = triple.at(0).get<int>();
      const auto w = triple.at(1).get<Eigen::Index>();
      if (k < 0 || k >= s.num_topics || w < 0 || w >= V) throw ValidationError("topic_word entry out of range");
      s.topic_word(k, w) = triple.at(2).get<int>();
    }
    const auto theta = j.at("theta").get<std::vector<std::vector<double>>>();
    const auto phi = j.at("phi").get<std::vector<std::vector<double>>>();
    if (static_cast<Eigen::Index>(theta.size()) != D || static_cast<int>(phi.size()) != s.num_topics) {
      throw ValidationError("theta/phi shape mismatch");
    }
    for (Eigen::Index d = 0; d < D; ++d) {
      for (int k : s.assignments[static_cast<std::size_t>(d)]) {
        if (k < 0 || k >= s.num_topics) throw ValidationError("assignment out of topic range");
        ++s.doc_topic(d, k);
      }
      if (static_cast<int>(theta[static_cast<std::size_t>(d)].size()) != s.num_topics) {
        throw ValidationError("theta row length differs from K");
      }
    }
    s.topic_total = s.topic_word.rowwise().sum();
    if (s.topic_total.sum() != s.doc_topic.sum()) throw ValidationError("topic_word counts disagree with assignments");
    for (const auto& row : phi) {
      if (static_cast<Eigen::Index>(row.size()) != V) throw ValidationError("phi row length differs from vocabulary");
    }
    s.refresh();
    // Stored values are authoritative; refresh() only rebuilt the lookup.
    for (Eigen::Index d = 0; d < D; ++d) {
      for (int k = 0; k < s.num_topics; ++k) s.theta(d, k) = theta[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < s.num_topics; ++k) {
      for (Eigen::Index w = 0; w < V; ++w) s.phi(k, w) = phi[static_cast<std::size_t>(k)][static_cast<std::size_t>(w)];
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TopicModelState& state, const std::filesystem::path& path) {
  io::write_file(path, model_to_json(state).dump() + "\n");
}

TopicModelState load_model(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  json j;
  try {
    j = json::parse(content);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model file ") + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace bass
