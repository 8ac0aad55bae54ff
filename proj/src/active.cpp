#include "bass/active.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bass/text.hpp"

namespace bass {

using nlohmann::json;

std::string_view to_string(LabelSource source) {
  switch (source) {
    case LabelSource::approved:
      return "approved";
    case LabelSource::revised:
      return "revised";
    case LabelSource::manual:
      return "manual";
  }
  return "manual";
}

LabelSource parse_label_source(std::string_view s) {
  if (s == "approve" || s == "approved") return LabelSource::approved;
  if (s == "revise" || s == "revised") return LabelSource::revised;
  if (s == "manual") return LabelSource::manual;
  throw ValidationError("unknown label action \"" + std::string(s) + "\"");
}

void LabelStore::assign(LabeledExample example) {
  auto it = index_.find(example.doc_id);
  if (it != index_.end()) {
    examples_[it->second] = std::move(example);
    return;
  }
  index_.emplace(example.doc_id, examples_.size());
  examples_.push_back(std::move(example));
}

const LabeledExample* LabelStore::find(std::string_view doc_id) const {
  auto it = index_.find(std::string(doc_id));
  return it == index_.end() ? nullptr : &examples_[it->second];
}

std::map<std::string, int> LabelStore::counts() const {
  std::map<std::string, int> out;
  for (const auto& e : examples_) ++out[e.label];
  return out;
}

std::string LabelStore::to_jsonl() const {
  std::string out;
  for (const auto& e : examples_) {
    out += json{{"doc_id", e.doc_id}, {"label", e.label}, {"source", to_string(e.source)}}.dump();
    out.push_back('\n');
  }
  return out;
}

LabelStore LabelStore::from_jsonl(std::string_view content) {
  LabelStore store;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    const auto line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      store.assign({j.at("doc_id").get<std::string>(), j.at("label").get<std::string>(),
                    parse_label_source(j.at("source").get<std::string>())});
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed label record: ") + e.what(), line_no, std::string(line));
    }
  }
  return store;
}

FeatureSpec make_feature_spec(const TfidfIndex& index, int topic_dims, FeatureOptions options) {
  if (options.tfidf_dims < 0) throw ValidationError("tf-idf feature width must be non-negative");
  FeatureSpec spec;
  spec.topic_dims = topic_dims;
  std::vector<int> terms(index.num_terms());
  std::iota(terms.begin(), terms.end(), 0);
  std::stable_sort(terms.begin(), terms.end(), [&](int a, int b) { return index.doc_freq[a] > index.doc_freq[b]; });
  terms.resize(std::min<std::size_t>(terms.size(), static_cast<std::size_t>(options.tfidf_dims)));
  std::sort(terms.begin(), terms.end());
  spec.tfidf_terms = std::move(terms);
  return spec;
}

namespace {

void append_feature_row(std::vector<Eigen::Triplet<double>>& out, int row, const FeatureSpec& spec,
                        const TfidfIndex& index, const TopicModelState& lda, std::size_t doc) {
  const auto theta = lda.theta.row(static_cast<Eigen::Index>(doc));
  const double theta_norm = theta.norm();
  if (theta_norm > 0.0) {
    for (int k = 0; k < spec.topic_dims; ++k) {
      if (theta[k] != 0.0) out.emplace_back(row, k, theta[k] / theta_norm);
    }
  }
  std::vector<std::pair<int, double>> block;
  double sq = 0.0;
  for (int m = 0; m < spec.tfidf_dims(); ++m) {
    const double w = index.weight(doc, spec.tfidf_terms[static_cast<std::size_t>(m)]);
    if (w != 0.0) {
      block.emplace_back(m, w);
      sq += w * w;
    }
  }
  const double block_norm = std::sqrt(sq);
  for (const auto& [m, w] : block) out.emplace_back(row, spec.topic_dims + m, w / block_norm);
}

void check_alignment(const Corpus& corpus, const TfidfIndex& index, const TopicModelState& lda) {
  check_compatible(lda, corpus);
  if (index.num_documents() != corpus.size() || index.num_terms() != corpus.vocabulary().size()) {
    throw ValidationError("tf-idf index does not match corpus");
  }
}

}  // namespace

FeatureTable FeatureTable::build(const Corpus& corpus, const TfidfIndex& index, const TopicModelState& lda,
                                 FeatureOptions options) {
  check_alignment(corpus, index, lda);
  FeatureTable table;
  table.spec_ = make_feature_spec(index, lda.num_topics, options);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    append_feature_row(triplets, static_cast<int>(d), table.spec_, index, lda, d);
    table.doc_ids_.push_back(corpus.document(d).id);
    table.lookup_.emplace(corpus.document(d).id, d);
  }
  table.rows_.resize(static_cast<Eigen::Index>(corpus.size()), table.spec_.dims());
  table.rows_.setFromTriplets(triplets.begin(), triplets.end());
  table.rows_.makeCompressed();
  return table;
}

std::size_t FeatureTable::index_of(std::string_view doc_id) const {
  auto it = lookup_.find(std::string(doc_id));
  if (it == lookup_.end()) throw LookupError("unknown document id \"" + std::string(doc_id) + "\"");
  return it->second;
}

bool FeatureTable::contains(std::string_view doc_id) const { return lookup_.count(std::string(doc_id)) > 0; }

VectorXd featurize(const Corpus& corpus, const TfidfIndex& index, const TopicModelState& lda, std::string_view doc_id,
                   FeatureOptions options) {
  check_alignment(corpus, index, lda);
  const std::size_t doc = corpus.index_of(doc_id);
  const FeatureSpec spec = make_feature_spec(index, lda.num_topics, options);
  std::vector<Eigen::Triplet<double>> triplets;
  append_feature_row(triplets, 0, spec, index, lda, doc);
  VectorXd out = VectorXd::Zero(spec.dims());
  for (const auto& t : triplets) out[t.col()] = t.value();
  return out;
}

std::optional<std::size_t> ClassifierState::class_index(std::string_view label) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - classes.begin());
}

VectorXd predict_proba(const ClassifierState& state, const FeatureTable& features, std::size_t doc) {
  const auto L = static_cast<Eigen::Index>(state.classes.size());
  VectorXd p(L);
  if (L == 0) return p;
  const auto& rows = features.rows();
  for (Eigen::Index c = 0; c < L; ++c) {
    double z = 0.0;
    for (SparseRowMatrix::InnerIterator it(rows, static_cast<Eigen::Index>(doc)); it; ++it) {
      z += state.weights(c, it.col()) * it.value();
    }
    p[c] = z;
  }
  const double top = p.maxCoeff();
  double total = 0.0;
  for (Eigen::Index c = 0; c < L; ++c) {
    p[c] = std::exp(p[c] - top);
    total += p[c];
  }
  for (Eigen::Index c = 0; c < L; ++c) p[c] /= total;
  return p;
}

void sgd_step(ClassifierState& state, const FeatureTable& features, std::size_t doc, std::size_t class_index) {
  const VectorXd p = predict_proba(state, features, doc);
  const double lr = state.options.learning_rate;
  state.weights *= (1.0 - lr * state.options.l2);
  const auto& rows = features.rows();
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    const double g = p[c] - (static_cast<std::size_t>(c) == class_index ? 1.0 : 0.0);
    const double step = lr * g;
    for (SparseRowMatrix::InnerIterator it(rows, static_cast<Eigen::Index>(doc)); it; ++it) {
      state.weights(c, it.col()) -= step * it.value();
    }
  }
}

namespace {

std::vector<std::string> sorted_classes(const std::vector<LabeledExample>& examples) {
  std::vector<std::string> classes;
  for (const auto& e : examples) classes.push_back(e.label);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

}  // namespace

ClassifierState fit_batch(const std::vector<LabeledExample>& examples, const FeatureTable& features,
                          LearnerOptions options) {
  ClassifierState state;
  state.classes = sorted_classes(examples);
  state.spec = features.spec();
  state.options = options;
  state.weights = RowMatrixXd::Zero(static_cast<Eigen::Index>(state.classes.size()), state.spec.dims());

  std::vector<std::pair<std::size_t, std::size_t>> rows;  // (doc, class)
  for (const auto& e : examples) rows.emplace_back(features.index_of(e.doc_id), *state.class_index(e.label));
  Rng rng(options.seed);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i : rng.permutation(rows.size())) sgd_step(state, features, rows[i].first, rows[i].second);
  }
  return state;
}

std::vector<SelectionScore> selection_scores(const RowMatrixXd& theta, const RowMatrixXd* posteriors,
                                             const std::vector<bool>& labeled, const std::vector<std::string>& doc_ids) {
  const auto D = static_cast<std::size_t>(theta.rows());
  if (labeled.size() != D || doc_ids.size() != D) throw ValidationError("selection: inconsistent document counts");
  if (posteriors && static_cast<std::size_t>(posteriors->rows()) != D) {
    throw ValidationError("selection: posterior rows differ from theta rows");
  }
  std::vector<SelectionScore> out;
  for (std::size_t d = 0; d < D; ++d) {
    if (labeled[d]) continue;
    const auto row = theta.row(static_cast<Eigen::Index>(d));
    const auto dom = dominant_topic(row);
    SelectionScore s;
    s.doc_id = doc_ids[d];
    s.topic = dom.topic;
    s.theta_star = dom.probability;
    if (posteriors && posteriors->cols() > 0) {
      const auto post = posteriors->row(static_cast<Eigen::Index>(d));
      s.score = selection_score(post, s.theta_star);
      s.entropy = entropy(post);
    } else {
      s.entropy = 1.0;
      s.score = s.theta_star;
    }
    out.push_back(std::move(s));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::optional<std::size_t> select_next(const RowMatrixXd& theta, const RowMatrixXd* posteriors,
                                       const std::vector<bool>& labeled, const std::vector<std::string>& doc_ids) {
  const auto scores = selection_scores(theta, posteriors, labeled, doc_ids);
  if (scores.empty()) return std::nullopt;

  std::map<int, std::vector<std::size_t>> groups;  // topic -> positions in scores
  for (std::size_t i = 0; i < scores.size(); ++i) groups[scores[i].topic].push_back(i);

  int best_topic = -1;
  double best_median = 0.0;
  for (const auto& [topic, members] : groups) {
    std::vector<double> vals;
    for (auto i : members) vals.push_back(scores[i].score);
    const double m = median(std::move(vals));
    // Groups are visited in ascending topic order, so strict > keeps the smaller topic on ties.
    if (best_topic < 0 || m > best_median) {
      best_topic = topic;
      best_median = m;
    }
  }

  const SelectionScore* best = nullptr;
  for (auto i : groups[best_topic]) {
    const auto& s = scores[i];
    if (!best || s.score > best->score || (s.score == best->score && s.doc_id < best->doc_id)) best = &s;
  }
  const auto it = std::find(doc_ids.begin(), doc_ids.end(), best->doc_id);
  return static_cast<std::size_t>(it - doc_ids.begin());
}

ActiveLearner::ActiveLearner(std::shared_ptr<const FeatureTable> features, LearnerOptions options)
    : features_(std::move(features)), options_(options) {
  if (!features_) throw ValidationError("learner needs a feature table");
  if (options_.epochs < 1) throw ValidationError("epochs must be >= 1");
  state_.spec = features_->spec();
  state_.options = options_;
  state_.weights = RowMatrixXd::Zero(0, state_.spec.dims());
}

ActiveLearner::Update ActiveLearner::add_label(LabeledExample example) {
  example.label = text::trim(example.label);
  if (example.label.empty()) throw ValidationError("label must be non-empty");
  const std::size_t doc = features_->index_of(example.doc_id);

  const bool new_class = !state_.class_index(example.label).has_value();
  const std::string label = example.label;
  store_.assign(std::move(example));
  const std::uint64_t updates = state_.updates + 1;

  if (new_class) {
    state_ = fit_batch(store_.examples(), *features_, options_);
    state_.updates = updates;
    return Update::reinitialized;
  }

  const std::size_t cls = *state_.class_index(label);
  for (int e = 0; e < options_.epochs; ++e) sgd_step(state_, *features_, doc, cls);

  // One replay pass over every live example.
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (const auto& ex : store_.examples()) {
    // A class can outlive its last example after relabeling; it stays in the model.
    rows.emplace_back(features_->index_of(ex.doc_id), *state_.class_index(ex.label));
  }
  Rng rng(derive_seed(options_.seed, updates));
  for (std::size_t i : rng.permutation(rows.size())) sgd_step(state_, *features_, rows[i].first, rows[i].second);
  state_.updates = updates;
  return Update::incremental;
}

RowMatrixXd ActiveLearner::predict_proba_all() const {
  const auto D = static_cast<Eigen::Index>(features_->size());
  RowMatrixXd out(D, static_cast<Eigen::Index>(state_.classes.size()));
  if (out.cols() == 0) return out;
  for (Eigen::Index d = 0; d < D; ++d) out.row(d) = bass::predict_proba(state_, *features_, static_cast<std::size_t>(d)).transpose();
  return out;
}

VectorXd ActiveLearner::predict_proba(std::string_view doc_id) const {
  return bass::predict_proba(state_, *features_, features_->index_of(doc_id));
}

std::vector<bool> ActiveLearner::labeled_mask() const {
  std::vector<bool> mask(features_->size(), false);
  for (const auto& e : store_.examples()) mask[features_->index_of(e.doc_id)] = true;
  return mask;
}

std::string ActiveLearner::next_document(const TopicModelState& lda) const {
  if (lda.num_documents() != features_->size()) throw ValidationError("topic model does not match feature table");
  const auto mask = labeled_mask();
  std::optional<std::size_t> pick;
  if (state_.classes.empty()) {
    pick = select_next(lda.theta, nullptr, mask, features_->doc_ids());
  } else {
    const RowMatrixXd post = predict_proba_all();
    pick = select_next(lda.theta, &post, mask, features_->doc_ids());
  }
  if (!pick) throw ExhaustedError("every document is labeled");
  return features_->doc_ids()[*pick];
}

Partition ActiveLearner::propagate() const {
  if (state_.classes.empty()) throw EmptyModelError("no label classes yet");
  Partition out;
  for (std::size_t d = 0; d < features_->size(); ++d) {
    const auto& id = features_->doc_ids()[d];
    if (const auto* e = store_.find(id)) {
      out.emplace(id, e->label);
      continue;
    }
    const VectorXd p = bass::predict_proba(state_, *features_, d);
    out.emplace(id, state_.classes[static_cast<std::size_t>(argmax_first(p))]);
  }
  return out;
}

json ActiveLearner::snapshot() const {
  json weights = json::array();
  for (Eigen::Index r = 0; r < state_.weights.rows(); ++r) {
    weights.push_back(std::vector<double>(state_.weights.row(r).data(), state_.weights.row(r).data() + state_.weights.cols()));
  }
  json labels = json::array();
  for (const auto& e : store_.examples()) {
    labels.push_back({{"doc_id", e.doc_id}, {"label", e.label}, {"source", to_string(e.source)}});
  }
  return {
      {"format", "bass-learner-v1"},
      {"classes", state_.classes},
      {"weights", std::move(weights)},
      {"updates", state_.updates},
      {"options",
       {{"epochs", options_.epochs},
        {"learning_rate", options_.learning_rate},
        {"l2", options_.l2},
        {"seed", options_.seed}}},
      {"feature_spec", {{"topic_dims", state_.spec.topic_dims}, {"tfidf_terms", state_.spec.tfidf_terms}}},
      {"labels", std::move(labels)},
  };
}

ActiveLearner ActiveLearner::restore(const json& j, std::shared_ptr<const FeatureTable> features) {
  try {
    if (j.at("format").get<std::string>() != "bass-learner-v1") throw ValidationError("unsupported learner snapshot");
    const auto& o = j.at("options");
    LearnerOptions options{o.at("epochs").get<int>(), o.at("learning_rate").get<double>(), o.at("l2").get<double>(),
                           o.at("seed").get<std::uint64_t>()};
    ActiveLearner learner(std::move(features), options);
    FeatureSpec spec{j.at("feature_spec").at("topic_dims").get<int>(),
                     j.at("feature_spec").at("tfidf_terms").get<std::vector<int>>()};
    if (!(spec == learner.features_->spec())) throw ValidationError("snapshot feature layout differs from feature table");

    for (const auto& l : j.at("labels")) {
      const auto id = l.at("doc_id").get<std::string>();
      if (!learner.features_->contains(id)) throw ValidationError("snapshot labels unknown document \"" + id + "\"");
      learner.store_.assign({id, l.at("label").get<std::string>(), parse_label_source(l.at("source").get<std::string>())});
    }
    auto& st = learner.state_;
    st.classes = j.at("classes").get<std::vector<std::string>>();
    if (!std::is_sorted(st.classes.begin(), st.classes.end())) throw ValidationError("snapshot classes not sorted");
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    if (rows.size() != st.classes.size()) throw ValidationError("snapshot weight rows differ from class count");
    st.weights.resize(static_cast<Eigen::Index>(rows.size()), spec.dims());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<int>(rows[r].size()) != spec.dims()) throw ValidationError("snapshot weight width mismatch");
      for (int c = 0; c < spec.dims(); ++c) st.weights(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
    st.updates = j.at("updates").get<std::uint64_t>();
    return learner;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed learner snapshot: ") + e.what());
  }
}

}  // namespace bass
