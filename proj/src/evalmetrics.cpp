#include "bass/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "bass/http.hpp"
#include <json.hpp>

#include "bass/corpus.hpp"
#include "bass/io.hpp"
#include "bass/text.hpp"

namespace bass {

using nlohmann::json;

Contingency contingency(const Partition& pred, const Partition& gold) {
  if (pred.size() != gold.size()) throw ValidationError("partitions cover different document sets");
  std::map<std::string, Eigen::Index> rows, cols;
  for (const auto& [doc, label] : pred) rows.emplace(label, 0);
  for (const auto& [doc, label] : gold) cols.emplace(label, 0);
  Eigen::Index i = 0;
  for (auto& [label, idx] : rows) idx = i++;
  i = 0;
  for (auto& [label, idx] : cols) idx = i++;

  Contingency c;
  c.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  auto g = gold.begin();
  for (auto p = pred.begin(); p != pred.end(); ++p, ++g) {
    if (p->first != g->first) throw ValidationError("partitions cover different document sets (\"" + p->first + "\")");
    c.counts(rows[p->second], cols[g->second]) += 1.0;
  }
  c.total = static_cast<double>(pred.size());
  return c;
}

double purity(const Partition& pred, const Partition& gold) {
  const auto c = contingency(pred, gold);
  if (c.total == 0) throw ValidationError("purity of an empty partition");
  return c.counts.rowwise().maxCoeff().sum() / c.total;
}

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

double entropy_of_counts(const VectorXd& counts, double total) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) {
      const double p = counts[i] / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

void require_two(const Contingency& c) {
  if (c.total < 2) throw ValidationError("ARI/NMI need at least two documents");
}

}  // namespace

double ari(const Partition& pred, const Partition& gold) {
  const auto c = contingency(pred, gold);
  require_two(c);
  const double index = c.counts.unaryExpr(&choose2).sum();
  const double rows = c.counts.rowwise().sum().unaryExpr(&choose2).sum();
  const double cols = c.counts.colwise().sum().unaryExpr(&choose2).sum();
  const double expected = rows * cols / choose2(c.total);
  const double max_index = 0.5 * (rows + cols);
  // Zero only when both partitions are all-singletons or both a single block.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double nmi(const Partition& pred, const Partition& gold) {
  const auto c = contingency(pred, gold);
  require_two(c);
  const VectorXd row_sums = c.counts.rowwise().sum();
  const VectorXd col_sums = c.counts.colwise().sum().transpose();
  double mi = 0.0;
  for (Eigen::Index r = 0; r < c.counts.rows(); ++r) {
    for (Eigen::Index k = 0; k < c.counts.cols(); ++k) {
      const double n = c.counts(r, k);
      if (n > 0) mi += n / c.total * std::log(n * c.total / (row_sums[r] * col_sums[k]));
    }
  }
  const double mean_h = 0.5 * (entropy_of_counts(row_sums, c.total) + entropy_of_counts(col_sums, c.total));
  if (mean_h == 0.0) return 0.0;
  return std::clamp(mi / mean_h, 0.0, 1.0);
}

ClusterScores cluster_scores(const Partition& pred, const Partition& gold) {
  return {purity(pred, gold), ari(pred, gold), nmi(pred, gold)};
}

VectorXd MockEmbeddingProvider::embed(std::string_view input) {
  VectorXd v = VectorXd::Zero(dimension_);
  auto tokens = tokenize(input);
  if (tokens.empty()) tokens.push_back(text::lowercase(text::trim(input)));
  for (const auto& t : tokens) {
    const std::uint64_t h = fnv1a(t);
    const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dimension_));
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
  const double n = v.norm();
  if (n == 0.0) {
    // Signed collisions cancelled out; fall back to the first token's bucket.
    v[static_cast<Eigen::Index>(fnv1a(tokens.front()) % static_cast<std::uint64_t>(dimension_))] = 1.0;
    return v;
  }
  return v / n;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ValidationError("embedding endpoint URL is required");
}

namespace {

struct SplitUrl {
  std::string origin;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ValidationError("endpoint must be an absolute URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

VectorXd HttpEmbeddingProvider::embed(std::string_view input) {
  const auto [origin, path] = split_url(config_.endpoint);
  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const json body = {{"model", config_.model}, {"input", std::string(input)}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw BackendError("embedding request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError("embedding endpoint returned HTTP " + std::to_string(res->status));
  try {
    const auto j = json::parse(res->body);
    const auto values = j.at("data").at(0).at("embedding").get<std::vector<double>>();
    VectorXd v = Eigen::Map<const VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    const double n = v.norm();
    if (n == 0.0) throw BackendError("embedding endpoint returned a zero vector");
    dimension_ = static_cast<int>(v.size());
    return v / n;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed embedding response: ") + e.what());
  }
}

double answer_quality(std::string_view answer, std::string_view gold_answer, EmbeddingProvider& provider) {
  const VectorXd a = provider.embed(answer);
  const VectorXd g = provider.embed(gold_answer);
  if (a.size() != g.size()) throw BackendError("embedding dimensions differ");
  return cosine(a, g);
}

double krippendorff_alpha(const std::vector<Rating>& ratings) {
  std::map<std::string, std::map<std::string, std::string>> units;  // item -> annotator -> label
  std::set<std::string> categories;
  for (const auto& r : ratings) {
    if (r.label.empty()) continue;  // missing cell
    auto [it, inserted] = units[r.item].emplace(r.annotator, r.label);
    if (!inserted && it->second != r.label) {
      throw ValidationError("annotator \"" + r.annotator + "\" rated item \"" + r.item + "\" twice");
    }
    categories.insert(r.label);
  }
  std::map<std::string, Eigen::Index> cat_index;
  for (const auto& c : categories) cat_index.emplace(c, static_cast<Eigen::Index>(cat_index.size()));

  const auto C = static_cast<Eigen::Index>(cat_index.size());
  Eigen::MatrixXd coincidence = Eigen::MatrixXd::Zero(C, C);
  for (const auto& [item, by_annotator] : units) {
    const double m = static_cast<double>(by_annotator.size());
    if (m < 2) continue;
    VectorXd n_u = VectorXd::Zero(C);
    for (const auto& [annotator, label] : by_annotator) n_u[cat_index[label]] += 1.0;
    // Ordered pairs of distinct raters within the unit, weighted 1/(m-1).
    for (Eigen::Index c = 0; c < C; ++c) {
      for (Eigen::Index k = 0; k < C; ++k) {
        const double pairs = c == k ? n_u[c] * (n_u[c] - 1.0) : n_u[c] * n_u[k];
        coincidence(c, k) += pairs / (m - 1.0);
      }
    }
  }
  const VectorXd n_c = coincidence.rowwise().sum();
  const double n = n_c.sum();
  if (n == 0) throw UndefinedAlphaError("Krippendorff's alpha undefined: no item has two or more ratings");

  const double observed = coincidence.sum() - coincidence.trace();
  const double expected = (n_c.sum() * n_c.sum() - n_c.squaredNorm()) / (n - 1.0);
  if (expected == 0) throw UndefinedAlphaError("Krippendorff's alpha undefined: only one category was used");
  return 1.0 - observed / expected;
}

std::vector<Rating> parse_ratings_csv(std::string_view content) {
  std::vector<Rating> out;
  for (auto& row : io::parse_csv_columns(content, {"item", "annotator", "label"})) {
    out.push_back({text::trim(row[0]), text::trim(row[1]), text::trim(row[2])});
  }
  return out;
}

std::string metrics_csv(const std::vector<std::pair<std::string, double>>& metrics) {
  std::string out = "metric,value\n";
  for (const auto& [name, value] : metrics) out += io::csv_escape(name) + "," + io::format_double(value) + "\n";
  return out;
}

Partition parse_partition_jsonl(std::string_view content) {
  Partition out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    const auto line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no, std::string(line));
    }
    const char* key = j.contains("doc_id") ? "doc_id" : "id";
    if (!j.contains(key) || !j[key].is_string()) throw ParseError("missing string field \"id\"/\"doc_id\"", line_no);
    if (!j.contains("label") || !j["label"].is_string()) throw ParseError("missing string field \"label\"", line_no);
    if (!out.emplace(j[key].get<std::string>(), j["label"].get<std::string>()).second) {
      throw DuplicateIdError(j[key].get<std::string>());
    }
  }
  return out;
}

Partition load_partition(const std::filesystem::path& path) { return parse_partition_jsonl(io::read_file(path)); }

}  // namespace bass
