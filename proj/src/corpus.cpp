#include "bass/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "bass/common.hpp"
#include "bass/embedded_data.hpp"
#include "bass/error.hpp"
#include "bass/io.hpp"
#include "bass/text.hpp"

namespace bass {

using nlohmann::json;

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = [] {
    std::unordered_set<std::string> s;
    std::string_view data = embedded::stopwords_en_v1;
    std::size_t i = 0;
    while (i < data.size()) {
      auto nl = data.find('\n', i);
      if (nl == std::string_view::npos) nl = data.size();
      std::string line = text::trim(data.substr(i, nl - i));
      if (!line.empty() && line[0] != '#') s.insert(std::move(line));
      i = nl + 1;
    }
    return s;
  }();
  return words;
}

bool is_stopword(std::string_view lowercase_word) {
  return stopwords().count(std::string(lowercase_word)) > 0;
}

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> tokens;
  const std::u32string u = text::decode_utf8(input);
  std::u32string run;
  auto flush = [&] {
    if (run.size() >= 3) {
      std::string tok = text::encode_utf8(run);
      if (!is_stopword(tok)) tokens.push_back(std::move(tok));
    }
    run.clear();
  };
  for (char32_t c : u) {
    if (text::is_alpha(c)) {
      run.push_back(text::to_lower(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Document make_document(std::string id, std::string body, std::optional<std::string> label) {
  Document d;
  d.id = std::move(id);
  d.tokens = tokenize(body);
  d.text = std::move(body);
  d.gold_label = std::move(label);
  return d;
}

Corpus::Corpus(std::vector<Document> documents, CorpusOptions options)
    : documents_(std::move(documents)), options_(options) {
  if (documents_.empty()) throw ValidationError("corpus must contain at least one document");
  std::map<std::string, int> doc_freq;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    const auto& d = documents_[i];
    if (d.id.empty()) throw ValidationError("document " + std::to_string(i) + " has an empty id");
    if (!by_id_.emplace(d.id, i).second) throw DuplicateIdError(d.id);
    std::set<std::string> seen(d.tokens.begin(), d.tokens.end());
    for (const auto& t : seen) ++doc_freq[t];
    if (d.gold_label) labels.insert(*d.gold_label);
  }
  // std::map iterates in lexicographic order, which fixes the index order.
  for (const auto& [tok, df] : doc_freq) {
    if (df >= options_.min_doc_freq) {
      vocab_index_.emplace(tok, static_cast<int>(vocab_.size()));
      vocab_.push_back(tok);
    }
  }
  term_ids_.resize(documents_.size());
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    for (const auto& t : documents_[i].tokens) {
      auto it = vocab_index_.find(t);
      if (it != vocab_index_.end()) term_ids_[i].push_back(it->second);
    }
    token_count_ += term_ids_[i].size();
  }
  labels_.assign(labels.begin(), labels.end());
}

std::size_t Corpus::index_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) throw LookupError("unknown document id \"" + std::string(id) + "\"");
  return it->second;
}

bool Corpus::contains(std::string_view id) const { return by_id_.count(std::string(id)) > 0; }

std::optional<int> Corpus::term_id(std::string_view token) const {
  auto it = vocab_index_.find(std::string(token));
  if (it == vocab_index_.end()) return std::nullopt;
  return it->second;
}

bool Corpus::fully_labeled() const {
  return std::all_of(documents_.begin(), documents_.end(), [](const Document& d) { return d.gold_label.has_value(); });
}

Corpus parse_corpus_jsonl(std::string_view content, CorpusOptions options) {
  std::vector<Document> docs;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    const std::string_view line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no, std::string(line));
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
    if (!obj.contains("id") || !obj["id"].is_string()) throw ParseError("missing string field \"id\"", line_no);
    if (!obj.contains("text") || !obj["text"].is_string()) throw ParseError("missing string field \"text\"", line_no);
    std::optional<std::string> label;
    if (obj.contains("label") && !obj["label"].is_null()) {
      if (!obj["label"].is_string()) throw ParseError("field \"label\" must be a string", line_no);
      label = obj["label"].get<std::string>();
    }
    std::string id = obj["id"].get<std::string>();
    if (!ids.insert(id).second) throw DuplicateIdError(id);
    docs.push_back(make_document(std::move(id), obj["text"].get<std::string>(), std::move(label)));
  }
  return Corpus(std::move(docs), options);
}

Corpus load_corpus(const std::filesystem::path& path, CorpusOptions options) {
  return parse_corpus_jsonl(io::read_file(path), options);
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus.documents()) {
    json obj = {{"id", d.id}, {"text", d.text}};
    if (d.gold_label) obj["label"] = *d.gold_label;
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  io::write_file(path, corpus_to_jsonl(corpus));
}

std::string vocabulary_hash(const std::vector<std::string>& vocab) {
  std::uint64_t h = fnv1a("bass-vocab-v1");
  for (const auto& w : vocab) {
    h = fnv1a(w, h);
    h = fnv1a("\n", h);
  }
  return to_hex(h);
}

}  // namespace bass
