#include "bass/suggest.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cctype>
#include <optional>
#include <sstream>

#include "bass/http.hpp"

#include "bass/common.hpp"
#include "bass/embedded_data.hpp"
#include "bass/error.hpp"
#include "bass/io.hpp"
#include "bass/text.hpp"

namespace bass {

using nlohmann::json;

namespace {

constexpr std::string_view kCannedLabels[] = {
    "Health care access",      "Water quality",         "Veterans benefits",      "Tax credits",
    "Public land management",  "Energy efficiency",     "Immigration enforcement", "Education funding",
    "Criminal justice reform", "Agricultural subsidies", "Transportation safety",  "Financial regulation",
    "Housing assistance",      "National defense",      "Trade policy",           "Environmental protection",
    "Telecommunications",      "Labor standards",       "Election administration", "Foreign aid",
};

// Case-insensitive "KEY:" prefix match; returns the remainder of the line.
std::optional<std::string> after_key(std::string_view line, std::string_view key) {
  if (line.size() < key.size()) return std::nullopt;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(line[i])) != key[i]) return std::nullopt;
  }
  return std::string(line.substr(key.size()));
}

std::string strip_decoration(std::string_view s) {
  std::string t = text::trim(s);
  while (!t.empty() && (t.front() == '*' || t.front() == '#' || t.front() == '-')) t.erase(t.begin());
  return text::trim(t);
}

std::string clean_candidate(std::string_view s) {
  constexpr std::string_view lead = " \t*_\"'";
  constexpr std::string_view trail = " \t*_\"'.";
  const auto b = s.find_first_not_of(lead);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(trail);
  if (e == std::string_view::npos || e < b) return {};
  const std::string t(s.substr(b, e - b + 1));
  auto words = text::split_whitespace(t);
  if (words.size() > kMaxConceptWords) words.resize(kMaxConceptWords);
  return text::join(words, " ");
}

}  // namespace

std::string MockSuggestionBackend::complete(const LlmRequest& request) {
  const std::string key = request.key.empty() ? request.user : request.key;
  const std::uint64_t h = fnv1a(version_, fnv1a(key));
  constexpr std::size_t n = std::size(kCannedLabels);
  const std::size_t first = h % n;
  const std::size_t second = (first + 1 + (h >> 17) % (n - 1)) % n;
  std::ostringstream out;
  out << "RATIONALE: Mock rationale for " << key << " [" << to_hex(h).substr(0, 8) << "]\n"
      << "PRED CONCEPT: " << kCannedLabels[first] << "; " << kCannedLabels[second] << "\n";
  return out.str();
}

ChatCompletionBackend::ChatCompletionBackend(ChatBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ValidationError("chat backend endpoint URL is required");
  if (config_.model.empty()) throw ValidationError("chat backend model name is required");
}

std::string ChatCompletionBackend::complete(const LlmRequest& request) {
  const auto scheme = config_.endpoint.find("://");
  if (scheme == std::string::npos) throw ValidationError("endpoint must be an absolute URL: " + config_.endpoint);
  const auto slash = config_.endpoint.find('/', scheme + 3);
  const std::string origin = slash == std::string::npos ? config_.endpoint : config_.endpoint.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);

  httplib::Client client(origin);
  const auto ms = config_.timeout.count();
  client.set_connection_timeout(static_cast<time_t>(ms / 1000), static_cast<time_t>((ms % 1000) * 1000));
  client.set_read_timeout(static_cast<time_t>(ms / 1000), static_cast<time_t>((ms % 1000) * 1000));
  client.set_write_timeout(static_cast<time_t>(ms / 1000), static_cast<time_t>((ms % 1000) * 1000));

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  json messages = json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  const json body = {{"model", config_.model}, {"messages", messages}, {"temperature", config_.temperature}};

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    const auto elapsed = std::chrono::steady_clock::now() - start;
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= config_.timeout)) {
      throw TimeoutError("LLM request timed out after " + std::to_string(ms) + " ms");
    }
    throw BackendError("LLM request failed: " + httplib::to_string(err));
  }
  if (res->status != 200) throw BackendError("LLM endpoint returned HTTP " + std::to_string(res->status));
  try {
    return json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed LLM response: ") + e.what());
  }
}

std::string AuditedBackend::complete(const LlmRequest& request) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  json record = {{"ts_ms", std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
                 {"backend", inner_->identifier()},
                 {"key", request.key},
                 {"system", request.system},
                 {"user", request.user}};
  try {
    std::string response = inner_->complete(request);
    record["response"] = response;
    std::lock_guard lock(mutex_);
    io::append_line(log_path_, record.dump());
    return response;
  } catch (const Error& e) {
    record["error"] = e.what();
    record["timeout"] = dynamic_cast<const TimeoutError*>(&e) != nullptr;
    std::lock_guard lock(mutex_);
    io::append_line(log_path_, record.dump());
    throw;
  }
}

std::shared_ptr<LlmBackend> make_backend(const json& config, std::shared_ptr<LlmBackend> fallback_mock) {
  const std::string type = config.value("type", "mock");
  std::shared_ptr<LlmBackend> backend;
  if (type == "mock") {
    backend = fallback_mock ? std::move(fallback_mock) : std::make_shared<MockSuggestionBackend>();
  } else if (type == "chat") {
    ChatBackendConfig c;
    c.endpoint = config.value("endpoint", "");
    c.model = config.value("model", "");
    c.api_key_env = config.value("api_key_env", c.api_key_env);
    c.timeout = std::chrono::milliseconds(config.value("timeout_ms", 60000));
    c.temperature = config.value("temperature", 0.0);
    backend = std::make_shared<ChatCompletionBackend>(std::move(c));
  } else {
    throw ValidationError("unknown backend type \"" + type + "\"");
  }
  if (config.contains("audit_log")) {
    backend = std::make_shared<AuditedBackend>(std::move(backend), config["audit_log"].get<std::string>());
  }
  return backend;
}

PromptProfile PromptProfile::bills() {
  return {"the congressional Bills", "a policy topic", "a specific policy topic, not a general theme such as 'Politics'"};
}

PromptProfile PromptProfile::teaching() {
  return {"classroom teaching transcripts", "a teaching strategy",
          "the teacher's teaching strategy, not a general theme such as 'Education'"};
}

PromptProfile PromptProfile::named(std::string_view name) {
  if (name == "bills") return bills();
  if (name == "teaching") return teaching();
  throw ValidationError("unknown prompt profile \"" + std::string(name) + "\"");
}

std::string_view suggestion_template() { return embedded::bass_suggest_v1; }

std::string render_prompt(const Document& doc, const std::vector<std::string>& existing_labels,
                          const std::vector<PromptExample>& history, const PromptProfile& profile) {
  if (history.size() > kMaxHistory) throw ValidationError("at most three labeled examples fit in the prompt");
  std::string rendered_history;
  for (const auto& ex : history) {
    rendered_history += "\nDOCUMENT: " + ex.text + "\nPRED CONCEPT: " + ex.label + "\n";
  }
  return text::render_template(suggestion_template(), {
                                                          {"DOMAIN", profile.domain},
                                                          {"TOPIC_KIND", profile.topic_kind},
                                                          {"CONCEPT_GUIDANCE", profile.concept_guidance},
                                                          {"HISTORY", rendered_history},
                                                          {"DOCUMENT", doc.text},
                                                          {"HIGH_LEVEL_CONCEPTS", text::join(existing_labels, ", ")},
                                                      });
}

ParsedResponse parse_response(std::string_view raw) {
  ParsedResponse out;
  std::vector<std::string> concepts;
  bool in_rationale = false;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    const std::string line = strip_decoration(raw.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    if (auto rationale = after_key(line, "RATIONALE:")) {
      out.rationale = strip_decoration(*rationale);
      in_rationale = true;
    } else if (auto concept_line = after_key(line, "PRED CONCEPT:")) {
      in_rationale = false;
      std::string_view rest = *concept_line;
      std::size_t p = 0;
      while (p <= rest.size()) {
        auto semi = rest.find(';', p);
        if (semi == std::string_view::npos) semi = rest.size();
        concepts.push_back(clean_candidate(rest.substr(p, semi - p)));
        p = semi + 1;
      }
    } else if (in_rationale) {
      out.rationale += " " + line;
    }
  }
  std::vector<std::string> seen;
  for (auto& c : concepts) {
    if (c.empty()) continue;
    const std::string folded = text::lowercase(c);
    if (std::find(seen.begin(), seen.end(), folded) != seen.end()) continue;
    seen.push_back(folded);
    out.candidates.push_back(std::move(c));
    if (out.candidates.size() == kMaxCandidates) break;
  }
  if (out.candidates.empty()) throw ParseError("response has no PRED CONCEPT", 0, std::string(raw));
  return out;
}

json Suggestion::to_json() const {
  return {{"doc_id", doc_id}, {"rationale", rationale}, {"candidates", candidates}, {"backend", backend}};
}

Suggestion suggest(LlmBackend& backend, const Document& doc, const std::vector<std::string>& existing_labels,
                   const std::vector<PromptExample>& history, const PromptProfile& profile) {
  LlmRequest request;
  request.user = render_prompt(doc, existing_labels, history, profile);
  request.key = doc.id;
  const std::string raw = backend.complete(request);
  auto parsed = parse_response(raw);
  return {doc.id, std::move(parsed.rationale), std::move(parsed.candidates), backend.identifier()};
}

}  // namespace bass
