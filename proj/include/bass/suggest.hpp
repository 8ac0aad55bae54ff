#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bass/corpus.hpp"

namespace bass {

inline constexpr std::string_view kSuggestTemplateVersion = "bass-suggest-v1";
inline constexpr std::size_t kMaxHistory = 3;
inline constexpr std::size_t kMaxCandidates = 3;
inline constexpr std::size_t kMaxConceptWords = 5;

struct LlmRequest {
  std::string system;  // may be empty
  std::string user;
  // Opaque routing key (document id for suggestions). Mock backends hash it.
  std::string key;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  // Throws TimeoutError or BackendError; never returns a fabricated answer.
  virtual std::string complete(const LlmRequest& request) = 0;
  std::string complete_prompt(const std::string& prompt) { return complete(LlmRequest{{}, prompt, {}}); }
  virtual std::string identifier() const = 0;
  virtual std::chrono::milliseconds timeout() const { return std::chrono::seconds(60); }
};

// Canned labels chosen by a hash of (key, template version); a pure function
// of the request.
class MockSuggestionBackend final : public LlmBackend {
 public:
  explicit MockSuggestionBackend(std::string template_version = std::string(kSuggestTemplateVersion))
      : version_(std::move(template_version)) {}
  std::string complete(const LlmRequest& request) override;
  std::string identifier() const override { return "mock-suggest"; }

 private:
  std::string version_;
};

// Delegates to a callable; for tests and harnesses.
class CallbackBackend final : public LlmBackend {
 public:
  using Fn = std::function<std::string(const LlmRequest&)>;
  CallbackBackend(std::string identifier, Fn fn) : id_(std::move(identifier)), fn_(std::move(fn)) {}
  std::string complete(const LlmRequest& request) override { return fn_(request); }
  std::string identifier() const override { return id_; }

 private:
  std::string id_;
  Fn fn_;
};

struct ChatBackendConfig {
  std::string endpoint;  // full URL of an OpenAI-compatible /v1/chat/completions
  std::string model;
  std::string api_key_env = "BASS_LLM_API_KEY";
  std::chrono::milliseconds timeout{60000};
  double temperature = 0.0;
};

class ChatCompletionBackend final : public LlmBackend {
 public:
  explicit ChatCompletionBackend(ChatBackendConfig config);
  std::string complete(const LlmRequest& request) override;
  std::string identifier() const override { return "chat:" + config_.model; }
  std::chrono::milliseconds timeout() const override { return config_.timeout; }

 private:
  ChatBackendConfig config_;
};

// Appends one JSONL record per call (request, response or error) to a file.
class AuditedBackend final : public LlmBackend {
 public:
  AuditedBackend(std::shared_ptr<LlmBackend> inner, std::filesystem::path log_path)
      : inner_(std::move(inner)), log_path_(std::move(log_path)) {}
  std::string complete(const LlmRequest& request) override;
  std::string identifier() const override { return inner_->identifier(); }
  std::chrono::milliseconds timeout() const override { return inner_->timeout(); }

 private:
  std::shared_ptr<LlmBackend> inner_;
  std::filesystem::path log_path_;
  std::mutex mutex_;
};

// {"type": "mock"} or {"type": "chat", "endpoint", "model", "api_key_env",
// "timeout_ms", "temperature"}, plus optional "audit_log". `fallback_mock`
// is used for type "mock".
std::shared_ptr<LlmBackend> make_backend(const nlohmann::json& config,
                                         std::shared_ptr<LlmBackend> fallback_mock = nullptr);

// Corpus-specific wording of the suggestion prompt.
struct PromptProfile {
  std::string domain;
  std::string topic_kind;
  std::string concept_guidance;

  static PromptProfile bills();
  static PromptProfile teaching();
  static PromptProfile named(std::string_view name);  // "bills" or "teaching"
};

struct PromptExample {
  std::string text;
  std::string label;
};

std::string_view suggestion_template();

// Fills the shipped template. Throws ValidationError for more than three
// history examples.
std::string render_prompt(const Document& doc, const std::vector<std::string>& existing_labels,
                          const std::vector<PromptExample>& history,
                          const PromptProfile& profile = PromptProfile::bills());

struct ParsedResponse {
  std::string rationale;
  std::vector<std::string> candidates;
};

// Line-keyed RATIONALE / PRED CONCEPT extraction. Several PRED CONCEPT lines
// or ';'-separated concepts become candidates: trimmed, cut to five words,
// deduplicated case-insensitively, at most three. Throws ParseError (with the
// raw text) when no concept is present.
ParsedResponse parse_response(std::string_view raw);

struct Suggestion {
  std::string doc_id;
  std::string rationale;
  std::vector<std::string> candidates;
  std::string backend;

  nlohmann::json to_json() const;
};

Suggestion suggest(LlmBackend& backend, const Document& doc, const std::vector<std::string>& existing_labels,
                   const std::vector<PromptExample>& history, const PromptProfile& profile = PromptProfile::bills());

}  // namespace bass
