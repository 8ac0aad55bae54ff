#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bass/active.hpp"
#include "bass/corpus.hpp"
#include "bass/search.hpp"
#include "bass/suggest.hpp"
#include "bass/topicmodel.hpp"

namespace httplib {
class Server;
}

namespace bass {

struct ServiceConfig {
  std::filesystem::path corpus_dir;   // <corpus_id>.jsonl
  std::filesystem::path model_dir;    // <model_id>.json
  std::filesystem::path session_dir;  // <session_id>.json snapshots
  int budget = 200;
  PromptProfile profile = PromptProfile::bills();
  CorpusOptions corpus_options;
  FeatureOptions features;
  LearnerOptions learner;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Corpus, model and derived indexes shared by every session over them.
struct Workspace {
  std::string corpus_id;
  std::string model_id;
  Corpus corpus;
  TopicModelState lda;
  TfidfIndex index;
  std::shared_ptr<const FeatureTable> features;
};

// Transport-independent session API. Every method returns the HTTP status
// and JSON body the server sends; error bodies are {"error": {code, message}}.
class SessionManager {
 public:
  SessionManager(ServiceConfig config, std::shared_ptr<LlmBackend> backend);

  ApiResponse create_session(const nlohmann::json& body);
  ApiResponse list_sessions() const;
  ApiResponse get_session(const std::string& id) const;
  ApiResponse next(const std::string& id);
  ApiResponse suggestion(const std::string& id, const std::string& doc_id);
  ApiResponse document(const std::string& id, const std::string& doc_id) const;
  ApiResponse post_label(const std::string& id, const nlohmann::json& body);
  ApiResponse search(const std::string& id, const std::string& query, std::optional<std::string> k) const;
  ApiResponse assignments(const std::string& id) const;

  // Loads every snapshot in session_dir; returns how many were restored.
  std::size_t restore_sessions();
  const ServiceConfig& config() const { return config_; }

 private:
  struct Session {
    std::string id;
    std::string created_at;
    std::shared_ptr<const Workspace> workspace;
    ActiveLearner learner;
    std::map<std::string, Suggestion> suggestion_cache;
    mutable std::mutex mutex;

    Session(std::string sid, std::string created, std::shared_ptr<const Workspace> ws, ActiveLearner l)
        : id(std::move(sid)), created_at(std::move(created)), workspace(std::move(ws)), learner(std::move(l)) {}
  };

  std::shared_ptr<const Workspace> workspace(const std::string& corpus_id, const std::string& model_id);
  std::shared_ptr<Session> find(const std::string& id) const;
  void persist(const Session& s) const;
  nlohmann::json summary(const Session& s) const;
  nlohmann::json topics(const Session& s) const;
  // Suggestion or a suggestion_error object; the caller holds the session lock.
  nlohmann::json suggestion_payload(Session& s, std::size_t doc);

  ServiceConfig config_;
  std::shared_ptr<LlmBackend> backend_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex workspace_mutex_;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<const Workspace>> workspaces_;
};

// Binds the session API routes onto an httplib server.
void mount_routes(httplib::Server& server, SessionManager& manager);

// Blocking server; logs one JSON line per request to `request_log` (stderr
// when empty).
void serve(SessionManager& manager, const std::string& host, int port, const std::filesystem::path& request_log = {});

}  // namespace bass
