#include "bass/service.hpp"

#include <chrono>
#include <ctime>
#include <iostream>
#include <random>
#include <regex>

#include "bass/http.hpp"

#include "bass/common.hpp"
#include "bass/error.hpp"
#include "bass/io.hpp"
#include "bass/text.hpp"

namespace bass {

using nlohmann::json;

namespace {

ApiResponse error(int status, std::string_view code, std::string_view message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

bool valid_artifact_id(const std::string& id) {
  static const std::regex pattern("^[A-Za-z0-9_.-]{1,128}$");
  return std::regex_match(id, pattern) && id.find("..") == std::string::npos;
}

std::string now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string new_session_id() {
  std::random_device rd;
  const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return to_hex(v);
}

}  // namespace

SessionManager::SessionManager(ServiceConfig config, std::shared_ptr<LlmBackend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
  if (!backend_) backend_ = std::make_shared<MockSuggestionBackend>();
  if (!config_.session_dir.empty()) std::filesystem::create_directories(config_.session_dir);
}

std::shared_ptr<const Workspace> SessionManager::workspace(const std::string& corpus_id, const std::string& model_id) {
  std::lock_guard lock(workspace_mutex_);
  const auto key = std::make_pair(corpus_id, model_id);
  if (auto it = workspaces_.find(key); it != workspaces_.end()) return it->second;
  Corpus corpus = load_corpus(config_.corpus_dir / (corpus_id + ".jsonl"), config_.corpus_options);
  TopicModelState lda = load_model(config_.model_dir / (model_id + ".json"));
  check_compatible(lda, corpus);
  TfidfIndex index = build_index(corpus);
  auto features = std::make_shared<const FeatureTable>(FeatureTable::build(corpus, index, lda, config_.features));
  auto ws = std::make_shared<const Workspace>(
      Workspace{corpus_id, model_id, std::move(corpus), std::move(lda), std::move(index), std::move(features)});
  workspaces_.emplace(key, ws);
  return ws;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionManager::persist(const Session& s) const {
  if (config_.session_dir.empty()) return;
  const json snapshot = {{"session_id", s.id},
                         {"corpus_id", s.workspace->corpus_id},
                         {"model_id", s.workspace->model_id},
                         {"created_at", s.created_at},
                         {"learner", s.learner.snapshot()}};
  io::write_file(config_.session_dir / (s.id + ".json"), snapshot.dump());
}

json SessionManager::topics(const Session& s) const {
  json out = json::array();
  for (const auto& [label, count] : s.learner.labels().counts()) out.push_back({{"label", label}, {"count", count}});
  return out;
}

json SessionManager::summary(const Session& s) const {
  return {{"session_id", s.id},
          {"corpus_id", s.workspace->corpus_id},
          {"model_id", s.workspace->model_id},
          {"created_at", s.created_at},
          {"labeled", s.learner.labels().size()},
          {"documents", s.workspace->corpus.size()},
          {"budget", config_.budget},
          {"topics", topics(s)}};
}

ApiResponse SessionManager::create_session(const json& body) {
  if (!body.is_object() || !body.contains("corpus_id") || !body["corpus_id"].is_string() ||
      !body.contains("model_id") || !body["model_id"].is_string()) {
    return error(400, "bad_request", "body must be {\"corpus_id\": string, \"model_id\": string}");
  }
  const auto corpus_id = body["corpus_id"].get<std::string>();
  const auto model_id = body["model_id"].get<std::string>();
  if (!valid_artifact_id(corpus_id) || !std::filesystem::exists(config_.corpus_dir / (corpus_id + ".jsonl"))) {
    return error(404, "unknown_corpus", "no corpus named \"" + corpus_id + "\"");
  }
  if (!valid_artifact_id(model_id) || !std::filesystem::exists(config_.model_dir / (model_id + ".json"))) {
    return error(404, "unknown_model", "no model named \"" + model_id + "\"");
  }
  std::shared_ptr<const Workspace> ws;
  try {
    ws = workspace(corpus_id, model_id);
  } catch (const ValidationError& e) {
    return error(422, "incompatible_artifacts", e.what());
  }
  auto session = std::make_shared<Session>(new_session_id(), now_iso8601(), ws, ActiveLearner(ws->features, config_.learner));
  {
    std::unique_lock lock(sessions_mutex_);
    while (sessions_.count(session->id)) session->id = new_session_id();
    sessions_.emplace(session->id, session);
  }
  std::lock_guard lock(session->mutex);
  persist(*session);
  return {201, {{"session_id", session->id}}};
}

ApiResponse SessionManager::list_sessions() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::shared_lock lock(sessions_mutex_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  json out = json::array();
  for (const auto& s : all) {
    std::lock_guard lock(s->mutex);
    out.push_back(summary(*s));
  }
  return {200, {{"sessions", std::move(out)}}};
}

ApiResponse SessionManager::get_session(const std::string& id) const {
  auto s = find(id);
  if (!s) return error(404, "unknown_session", "no session \"" + id + "\"");
  std::lock_guard lock(s->mutex);
  return {200, summary(*s)};
}

json SessionManager::suggestion_payload(Session& s, std::size_t doc) {
  const auto& document = s.workspace->corpus.document(doc);
  const auto counts = s.learner.labels().counts();
  std::vector<std::string> labels;
  for (const auto& [label, n] : counts) labels.push_back(label);
  const std::string key = document.id + "\x1f" + to_hex(fnv1a(text::join(labels, "\x1f")));
  if (auto it = s.suggestion_cache.find(key); it != s.suggestion_cache.end()) {
    return {{"suggestion", it->second.to_json()}, {"suggestion_error", nullptr}};
  }
  // The three most recent labeled examples.
  std::vector<PromptExample> history;
  const auto& examples = s.learner.labels().examples();
  for (auto it = examples.rbegin(); it != examples.rend() && history.size() < kMaxHistory; ++it) {
    if (it->doc_id == document.id) continue;
    history.push_back({s.workspace->corpus.document(s.workspace->corpus.index_of(it->doc_id)).text, it->label});
  }
  std::reverse(history.begin(), history.end());
  try {
    Suggestion sug = bass::suggest(*backend_, document, labels, history, config_.profile);
    json j = sug.to_json();
    s.suggestion_cache.emplace(key, std::move(sug));
    return {{"suggestion", std::move(j)}, {"suggestion_error", nullptr}};
  } catch (const TimeoutError& e) {
    return {{"suggestion", nullptr}, {"suggestion_error", {{"kind", "timeout"}, {"message", e.what()}}}};
  } catch (const ParseError& e) {
    return {{"suggestion", nullptr}, {"suggestion_error", {{"kind", "parse"}, {"message", e.what()}}}};
  } catch (const Error& e) {
    return {{"suggestion", nullptr}, {"suggestion_error", {{"kind", "backend"}, {"message", e.what()}}}};
  }
}

ApiResponse SessionManager::next(const std::string& id) {
  auto s = find(id);
  if (!s) return error(404, "unknown_session", "no session \"" + id + "\"");
  std::lock_guard lock(s->mutex);
  std::string doc_id;
  try {
    doc_id = s->learner.next_document(s->workspace->lda);
  } catch (const ExhaustedError&) {
    return error(409, "exhausted", "every document is labeled");
  }
  const std::size_t doc = s->workspace->corpus.index_of(doc_id);
  json body = suggestion_payload(*s, doc);
  const auto& d = s->workspace->corpus.document(doc);
  body["document"] = {{"id", d.id}, {"text", d.text}};
  return {200, std::move(body)};
}

ApiResponse SessionManager::suggestion(const std::string& id, const std::string& doc_id) {
  auto s = find(id);
  if (!s) return error(404, "unknown_session", "no session \"" + id + "\"");
  std::lock_guard lock(s->mutex);
  if (!s->workspace->corpus.contains(doc_id)) return error(404, "unknown_document", "no document \"" + doc_id + "\"");
  const std::size_t doc = s->workspace->corpus.index_of(doc_id);
  json body = suggestion_payload(*s, doc);
  const auto& d = s->workspace->corpus.document(doc);
  body["document"] = {{"id", d.id}, {"text", d.text}};
  return {200, std::move(body)};
}

ApiResponse SessionManager::document(const std::string& id, const std::string& doc_id) const {
  auto s = find(id);
  if (!s) return error(404, "unknown_session", "no session \"" + id + "\"");
  std::lock_guard lock(s->mutex);
  if (!s->workspace->corpus.contains(doc_id)) return error(404, "unknown_document", "no document \"" + doc_id + "\"");
  const auto& d = s->workspace->corpus.document(s->workspace->corpus.index_of(doc_id));
  json label = nullptr;
  if (const auto* e = s->learner.labels().find(doc_id)) label = {{"label", e->label}, {"source", to_string(e->source)}};
  return {200, {{"document", {{"id", d.id}, {"text", d.text}}}, {"label", std::move(label)}}};
}

ApiResponse SessionManager::post_label(const std::string& id, const json& body) {
  auto s = find(id);
  if (!s) return error(404, "unknown_session", "no session \"" + id + "\"");
  if (!body.is_object() || !body.contains("doc_id") || !body["doc_id"].is_string() || !body.contains("label") ||
      !body["label"].is_string()) {
    return error(400, "bad_request", "body must be {\"doc_id\": string, \"label\": string, \"action\": string}");
  }
  const auto doc_id = body["doc_id"].get<std::string>();
  const auto label = text::trim(body["label"].get<std::string>());
  std::lock_guard lock(s->mutex);
  if (!s->workspace->corpus.contains(doc_id)) return error(404, "unknown_document", "no document \"" + doc_id + "\"");
  if (label.empty()) return error(422, "empty_label", "label must be non-empty");
  LabelSource source = LabelSource::manual;
  try {
    source = parse_label_source(body.value("action", "manual"));
  } catch (const ValidationError& e) {
    return error(422, "bad_action", e.what());
  }
  s->learner.add_label({doc_id, label, source});
  persist(*s);
  return {200, {{"topics", topics(*s)}, {"labeled", s->learner.labels().size()}}};
}

ApiResponse SessionManager::search(const std::string& id, const std::string& query, std::optional<std::string> k) const {
  auto s = find(id);
  if (!s) return error(404, "unknown_session", "no session \"" + id + "\"");
  std::size_t limit = 10;
  if (k) {
    try {
      std::size_t used = 0;
      const long v = std::stol(*k, &used);
      if (used != k->size() || v < 1) throw std::invalid_argument("k");
      limit = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      return error(422, "bad_k", "k must be a positive integer");
    }
  }
  // The index and corpus are immutable; no session lock needed.
  json results = json::array();
  for (const auto& hit : bass::search(s->workspace->index, s->workspace->corpus, query, limit)) {
    results.push_back({{"doc_id", hit.doc_id}, {"score", hit.score}, {"exact_match", hit.exact_match}});
  }
  return {200, {{"query", query}, {"results", std::move(results)}}};
}

ApiResponse SessionManager::assignments(const std::string& id) const {
  auto s = find(id);
  if (!s) return error(404, "unknown_session", "no session \"" + id + "\"");
  std::lock_guard lock(s->mutex);
  Partition labels;
  try {
    labels = s->learner.propagate();
  } catch (const EmptyModelError&) {
    return error(409, "no_classes", "label at least one document first");
  }
  json out = json::array();
  for (const auto& d : s->workspace->corpus.documents()) {
    const bool human = s->learner.labels().contains(d.id);
    out.push_back({{"doc_id", d.id}, {"label", labels.at(d.id)}, {"source", human ? "human" : "predicted"}});
  }
  return {200, {{"assignments", std::move(out)}}};
}

std::size_t SessionManager::restore_sessions() {
  if (config_.session_dir.empty() || !std::filesystem::exists(config_.session_dir)) return 0;
  std::size_t restored = 0;
  for (const auto& entry : std::filesystem::directory_iterator(config_.session_dir)) {
    if (entry.path().extension() != ".json") continue;
    const json j = json::parse(io::read_file(entry.path()));
    auto ws = workspace(j.at("corpus_id").get<std::string>(), j.at("model_id").get<std::string>());
    auto session = std::make_shared<Session>(j.at("session_id").get<std::string>(), j.at("created_at").get<std::string>(),
                                             ws, ActiveLearner::restore(j.at("learner"), ws->features));
    std::unique_lock lock(sessions_mutex_);
    sessions_[session->id] = std::move(session);
    ++restored;
  }
  return restored;
}

namespace {

void reply(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    reply(res, error(400, "bad_json", e.what()));
    return std::nullopt;
  }
}

}  // namespace

void mount_routes(httplib::Server& server, SessionManager& manager) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse_body(req, res)) reply(res, manager.create_session(*body));
  });
  server.Get("/sessions", [&](const httplib::Request&, httplib::Response& res) { reply(res, manager.list_sessions()); });
  server.Get(R"(/sessions/([A-Za-z0-9]+))", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, manager.get_session(req.matches[1]));
  });
  server.Get(R"(/sessions/([A-Za-z0-9]+)/next)", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, manager.next(req.matches[1]));
  });
  server.Get(R"(/sessions/([A-Za-z0-9]+)/documents/([^/]+)/suggestion)",
             [&](const httplib::Request& req, httplib::Response& res) {
               reply(res, manager.suggestion(req.matches[1], req.matches[2]));
             });
  server.Get(R"(/sessions/([A-Za-z0-9]+)/documents/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, manager.document(req.matches[1], req.matches[2]));
  });
  server.Post(R"(/sessions/([A-Za-z0-9]+)/labels)", [&](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse_body(req, res)) reply(res, manager.post_label(req.matches[1], *body));
  });
  server.Get(R"(/sessions/([A-Za-z0-9]+)/search)", [&](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> k;
    if (req.has_param("k")) k = req.get_param_value("k");
    reply(res, manager.search(req.matches[1], req.get_param_value("q"), k));
  });
  server.Get(R"(/sessions/([A-Za-z0-9]+)/assignments)", [&](const httplib::Request& req, httplib::Response& res) {
    reply(res, manager.assignments(req.matches[1]));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      reply(res, error(500, "internal", e.what()));
    }
  });
}

void serve(SessionManager& manager, const std::string& host, int port, const std::filesystem::path& request_log) {
  httplib::Server server;
  mount_routes(server, manager);
  std::mutex log_mutex;
  server.set_logger([&](const httplib::Request& req, const httplib::Response& res) {
    const auto ts = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
    const std::string line =
        json{{"ts_ms", ts}, {"method", req.method}, {"path", req.path}, {"status", res.status}}.dump();
    std::lock_guard lock(log_mutex);
    if (request_log.empty()) {
      std::cerr << line << '\n';
    } else {
      io::append_line(request_log, line);
    }
  });
  if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace bass
