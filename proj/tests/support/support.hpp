#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "bass/corpus.hpp"
#include "bass/http.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return BASS_SOURCE_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("bass-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// httplib server on an ephemeral port, serving from a background thread.
class StubServer {
 public:
  explicit StubServer(const std::function<void(httplib::Server&)>& setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  int port() const { return port_; }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  httplib::Server& server() { return server_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

// Enough of JSON Schema for the shipped schemas: type (string or list),
// properties, required, additionalProperties=false, items, enum, minItems,
// maxItems, minLength, minimum, maximum. Returns the first violation.
inline std::string schema_violation(const nlohmann::json& schema, const nlohmann::json& v, const std::string& at = "$") {
  auto type_ok = [&](const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    return false;
  };
  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || type_ok(t.get<std::string>());
    } else {
      ok = type_ok(schema["type"].get<std::string>());
    }
    if (!ok) return at + ": expected type " + schema["type"].dump() + ", got " + v.dump();
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) return at + ": " + v.dump() + " not in enum";
  }
  if (v.is_string() && schema.contains("minLength") && v.get<std::string>().size() < schema["minLength"].get<std::size_t>()) {
    return at + ": string shorter than minLength";
  }
  if (v.is_number()) {
    if (schema.contains("minimum") && v.get<double>() < schema["minimum"].get<double>()) return at + ": below minimum";
    if (schema.contains("maximum") && v.get<double>() > schema["maximum"].get<double>()) return at + ": above maximum";
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& r : schema["required"]) {
        if (!v.contains(r.get<std::string>())) return at + ": missing " + r.get<std::string>();
      }
    }
    const auto props = schema.value("properties", nlohmann::json::object());
    for (const auto& [key, val] : v.items()) {
      if (props.contains(key)) {
        auto err = schema_violation(props[key], val, at + "." + key);
        if (!err.empty()) return err;
      } else if (schema.contains("additionalProperties") && schema["additionalProperties"] == false) {
        return at + ": unexpected property " + key;
      }
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>()) return at + ": too few items";
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>()) return at + ": too many items";
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto err = schema_violation(schema["items"], v[i], at + "[" + std::to_string(i) + "]");
        if (!err.empty()) return err;
      }
    }
  }
  return {};
}

nlohmann::json load_schema(const std::string& name);

// Three well-separated labeled topics over disjoint vocabularies plus a little
// shared noise, deterministic in `seed`.
std::vector<bass::Document> three_topic_docs(int docs_per_topic, std::uint64_t seed);

}  // namespace testing_support
