// Model-client contract: scripted mock and chat-completion remote backends.
#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssg::model {

struct Attachment {
  std::string mime;
  std::string bytes;
};

struct ModelRequest {
  std::string system_text;
  std::string user_text;
  std::vector<Attachment> attachments;
  std::string scenario_key;
};

struct ModelReply {
  std::string text;
  std::string backend_id;
  std::chrono::milliseconds latency{0};
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class TransportError : public ModelError {
 public:
  using ModelError::ModelError;
};
class TimeoutError : public ModelError {
 public:
  using ModelError::ModelError;
};
class ScenarioMiss : public ModelError {
 public:
  explicit ScenarioMiss(const std::string& key) : ModelError("no scripted reply for scenario key " + key), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};
/// Reply text does not follow the requested output format.
class FormatError : public ModelError {
 public:
  FormatError(const std::string& what, std::string raw) : ModelError(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

/// "<task id>/<role>/<round>"
std::string scenario_key(const std::string& task_id, const std::string& role, int round);

/// Backends hold no per-task state and must be safe for concurrent callers.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual ModelReply complete(const ModelRequest& req) = 0;
  virtual std::string id() const = 0;
};

/// Canned replies keyed by scenario key. Lookup tries the exact key, then
/// patterns with '*' segments ("*/generate/*"), then the default reply.
/// Without a default the mock is strict and throws ScenarioMiss.
class MockBackend : public ModelBackend {
 public:
  MockBackend(std::map<std::string, std::string> scenarios, std::optional<std::string> default_reply = std::nullopt);
  /// JSON object key -> reply text; the key "__default__" sets the default.
  static std::unique_ptr<MockBackend> from_file(const std::filesystem::path& path);

  ModelReply complete(const ModelRequest& req) override;
  std::string id() const override { return "mock"; }

 private:
  std::map<std::string, std::string> scenarios_;
  std::optional<std::string> default_;
};

struct RemoteConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/chat/completions
  std::string token_env = "SSG_API_TOKEN";
  std::string model = "default";
  std::chrono::milliseconds timeout{60000};
  int concurrency = 4;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};
};

/// Two-message chat completion over HTTP JSON. Retries transport errors,
/// 5xx and 429 with exponential backoff (base, 2*base, ...).
class RemoteBackend : public ModelBackend {
 public:
  explicit RemoteBackend(RemoteConfig cfg);
  ModelReply complete(const ModelRequest& req) override;
  std::string id() const override { return "remote:" + cfg_.model; }
  const RemoteConfig& config() const { return cfg_; }

 private:
  RemoteConfig cfg_;
  std::counting_semaphore<1024> in_flight_;
};

/// "mock:<scenario.json>" or "http:<url>" / "http://..." / "https://...".
std::unique_ptr<ModelBackend> make_backend(const std::string& spec, const RemoteConfig& remote_defaults = {});

/// Prompt template with {{placeholder}} substitution; unknown placeholders
/// are left verbatim.
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string text) : text_(std::move(text)) {}
  static PromptTemplate load(const std::filesystem::path& path);
  /// Loads `name` from prompt_dir().
  static PromptTemplate named(const std::string& name);

  std::string render(const std::map<std::string, std::string>& values) const;
  /// Rendered text split at the "=== USER ===" line into (system, user).
  std::pair<std::string, std::string> render_messages(const std::map<std::string, std::string>& values) const;
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// $SSG_PROMPT_DIR if set, otherwise the installed prompts directory.
std::filesystem::path prompt_dir();

}  // namespace ssg::model
