#include "ssg/model.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ssg/util.hpp"

#ifndef SSG_DEFAULT_PROMPT_DIR
#define SSG_DEFAULT_PROMPT_DIR "prompts"
#endif

namespace ssg::model {

namespace {

using Clock = std::chrono::steady_clock;

bool segment_match(std::string_view pattern, std::string_view key) {
  std::vector<std::string_view> ps, ks;
  auto split = [](std::string_view s, std::vector<std::string_view>& out) {
    std::size_t start = 0;
    for (;;) {
      auto slash = s.find('/', start);
      out.push_back(s.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start));
      if (slash == std::string_view::npos) break;
      start = slash + 1;
    }
  };
  split(pattern, ps);
  split(key, ks);
  if (ps.size() != ks.size()) return false;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps[i] != "*" && ps[i] != ks[i]) return false;
  return true;
}

std::string base64(std::string_view in) {
  static constexpr char tbl[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    auto n = (std::uint32_t(std::uint8_t(in[i])) << 16) | (std::uint32_t(std::uint8_t(in[i + 1])) << 8) |
             std::uint8_t(in[i + 2]);
    out += {tbl[n >> 18], tbl[(n >> 12) & 63], tbl[(n >> 6) & 63], tbl[n & 63]};
  }
  if (i + 1 == in.size()) {
    auto n = std::uint32_t(std::uint8_t(in[i])) << 16;
    out += {tbl[n >> 18], tbl[(n >> 12) & 63], '=', '='};
  } else if (i + 2 == in.size()) {
    auto n = (std::uint32_t(std::uint8_t(in[i])) << 16) | (std::uint32_t(std::uint8_t(in[i + 1])) << 8);
    out += {tbl[n >> 18], tbl[(n >> 12) & 63], tbl[(n >> 6) & 63], '='};
  }
  return out;
}

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw TransportError("endpoint is not an absolute URL: " + url);
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

std::string scenario_key(const std::string& task_id, const std::string& role, int round) {
  return task_id + "/" + role + "/" + std::to_string(round);
}

MockBackend::MockBackend(std::map<std::string, std::string> scenarios, std::optional<std::string> default_reply)
    : scenarios_(std::move(scenarios)), default_(std::move(default_reply)) {}

std::unique_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError("scenario file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ModelError("scenario file must be a JSON object");
  std::map<std::string, std::string> scen;
  std::optional<std::string> def;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw ModelError("scenario " + k + " is not a string");
    if (k == "__default__")
      def = v.get<std::string>();
    else
      scen[k] = v.get<std::string>();
  }
  return std::make_unique<MockBackend>(std::move(scen), std::move(def));
}

ModelReply MockBackend::complete(const ModelRequest& req) {
  if (req.user_text.empty()) throw ModelError("request has empty user text");
  if (auto it = scenarios_.find(req.scenario_key); it != scenarios_.end()) return {it->second, id(), {}};
  for (const auto& [k, v] : scenarios_)
    if (k.find('*') != std::string::npos && segment_match(k, req.scenario_key)) return {v, id(), {}};
  if (default_) return {*default_, id(), {}};
  throw ScenarioMiss(req.scenario_key);
}

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)), in_flight_(std::clamp(cfg_.concurrency, 1, 1024)) {}

ModelReply RemoteBackend::complete(const ModelRequest& req) {
  if (req.user_text.empty()) throw ModelError("request has empty user text");
  const auto url = split_url(cfg_.endpoint);

  nlohmann::json user_content;
  if (req.attachments.empty()) {
    user_content = req.user_text;
  } else {
    user_content = nlohmann::json::array({{{"type", "text"}, {"text", req.user_text}}});
    for (const auto& a : req.attachments)
      user_content.push_back({{"type", "image_url"},
                              {"image_url", {{"url", "data:" + a.mime + ";base64," + base64(a.bytes)}}}});
  }
  nlohmann::json body{{"model", cfg_.model},
                      {"messages",
                       {{{"role", "system"}, {"content", req.system_text}}, {{"role", "user"}, {"content", user_content}}}}};
  const auto payload = body.dump();

  httplib::Headers headers;
  if (const char* tok = std::getenv(cfg_.token_env.c_str()); tok && *tok)
    headers.emplace("Authorization", std::string("Bearer ") + tok);

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  const auto start = Clock::now();
  std::string last_error;
  bool last_was_timeout = false;
  for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(cfg_.backoff_base * (1 << (attempt - 2)));
    httplib::Client cli(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    auto res = cli.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_was_timeout = res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_was_timeout = false;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      auto j = nlohmann::json::parse(res->body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
      return {content.is_null() ? std::string() : content.get<std::string>(), id(), latency};
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed chat-completion response: ") + e.what());
    }
  }
  auto msg = "giving up after " + std::to_string(cfg_.max_attempts) + " attempts: " + last_error;
  if (last_was_timeout) throw TimeoutError(msg);
  throw TransportError(msg);
}

std::unique_ptr<ModelBackend> make_backend(const std::string& spec, const RemoteConfig& remote_defaults) {
  if (spec.rfind("mock:", 0) == 0) return MockBackend::from_file(spec.substr(5));
  RemoteConfig cfg = remote_defaults;
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
    cfg.endpoint = spec;
  else if (spec.rfind("http:", 0) == 0)
    cfg.endpoint = spec.substr(5);
  else
    throw ModelError("unknown backend spec '" + spec + "' (expected mock:<file> or http:<url>)");
  return std::make_unique<RemoteBackend>(std::move(cfg));
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) { return PromptTemplate(read_file(path)); }

PromptTemplate PromptTemplate::named(const std::string& name) { return load(prompt_dir() / name); }

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  std::string out;
  std::size_t pos = 0;
  while (pos < text_.size()) {
    auto open = text_.find("{{", pos);
    if (open == std::string::npos) break;
    auto close = text_.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(text_, pos, open - pos);
    auto name = std::string(trim(std::string_view(text_).substr(open + 2, close - open - 2)));
    if (auto it = values.find(name); it != values.end())
      out += it->second;
    else
      out.append(text_, open, close + 2 - open);
    pos = close + 2;
  }
  out.append(text_, pos);
  return out;
}

std::pair<std::string, std::string> PromptTemplate::render_messages(
    const std::map<std::string, std::string>& values) const {
  auto text = render(values);
  constexpr std::string_view marker = "\n=== USER ===\n";
  auto at = text.find(marker);
  if (at == std::string::npos) return {std::string(), text};
  return {text.substr(0, at), text.substr(at + marker.size())};
}

std::filesystem::path prompt_dir() {
  if (const char* d = std::getenv("SSG_PROMPT_DIR"); d && *d) return d;
  return SSG_DEFAULT_PROMPT_DIR;
}

}  // namespace ssg::model
