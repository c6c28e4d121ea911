#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>

#include "codesim/harness.hpp"

namespace codesim::harness {

using nlohmann::json;

namespace {

BackendResponse parse_response_entry(const json& entry) {
  BackendResponse r;
  if (entry.is_string()) {
    r.text = entry.get<std::string>();
    return r;
  }
  r.text = entry.at("text").get<std::string>();
  if (entry.contains("input_tokens")) r.input_tokens = entry.at("input_tokens").get<std::int64_t>();
  if (entry.contains("output_tokens")) r.output_tokens = entry.at("output_tokens").get<std::int64_t>();
  if (entry.contains("token_logprobs")) r.token_logprobs = entry.at("token_logprobs").get<std::vector<double>>();
  return r;
}

void fill_counts(BackendResponse& r, const BackendRequest& req, const BackendSpec& spec) {
  if (!spec.returns_token_counts) return;
  if (!r.input_tokens) r.input_tokens = approx_token_count(req.bundle.user_text);
  if (!r.output_tokens) r.output_tokens = approx_token_count(r.text);
}

class PerfectOracle final : public Backend {
 public:
  explicit PerfectOracle(BackendSpec spec) : spec_(std::move(spec)) {}

  BackendResponse complete(const BackendRequest& req) override {
    BackendResponse r;
    if (req.bundle.style == prompting::PromptStyle::MemorisationProbe && req.bundle.held_out)
      r.text = *req.bundle.held_out;
    else
      r.text = "Answer: " + req.truth.to_text();
    fill_counts(r, req, spec_);
    if (spec_.returns_token_likelihoods)
      r.token_logprobs = std::vector<double>(static_cast<std::size_t>(std::max<std::int64_t>(1, approx_token_count(r.text))), 0.0);
    return r;
  }
  const BackendSpec& spec() const override { return spec_; }

 private:
  BackendSpec spec_;
};

// Replays canned responses keyed by request key, falling back to the bare
// instance id.
class Scripted final : public Backend {
 public:
  explicit Scripted(BackendSpec spec) : spec_(std::move(spec)) {
    std::ifstream in(spec_.fixture_path);
    if (!in) throw FixtureMissing("cannot open fixture file " + spec_.fixture_path.string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw FixtureMissing("malformed fixture file " + spec_.fixture_path.string() + ": " + e.what());
    }
    const auto& responses = doc.contains("responses") ? doc.at("responses") : doc;
    for (const auto& [key, entry] : responses.items()) responses_.emplace(key, parse_response_entry(entry));
  }

  BackendResponse complete(const BackendRequest& req) override {
    auto it = responses_.find(req.key);
    if (it == responses_.end()) it = responses_.find(req.bundle.instance_id);
    if (it == responses_.end()) throw FixtureMissing("no scripted response for " + req.key);
    auto r = it->second;
    fill_counts(r, req, spec_);
    return r;
  }
  const BackendSpec& spec() const override { return spec_; }

 private:
  BackendSpec spec_;
  std::map<std::string, BackendResponse> responses_;
};

// OpenAI-style chat completions over HTTP(S).
class HttpChat final : public Backend {
 public:
  explicit HttpChat(BackendSpec spec) : spec_(std::move(spec)) {
    const auto scheme_end = spec_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + spec_.endpoint);
    const auto path_start = spec_.endpoint.find('/', scheme_end + 3);
    base_ = spec_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : spec_.endpoint.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (spec_.endpoint.rfind("https://", 0) == 0) throw ConfigError("built without TLS support");
#endif
    if (!spec_.auth_env.empty()) {
      const char* token = std::getenv(spec_.auth_env.c_str());
      if (token == nullptr) throw ConfigError("environment variable " + spec_.auth_env + " is not set");
      token_ = token;
    }
  }

  BackendResponse complete(const BackendRequest& req) override {
    json body{{"model", spec_.model},
              {"messages", json::array({{{"role", "user"}, {"content", req.bundle.user_text}}})},
              {"temperature", spec_.temperature},
              {"max_tokens", spec_.max_tokens},
              {"presence_penalty", spec_.presence_penalty}};
    if (spec_.returns_token_likelihoods) body["logprobs"] = true;

    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(spec_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(spec_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw BackendError("request failed: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
      throw BackendError("HTTP " + std::to_string(res->status), true);
    if (res->status < 200 || res->status >= 300)
      throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body, false);

    BackendResponse out;
    try {
      const auto doc = json::parse(res->body);
      const auto& choice = doc.at("choices").at(0);
      const auto& content = choice.at("message").at("content");
      out.text = content.is_null() ? "" : content.get<std::string>();
      if (doc.contains("usage") && doc["usage"].is_object()) {
        const auto& usage = doc["usage"];
        if (usage.contains("prompt_tokens")) out.input_tokens = usage["prompt_tokens"].get<std::int64_t>();
        if (usage.contains("completion_tokens")) out.output_tokens = usage["completion_tokens"].get<std::int64_t>();
      }
      if (choice.contains("logprobs") && choice["logprobs"].is_object() && choice["logprobs"].contains("content")) {
        std::vector<double> lps;
        for (const auto& tok : choice["logprobs"]["content"]) lps.push_back(tok.at("logprob").get<double>());
        out.token_logprobs = std::move(lps);
      }
    } catch (const json::exception& e) {
      throw BackendError(std::string("malformed response: ") + e.what(), false);
    }
    return out;
  }
  const BackendSpec& spec() const override { return spec_; }

 private:
  BackendSpec spec_;
  std::string base_;
  std::string path_;
  std::string token_;
};

}  // namespace

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::HttpChat:
      return "http_chat";
    case BackendKind::PerfectOracle:
      return "perfect_oracle";
    case BackendKind::Scripted:
      return "scripted";
  }
  return "perfect_oracle";
}

BackendKind backend_kind_from_string(std::string_view text) {
  std::string name(text);
  std::replace(name.begin(), name.end(), '-', '_');
  for (auto k : {BackendKind::HttpChat, BackendKind::PerfectOracle, BackendKind::Scripted})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown backend kind '" + std::string(text) + "'");
}

void to_json(json& j, const BackendSpec& s) {
  j = json{{"kind", to_string(s.kind)},
           {"returns_token_counts", s.returns_token_counts},
           {"returns_token_likelihoods", s.returns_token_likelihoods}};
  if (s.kind == BackendKind::HttpChat) {
    j["endpoint"] = s.endpoint;
    j["model"] = s.model;
    j["temperature"] = s.temperature;
    j["max_tokens"] = s.max_tokens;
    j["presence_penalty"] = s.presence_penalty;
    j["auth_env"] = s.auth_env;
    j["timeout_ms"] = s.timeout.count();
    j["retry"] = {{"max_attempts", s.retry.max_attempts},
                  {"base_delay_ms", s.retry.base_delay.count()},
                  {"max_delay_ms", s.retry.max_delay.count()}};
  }
  if (s.kind == BackendKind::Scripted) j["fixture"] = s.fixture_path.string();
}

void from_json(const json& j, BackendSpec& s) {
  s = BackendSpec{};
  s.kind = backend_kind_from_string(j.at("kind").get<std::string>());
  s.endpoint = j.value("endpoint", "");
  s.model = j.value("model", "");
  s.temperature = j.value("temperature", 0.0);
  s.max_tokens = j.value("max_tokens", 4096);
  s.presence_penalty = j.value("presence_penalty", 0.0);
  s.auth_env = j.value("auth_env", "");
  s.timeout = std::chrono::milliseconds(j.value("timeout_ms", std::int64_t{120000}));
  if (j.contains("retry")) {
    const auto& r = j.at("retry");
    s.retry.max_attempts = r.value("max_attempts", 5);
    s.retry.base_delay = std::chrono::milliseconds(r.value("base_delay_ms", std::int64_t{500}));
    s.retry.max_delay = std::chrono::milliseconds(r.value("max_delay_ms", std::int64_t{16000}));
  }
  s.fixture_path = j.value("fixture", "");
  s.returns_token_counts = j.value("returns_token_counts", true);
  s.returns_token_likelihoods = j.value("returns_token_likelihoods", false);
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec) {
  switch (spec.kind) {
    case BackendKind::PerfectOracle:
      return std::make_unique<PerfectOracle>(spec);
    case BackendKind::Scripted:
      if (spec.fixture_path.empty()) throw ConfigError("scripted backend needs a fixture path");
      return std::make_unique<Scripted>(spec);
    case BackendKind::HttpChat:
      if (spec.endpoint.empty() || spec.model.empty()) throw ConfigError("http_chat backend needs endpoint and model");
      return std::make_unique<HttpChat>(spec);
  }
  throw ConfigError("unknown backend kind");
}

std::int64_t approx_token_count(std::string_view text) {
  std::int64_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

BackendResponse complete_with_retry(Backend& backend, const BackendRequest& request) {
  const auto& policy = backend.spec().retry;
  thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
  for (int attempt = 1;; ++attempt) {
    try {
      return backend.complete(request);
    } catch (const BackendError& e) {
      if (!e.transient() || attempt >= std::max(1, policy.max_attempts)) throw;
      auto delay = policy.base_delay * (std::int64_t{1} << std::min(attempt - 1, 20));
      delay = std::min(delay, policy.max_delay);
      std::uniform_real_distribution<double> jitter(0.5, 1.0);
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(delay.count()) * jitter(jitter_rng))));
    }
  }
}

}  // namespace codesim::harness
