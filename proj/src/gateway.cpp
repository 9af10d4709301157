// Copyright 2026 The groundsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "groundsim/gateway.hpp"

#include "groundsim/jsonl.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace groundsim {

std::string to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw InvalidRequest("unknown role: " + s);
}

void ChatRequest::validate() const {
  if (messages.empty()) throw InvalidRequest("request has no messages");
  if (messages.front().role == Role::assistant) {
    throw InvalidRequest("first message must be system or user");
  }
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw InvalidRequest("temperature outside [0, 2]");
  }
  if (max_output < 1) throw InvalidRequest("max_output must be positive");
}

void ProviderConfig::validate() const {
  if (retry.max_attempts < 1) throw InvalidRequest("retry.max_attempts must be >= 1");
  if (max_concurrent < 1) throw InvalidRequest("max_concurrent must be >= 1");
  if (retry.base_backoff_ms < 0 || timeout_ms < 1) throw InvalidRequest("bad timing config");
}

std::string ProviderConfig::resolve_auth() const {
  if (!auth_env.empty()) {
    if (const char* v = std::getenv(auth_env.c_str()); v && *v) return v;
  }
  return api_key;
}

ProviderConfig ProviderConfig::from_json(const nlohmann::json& j) {
  ProviderConfig c;
  c.endpoint = j.value("endpoint", c.endpoint);
  c.auth_env = j.value("auth_env", c.auth_env);
  c.api_key = j.value("api_key", c.api_key);
  c.max_concurrent = j.value("max_concurrent", c.max_concurrent);
  c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
  if (j.contains("retry")) {
    c.retry.max_attempts = j["retry"].value("max_attempts", c.retry.max_attempts);
    c.retry.base_backoff_ms = j["retry"].value("base_backoff_ms", c.retry.base_backoff_ms);
  }
  c.validate();
  return c;
}

ProviderConfig ProviderConfig::load(const std::filesystem::path& path) {
  auto c = from_json(json::parse(read_text_file(path)));
  if (const char* ep = std::getenv("GROUNDSIM_ENDPOINT"); ep && *ep) c.endpoint = ep;
  return c;
}

std::string canonical_request(const ChatRequest& request) {
  json j;
  j["messages"] = json::array();
  for (const auto& m : request.messages) {
    j["messages"].push_back(json::array({to_string(m.role), m.content}));
  }
  j["temperature"] = request.temperature;
  j["model"] = request.model_name;
  j["max_output"] = request.max_output;
  return j.dump();
}

std::string fingerprint(const ChatRequest& request) {
  const std::string canon = canonical_request(request);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(canon.data(), canon.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

FallbackPolicy fallback_from_string(const std::string& s) {
  if (s == "error") return FallbackPolicy::error;
  if (s == "echo") return FallbackPolicy::echo;
  if (s == "canned") return FallbackPolicy::canned;
  throw InvalidRequest("unknown fallback policy: " + s);
}

void TranscriptFixture::add(const ChatRequest& request, std::string response) {
  entries_[fingerprint(request)] = std::move(response);
}

void TranscriptFixture::add_fingerprint(std::string fp, std::string response) {
  entries_[std::move(fp)] = std::move(response);
}

std::optional<std::string> TranscriptFixture::lookup(const ChatRequest& request) const {
  auto it = entries_.find(fingerprint(request));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

TranscriptFixture TranscriptFixture::load(const std::filesystem::path& path, FallbackPolicy fallback) {
  TranscriptFixture f(fallback);
  for (const auto& r : read_json_lines(path).records) {
    f.add_fingerprint(r.at("fingerprint").get<std::string>(), r.at("response").get<std::string>());
  }
  return f;
}

void TranscriptFixture::save(const std::filesystem::path& path) const {
  std::vector<json> out;
  for (const auto& [fp, response] : entries_) out.push_back({{"fingerprint", fp}, {"response", response}});
  write_json_lines(path, out);
}

ChatResponse MockProvider::send(const ChatRequest& request, const ProviderConfig&) {
  if (auto hit = fixture_.lookup(request)) return ChatResponse{*hit, FinishReason::complete, {}};
  switch (fixture_.fallback()) {
    case FallbackPolicy::echo: {
      for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == Role::user) return ChatResponse{it->content, FinishReason::complete, {}};
      }
      return ChatResponse{request.messages.back().content, FinishReason::complete, {}};
    }
    case FallbackPolicy::canned:
      return ChatResponse{fixture_.canned(), FinishReason::complete, {}};
    case FallbackPolicy::error:
      break;
  }
  throw FixtureMiss("no fixture for fingerprint " + fingerprint(request));
}

ChatResponse ScriptedProvider::send(const ChatRequest& request, const ProviderConfig&) {
  {
    std::lock_guard lock(mu_);
    seen_.push_back(request);
  }
  return ChatResponse{script_(request), FinishReason::complete, {}};
}

std::vector<ChatRequest> ScriptedProvider::requests() const {
  std::lock_guard lock(mu_);
  return seen_;
}

std::size_t ScriptedProvider::call_count() const {
  std::lock_guard lock(mu_);
  return seen_.size();
}

Gateway::Gateway(std::shared_ptr<Provider> provider, ProviderConfig config, Sleeper sleeper)
    : provider_(std::move(provider)), config_(std::move(config)), sleeper_(std::move(sleeper)) {
  config_.validate();
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

// RAII concurrency slot.
class Gateway::Slot {
 public:
  explicit Slot(Gateway& g) : g_(g) {
    std::unique_lock lock(g_.mu_);
    g_.cv_.wait(lock, [&] { return g_.in_flight_ < g_.config_.max_concurrent; });
    ++g_.in_flight_;
    ++g_.attempts_;
  }
  ~Slot() {
    {
      std::lock_guard lock(g_.mu_);
      --g_.in_flight_;
    }
    g_.cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  Gateway& g_;
};

std::chrono::milliseconds Gateway::backoff_delay(int retry_index) const {
  constexpr std::int64_t kCapMs = 60'000;
  std::int64_t d = config_.retry.base_backoff_ms;
  for (int i = 1; i < retry_index && d < kCapMs; ++i) d *= 2;
  return std::chrono::milliseconds(std::min(d, kCapMs));
}

std::size_t Gateway::total_attempts() const {
  std::lock_guard lock(mu_);
  return attempts_;
}

ChatResponse Gateway::complete(const ChatRequest& request) {
  request.validate();
  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    try {
      Slot slot(*this);
      return provider_->send(request, config_);
    } catch (const TransientError& e) {
      last_error = e.what();
    }
    if (attempt < config_.retry.max_attempts) sleeper_(backoff_delay(attempt));
  }
  throw TimeoutExhausted("all " + std::to_string(config_.retry.max_attempts) +
                         " attempts failed: " + last_error);
}

}  // namespace groundsim
