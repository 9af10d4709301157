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

#pragma once

#include "groundsim/error.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace groundsim {

enum class Role { system, user, assistant };

std::string to_string(Role role);
Role role_from_string(const std::string& s);

struct ChatMessage {
  Role role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  std::string model_name;
  int max_output = 1024;
  std::optional<std::int64_t> seed;
  // Routing label for logs and the offline responder ("tag", "judge", ...).
  // Not part of the fingerprint.
  std::string purpose;

  // Throws InvalidRequest when an invariant is broken.
  void validate() const;
};

enum class FinishReason { complete, length, error };

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::complete;
  TokenUsage usage;
};

struct RetryPolicy {
  int max_attempts = 3;
  int base_backoff_ms = 500;
};

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  // Name of the environment variable holding the key; `api_key` is the
  // config-file fallback.
  std::string auth_env = "GROUNDSIM_API_KEY";
  std::string api_key;
  int max_concurrent = 4;
  RetryPolicy retry;
  int timeout_ms = 60000;

  void validate() const;
  std::string resolve_auth() const;

  // Reads a JSON config; GROUNDSIM_ENDPOINT overrides `endpoint`.
  static ProviderConfig load(const std::filesystem::path& path);
  static ProviderConfig from_json(const nlohmann::json& j);
};

// SHA-256 (hex) over the canonical serialization of messages, temperature,
// model name and max_output.
std::string fingerprint(const ChatRequest& request);
std::string canonical_request(const ChatRequest& request);

// A backend that performs one attempt. Throws TransientError for retryable
// failures, AuthError for credential problems, GatewayError otherwise.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatResponse send(const ChatRequest& request, const ProviderConfig& config) = 0;
};

enum class FallbackPolicy { error, echo, canned };

FallbackPolicy fallback_from_string(const std::string& s);

class TranscriptFixture {
 public:
  explicit TranscriptFixture(FallbackPolicy fallback = FallbackPolicy::error,
                             std::string canned = "OK")
      : fallback_(fallback), canned_(std::move(canned)) {}

  void add(const ChatRequest& request, std::string response);
  void add_fingerprint(std::string fp, std::string response);
  std::optional<std::string> lookup(const ChatRequest& request) const;

  FallbackPolicy fallback() const { return fallback_; }
  const std::string& canned() const { return canned_; }
  std::size_t size() const { return entries_.size(); }

  // Line-delimited {"fingerprint": ..., "response": ...} records.
  static TranscriptFixture load(const std::filesystem::path& path,
                                FallbackPolicy fallback = FallbackPolicy::error);
  void save(const std::filesystem::path& path) const;

 private:
  FallbackPolicy fallback_;
  std::string canned_;
  std::map<std::string, std::string> entries_;
};

// Fixture-backed provider. Misses follow the fixture's fallback policy.
class MockProvider : public Provider {
 public:
  explicit MockProvider(TranscriptFixture fixture) : fixture_(std::move(fixture)) {}
  ChatResponse send(const ChatRequest& request, const ProviderConfig& config) override;

 private:
  TranscriptFixture fixture_;
};

// Provider driven by a callback; used by tests to script conversations.
class ScriptedProvider : public Provider {
 public:
  using Script = std::function<std::string(const ChatRequest&)>;
  explicit ScriptedProvider(Script script) : script_(std::move(script)) {}
  ChatResponse send(const ChatRequest& request, const ProviderConfig& config) override;

  std::vector<ChatRequest> requests() const;
  std::size_t call_count() const;

 private:
  Script script_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> seen_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Shared, thread-safe front door to a provider. Owns the concurrency bound
// and the retry loop.
class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, ProviderConfig config, Sleeper sleeper = {});

  ChatResponse complete(const ChatRequest& request);

  const ProviderConfig& config() const { return config_; }

  // Delay before attempt `attempt` (1-based retry index).
  std::chrono::milliseconds backoff_delay(int retry_index) const;

  std::size_t total_attempts() const;

 private:
  class Slot;

  std::shared_ptr<Provider> provider_;
  ProviderConfig config_;
  Sleeper sleeper_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  std::size_t attempts_ = 0;
};

}  // namespace groundsim
