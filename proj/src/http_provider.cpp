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

#include "groundsim/http_provider.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace groundsim {

namespace {

using json = nlohmann::json;

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

UrlParts split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidRequest("endpoint lacks scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public HttpTransport {
 public:
  HttpReply post(const std::string& url, const std::map<std::string, std::string>& headers,
                 const std::string& body, int timeout_ms) override {
    auto parts = split_url(url);
    httplib::Client client(parts.origin);
    const auto timeout = std::chrono::milliseconds(timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(parts.path, h, body, "application/json");
    if (!res) throw TransientError("transport failure: " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_httplib_transport() { return std::make_shared<HttplibTransport>(); }

std::string HttpProvider::request_body(const ChatRequest& request) {
  json j;
  j["model"] = request.model_name;
  j["temperature"] = request.temperature;
  j["max_tokens"] = request.max_output;
  if (request.seed) j["seed"] = *request.seed;
  j["messages"] = json::array();
  for (const auto& m : request.messages) {
    j["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return j.dump();
}

ChatResponse HttpProvider::parse_body(const std::string& body) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
    throw GatewayError("malformed provider response");
  }
  const auto& choice = j["choices"][0];
  ChatResponse r;
  const auto& content = choice["message"]["content"];
  r.content = content.is_string() ? content.get<std::string>() : std::string();
  const std::string finish = choice.value("finish_reason", std::string("stop"));
  r.finish_reason = finish == "length" ? FinishReason::length
                    : (finish == "stop" || finish.empty()) ? FinishReason::complete
                                                           : FinishReason::error;
  if (j.contains("usage")) {
    r.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
    r.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
  }
  return r;
}

ChatResponse HttpProvider::send(const ChatRequest& request, const ProviderConfig& config) {
  std::map<std::string, std::string> headers;
  const std::string key = config.resolve_auth();
  if (!key.empty()) headers["Authorization"] = "Bearer " + key;
  auto reply = transport_->post(config.endpoint, headers, request_body(request), config.timeout_ms);
  if (reply.status == 401 || reply.status == 403) {
    throw AuthError("provider rejected credentials (HTTP " + std::to_string(reply.status) + ")");
  }
  if (reply.status == 408 || reply.status == 429 || reply.status >= 500) {
    throw TransientError("HTTP " + std::to_string(reply.status), reply.status);
  }
  if (reply.status != 200) {
    throw GatewayError("HTTP " + std::to_string(reply.status) + ": " + reply.body.substr(0, 200));
  }
  return parse_body(reply.body);
}

}  // namespace groundsim
