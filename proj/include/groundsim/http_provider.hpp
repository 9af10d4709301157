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

#include "groundsim/gateway.hpp"

#include <map>
#include <memory>
#include <string>

namespace groundsim {

struct HttpReply {
  int status = 0;
  std::string body;
};

// One POST. Network-level failures throw TransientError.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpReply post(const std::string& url, const std::map<std::string, std::string>& headers,
                         const std::string& body, int timeout_ms) = 0;
};

// cpp-httplib backed transport (http:// and https://).
std::shared_ptr<HttpTransport> make_httplib_transport();

// OpenAI-compatible chat-completions provider.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(std::shared_ptr<HttpTransport> transport = make_httplib_transport())
      : transport_(std::move(transport)) {}

  ChatResponse send(const ChatRequest& request, const ProviderConfig& config) override;

  static std::string request_body(const ChatRequest& request);
  static ChatResponse parse_body(const std::string& body);

 private:
  std::shared_ptr<HttpTransport> transport_;
};

}  // namespace groundsim
