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

#include <string>

namespace groundsim {

// Deterministic rule-based stand-in for a model, keyed on
// ChatRequest::purpose. It reads the same prompts a real model would and
// answers in the formats the parsers expect, so the whole toolkit runs
// without network access. Replies depend only on the request.
class OfflineResponder : public Provider {
 public:
  ChatResponse send(const ChatRequest& request, const ProviderConfig& config) override;
};

std::string offline_reply(const ChatRequest& request);

// Rule-based rewrite of a message under a list of style commands.
std::string offline_apply_style(const std::string& message, const std::vector<std::string>& commands);

}  // namespace groundsim
