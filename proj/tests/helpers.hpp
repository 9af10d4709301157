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

#include "groundsim/corpus.hpp"
#include "groundsim/gateway.hpp"
#include "groundsim/profiling.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace testing_support {

using namespace groundsim;

inline Conversation make_conv(const std::string& id, const std::string& user, const std::vector<std::string>& users,
                              const std::string& model = "gpt-4") {
  Conversation c;
  c.conversation_id = id;
  c.user_id = user;
  c.source_model = model;
  int idx = 0;
  for (const auto& u : users) {
    c.turns.push_back({Speaker::user, u, idx++});
    c.turns.push_back({Speaker::assistant, "Sure, here is some help with that.", idx++});
  }
  return c;
}

inline Conversation tagged(Conversation c, const std::string& domain, int q1, int q2, int q3,
                           const std::string& task = "Question Answering") {
  c.tags = ConversationTags::make(domain, task, q1, q2, q3);
  return c;
}

inline StyleCommand command(const std::string& text, std::vector<std::pair<std::string, std::string>> examples,
                            StyleDimension dim = StyleDimension::capitalization) {
  StyleCommand c;
  c.command = text;
  c.dimension = dim;
  for (auto& [q, src] : examples) c.examples.push_back({q, src});
  return c;
}

inline UserProfile profile(const std::string& user, std::vector<StyleCommand> commands, std::vector<std::string> convs) {
  UserProfile p;
  p.user_id = user;
  p.manual.user_id = user;
  p.manual.commands = std::move(commands);
  p.conversation_ids = std::move(convs);
  return p;
}

inline std::unique_ptr<Gateway> scripted(ScriptedProvider::Script script) {
  ProviderConfig cfg;
  cfg.retry.base_backoff_ms = 1;
  return std::make_unique<Gateway>(std::make_shared<ScriptedProvider>(std::move(script)), cfg);
}

inline std::filesystem::path data_dir() { return GROUNDSIM_DATA_DIR; }

}  // namespace testing_support
