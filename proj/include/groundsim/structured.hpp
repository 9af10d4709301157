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
#include "groundsim/gateway.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace groundsim {

// Pulls the first JSON object out of a model reply, tolerating code fences
// and prose around it. Throws ParseError.
nlohmann::json extract_json_object(const std::string& reply);

// One completion plus at most one repair round. `parse` throws ParseError on
// a bad reply; after the repair also fails, Err is thrown.
template <class Err, class Parse>
auto complete_structured(Gateway& gateway, ChatRequest request, Parse&& parse,
                         const std::string& repair_instruction) -> decltype(parse(std::string{})) {
  auto first = gateway.complete(request);
  try {
    return parse(first.content);
  } catch (const ParseError& e) {
    request.messages.push_back({Role::assistant, first.content});
    request.messages.push_back(
        {Role::user, repair_instruction + "\nThe previous reply was rejected: " + e.what()});
  }
  auto second = gateway.complete(request);
  try {
    return parse(second.content);
  } catch (const ParseError& e) {
    throw Err(std::string("reply unusable after repair: ") + e.what());
  }
}

}  // namespace groundsim
