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

#include "groundsim/structured.hpp"

namespace groundsim {

nlohmann::json extract_json_object(const std::string& reply) {
  // Try every '{' as a start until one parses as a complete object.
  for (auto start = reply.find('{'); start != std::string::npos; start = reply.find('{', start + 1)) {
    auto end = reply.rfind('}');
    while (end != std::string::npos && end > start) {
      auto j = nlohmann::json::parse(reply.begin() + static_cast<std::ptrdiff_t>(start),
                                     reply.begin() + static_cast<std::ptrdiff_t>(end) + 1, nullptr,
                                     /*allow_exceptions=*/false);
      if (!j.is_discarded() && j.is_object()) return j;
      if (end == 0) break;
      end = reply.rfind('}', end - 1);
    }
  }
  throw ParseError("reply contains no JSON object");
}

}  // namespace groundsim
