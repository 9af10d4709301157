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

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace groundsim {

// Character-trigram language identifier with small built-in profiles for
// en, es, fr, de, it and pt. Confidence is a softmax over cosine
// similarities, so it is comparable against a fixed threshold.
class TrigramLanguageScorer {
 public:
  TrigramLanguageScorer();

  LanguageTag score(std::string_view text) const;
  LanguageTag operator()(const Conversation& conv) const;

  void add_profile(const std::string& code, std::string_view sample);
  std::vector<std::string> languages() const;

 private:
  using Profile = std::map<std::string, double>;
  static Profile build(std::string_view text);

  std::map<std::string, Profile> profiles_;
};

}  // namespace groundsim
