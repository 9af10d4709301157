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

#include <nlohmann/json.hpp>

#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace groundsim {

enum class Speaker { user, assistant };

struct Turn {
  Speaker role = Speaker::user;
  std::string content;
  int index = 0;

  bool operator==(const Turn&) const = default;
};

struct LanguageTag {
  std::string code;
  double confidence = 0.0;

  bool operator==(const LanguageTag&) const = default;
};

struct ConversationTags {
  std::string domain;
  std::string task_type;
  int complexity = 1;
  int engagement = 1;
  int depth = 1;
  int quality_score = 3;

  static ConversationTags make(std::string domain, std::string task_type, int complexity,
                               int engagement, int depth);
  bool valid() const;
  bool operator==(const ConversationTags&) const = default;
};

struct Conversation {
  std::string conversation_id;
  std::string user_id;
  std::string source_model;
  std::vector<Turn> turns;
  std::optional<LanguageTag> language;
  std::optional<ConversationTags> tags;

  std::size_t user_turn_count() const;
  std::vector<std::string> user_messages() const;
  bool operator==(const Conversation&) const = default;
};

nlohmann::json to_json(const Conversation& c);
// Throws FormatError on a record that cannot be normalized into a valid
// conversation.
Conversation conversation_from_json(const nlohmann::json& j);

std::string to_string(Speaker s);

// Roles alternate starting with user; consecutive same-role turns are merged
// with a newline, blank turns dropped, leading assistant turns dropped, and
// indices recompacted.
std::vector<Turn> normalize_turns(std::vector<Turn> turns);

struct ParsedCorpus {
  std::vector<Conversation> conversations;
  std::size_t skipped = 0;
};

// Line-delimited conversation records. Malformed lines are skipped and
// counted; FormatError only when nothing parses.
ParsedCorpus parse_conversations(std::istream& in);

struct TrivialLexicon {
  std::set<std::string> words{"hi",    "hello", "hey",  "thanks", "thank",   "thx",    "ok",
                              "okay",  "bye",   "goodbye", "great", "cool", "perfect"};
  std::size_t max_words = 5;

  bool is_trivial(const std::string& message) const;
};

// Drops greeting/thanks user turns (and the assistant reply that follows).
Conversation trim_trivial_rounds(const Conversation& conv, const TrivialLexicon& lexicon = {});

using LanguageScorer = std::function<LanguageTag(const Conversation&)>;

std::vector<Conversation> filter_stage1(const std::vector<Conversation>& convs,
                                        const LanguageScorer& scorer, int min_turns = 2,
                                        const std::string& lang = "en",
                                        double min_confidence = 0.7);

std::vector<Conversation> filter_stage2(const std::vector<Conversation>& convs,
                                        const std::string& required_model,
                                        int min_substantive_turns = 3,
                                        const TrivialLexicon& lexicon = {});

// Model name and sampling settings for tagging calls.
struct TaggingOptions {
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
};

ConversationTags tag_conversation(const Conversation& conv, Gateway& gateway,
                                  const TaggingOptions& options = {});

std::string tagging_prompt(const Conversation& conv);
ConversationTags parse_tags_reply(const std::string& reply);

struct CurationPolicy {
  int per_domain_cap = 1000;
  int per_task_cap = 1000;
  int per_user_cap = 5;
  int min_domain_count = 1;
  std::set<std::string> excluded_domains;
  std::set<std::string> excluded_task_types{"Translation", "Summarization"};

  void validate() const;
  static CurationPolicy from_json(const nlohmann::json& j);
};

// Deterministic ordering shared by curation and subset building: quality
// descending, then conversation id ascending.
bool quality_order(const Conversation& a, const Conversation& b);

std::vector<Conversation> curate(const std::vector<Conversation>& convs, const CurationPolicy& policy);

}  // namespace groundsim
