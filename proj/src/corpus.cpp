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

#include "groundsim/corpus.hpp"

#include "groundsim/jsonl.hpp"
#include "groundsim/structured.hpp"
#include "groundsim/text.hpp"

#include <algorithm>
#include <map>

namespace groundsim {

std::string to_string(Speaker s) { return s == Speaker::user ? "user" : "assistant"; }

ConversationTags ConversationTags::make(std::string domain, std::string task_type, int complexity,
                                        int engagement, int depth) {
  ConversationTags t;
  t.domain = std::move(domain);
  t.task_type = std::move(task_type);
  t.complexity = complexity;
  t.engagement = engagement;
  t.depth = depth;
  t.quality_score = complexity + engagement + depth;
  return t;
}

bool ConversationTags::valid() const {
  auto in_range = [](int v) { return v >= 1 && v <= 5; };
  return in_range(complexity) && in_range(engagement) && in_range(depth) &&
         quality_score == complexity + engagement + depth && !domain.empty();
}

std::size_t Conversation::user_turn_count() const {
  return static_cast<std::size_t>(
      std::count_if(turns.begin(), turns.end(), [](const Turn& t) { return t.role == Speaker::user; }));
}

std::vector<std::string> Conversation::user_messages() const {
  std::vector<std::string> out;
  for (const auto& t : turns) {
    if (t.role == Speaker::user) out.push_back(t.content);
  }
  return out;
}

std::vector<Turn> normalize_turns(std::vector<Turn> turns) {
  std::vector<Turn> out;
  for (auto& t : turns) {
    if (text::is_blank(t.content)) continue;
    if (out.empty() && t.role == Speaker::assistant) continue;
    if (!out.empty() && out.back().role == t.role) {
      out.back().content += "\n" + t.content;
      continue;
    }
    out.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
  return out;
}

nlohmann::json to_json(const Conversation& c) {
  json j;
  j["conversation_id"] = c.conversation_id;
  j["user_id"] = c.user_id;
  j["source_model"] = c.source_model;
  j["turns"] = json::array();
  for (const auto& t : c.turns) j["turns"].push_back({{"role", to_string(t.role)}, {"content", t.content}});
  if (c.language) j["language"] = {{"code", c.language->code}, {"confidence", c.language->confidence}};
  if (c.tags) {
    j["tags"] = {{"domain", c.tags->domain},         {"task_type", c.tags->task_type},
                 {"complexity", c.tags->complexity}, {"engagement", c.tags->engagement},
                 {"depth", c.tags->depth},           {"quality_score", c.tags->quality_score}};
  }
  return j;
}

Conversation conversation_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw FormatError("record is not an object");
    Conversation c;
    c.conversation_id = j.at("conversation_id").get<std::string>();
    c.user_id = j.at("user_id").get<std::string>();
    c.source_model = j.value("source_model", std::string("unknown"));
    if (c.conversation_id.empty() || c.user_id.empty()) throw FormatError("empty id");
    std::vector<Turn> turns;
    for (const auto& t : j.at("turns")) {
      const auto role = t.at("role").get<std::string>();
      Speaker s;
      if (role == "user" || role == "human") {
        s = Speaker::user;
      } else if (role == "assistant" || role == "gpt" || role == "bot") {
        s = Speaker::assistant;
      } else {
        continue;  // system/tool messages carry no user behaviour
      }
      turns.push_back({s, t.at("content").get<std::string>(), 0});
    }
    c.turns = normalize_turns(std::move(turns));
    if (c.user_turn_count() == 0) throw FormatError("no user turns");
    if (j.contains("language") && !j["language"].is_null()) {
      const auto& l = j["language"];
      if (l.is_string()) {
        c.language = LanguageTag{l.get<std::string>(), 1.0};
      } else {
        c.language = LanguageTag{l.at("code").get<std::string>(), l.value("confidence", 1.0)};
      }
    }
    if (j.contains("tags") && !j["tags"].is_null()) {
      const auto& t = j["tags"];
      auto tags = ConversationTags::make(t.at("domain").get<std::string>(),
                                         t.value("task_type", std::string()), t.at("complexity").get<int>(),
                                         t.at("engagement").get<int>(), t.at("depth").get<int>());
      if (t.contains("quality_score") && t["quality_score"].get<int>() != tags.quality_score) {
        throw FormatError("quality_score does not equal component sum");
      }
      if (!tags.valid()) throw FormatError("tag scores out of range");
      c.tags = tags;
    }
    return c;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(e.what());
  }
}

ParsedCorpus parse_conversations(std::istream& in) {
  ParsedCorpus out;
  auto lines = read_json_lines(in);
  out.skipped = lines.skipped;
  for (const auto& r : lines.records) {
    try {
      out.conversations.push_back(conversation_from_json(r));
    } catch (const FormatError&) {
      ++out.skipped;
    }
  }
  if (out.conversations.empty()) throw FormatError("no valid conversation records");
  return out;
}

bool TrivialLexicon::is_trivial(const std::string& message) const {
  if (text::split_words(message).size() > max_words) return false;
  for (const auto& tok : text::word_tokens(message)) {
    if (words.count(tok)) return true;
  }
  return false;
}

Conversation trim_trivial_rounds(const Conversation& conv, const TrivialLexicon& lexicon) {
  Conversation out = conv;
  out.turns.clear();
  for (std::size_t i = 0; i < conv.turns.size(); ++i) {
    const auto& t = conv.turns[i];
    if (t.role == Speaker::user && lexicon.is_trivial(t.content)) {
      if (i + 1 < conv.turns.size() && conv.turns[i + 1].role == Speaker::assistant) ++i;
      continue;
    }
    out.turns.push_back(t);
  }
  for (std::size_t i = 0; i < out.turns.size(); ++i) out.turns[i].index = static_cast<int>(i);
  return out;
}

namespace {

void sort_by_id(std::vector<Conversation>& v) {
  std::sort(v.begin(), v.end(),
            [](const Conversation& a, const Conversation& b) { return a.conversation_id < b.conversation_id; });
}

}  // namespace

std::vector<Conversation> filter_stage1(const std::vector<Conversation>& convs, const LanguageScorer& scorer,
                                        int min_turns, const std::string& lang, double min_confidence) {
  std::vector<Conversation> out;
  for (const auto& c : convs) {
    if (static_cast<int>(c.turns.size()) < min_turns) continue;
    auto tag = scorer(c);
    if (tag.code != lang || tag.confidence < min_confidence) continue;
    auto kept = c;
    kept.language = tag;
    out.push_back(std::move(kept));
  }
  sort_by_id(out);
  return out;
}

std::vector<Conversation> filter_stage2(const std::vector<Conversation>& convs, const std::string& required_model,
                                        int min_substantive_turns, const TrivialLexicon& lexicon) {
  std::vector<Conversation> out;
  for (const auto& c : convs) {
    if (c.source_model != required_model) continue;
    auto trimmed = trim_trivial_rounds(c, lexicon);
    if (static_cast<int>(trimmed.user_turn_count()) < min_substantive_turns) continue;
    out.push_back(std::move(trimmed));
  }
  sort_by_id(out);
  return out;
}

std::string tagging_prompt(const Conversation& conv) {
  std::string p =
      "Classify the conversation below and rate it.\n"
      "Reply with a single JSON object with keys:\n"
      "  \"domain\": short subject area (e.g. \"Software Development\", \"Medical & Health\"),\n"
      "  \"task_type\": what the user asks for (e.g. \"Question Answering\", \"Code Development\"),\n"
      "  \"complexity\": integer 1-5, how demanding the task is,\n"
      "  \"engagement\": integer 1-5, how actively the user drives the dialogue,\n"
      "  \"depth\": integer 1-5, how far the conversation develops the topic.\n\n"
      "<conversation>\n";
  for (const auto& t : conv.turns) {
    p += (t.role == Speaker::user ? "USER: " : "ASSISTANT: ") + t.content + "\n";
  }
  p += "</conversation>";
  return p;
}

ConversationTags parse_tags_reply(const std::string& reply) {
  auto j = extract_json_object(reply);
  auto get_int = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer()) throw ParseError(std::string("missing integer ") + key);
    int v = j[key].get<int>();
    if (v < 1 || v > 5) throw ParseError(std::string(key) + " out of range 1-5");
    return v;
  };
  std::string domain = j.value("domain", std::string());
  std::string task = j.contains("task_type") ? j.value("task_type", std::string()) : j.value("task", std::string());
  if (domain.empty()) throw ParseError("missing domain");
  if (task.empty()) throw ParseError("missing task_type");
  return ConversationTags::make(domain, task, get_int("complexity"), get_int("engagement"), get_int("depth"));
}

ConversationTags tag_conversation(const Conversation& conv, Gateway& gateway, const TaggingOptions& options) {
  ChatRequest req;
  req.purpose = "tag";
  req.model_name = options.model;
  req.temperature = options.temperature;
  req.max_output = 256;
  req.messages = {{Role::system, "You annotate chat logs for a research corpus. Answer with JSON only."},
                  {Role::user, tagging_prompt(conv)}};
  return complete_structured<TagParseError>(
      gateway, req, parse_tags_reply,
      "Reply again with only the JSON object. complexity, engagement and depth must be integers from 1 to 5.");
}

void CurationPolicy::validate() const {
  if (per_domain_cap < 1 || per_task_cap < 1 || per_user_cap < 1 || min_domain_count < 1) {
    throw InvalidRequest("curation caps must be >= 1");
  }
}

CurationPolicy CurationPolicy::from_json(const nlohmann::json& j) {
  CurationPolicy p;
  p.per_domain_cap = j.value("per_domain_cap", p.per_domain_cap);
  p.per_task_cap = j.value("per_task_cap", p.per_task_cap);
  p.per_user_cap = j.value("per_user_cap", p.per_user_cap);
  p.min_domain_count = j.value("min_domain_count", p.min_domain_count);
  if (j.contains("excluded_domains")) p.excluded_domains = j["excluded_domains"].get<std::set<std::string>>();
  if (j.contains("excluded_task_types")) {
    p.excluded_task_types = j["excluded_task_types"].get<std::set<std::string>>();
  }
  p.validate();
  return p;
}

bool quality_order(const Conversation& a, const Conversation& b) {
  const int qa = a.tags ? a.tags->quality_score : 0;
  const int qb = b.tags ? b.tags->quality_score : 0;
  if (qa != qb) return qa > qb;
  return a.conversation_id < b.conversation_id;
}

std::vector<Conversation> curate(const std::vector<Conversation>& convs, const CurationPolicy& policy) {
  policy.validate();
  std::vector<Conversation> pool;
  for (const auto& c : convs) {
    if (!c.tags) continue;
    if (policy.excluded_domains.count(c.tags->domain)) continue;
    if (policy.excluded_task_types.count(c.tags->task_type)) continue;
    pool.push_back(c);
  }
  std::sort(pool.begin(), pool.end(), quality_order);

  // Alternate the minimum-count filter and the caps until neither removes
  // anything, so a second pass over the output is the identity.
  while (true) {
    const auto before = pool.size();
    std::map<std::string, int> domain_count;
    for (const auto& c : pool) ++domain_count[c.tags->domain];
    std::erase_if(pool, [&](const Conversation& c) { return domain_count[c.tags->domain] < policy.min_domain_count; });

    std::map<std::string, int> per_domain, per_task, per_user;
    std::vector<Conversation> kept;
    for (auto& c : pool) {
      if (per_domain[c.tags->domain] >= policy.per_domain_cap) continue;
      if (per_task[c.tags->task_type] >= policy.per_task_cap) continue;
      if (per_user[c.user_id] >= policy.per_user_cap) continue;
      ++per_domain[c.tags->domain];
      ++per_task[c.tags->task_type];
      ++per_user[c.user_id];
      kept.push_back(std::move(c));
    }
    pool = std::move(kept);
    if (pool.size() == before) break;
  }
  return pool;
}

}  // namespace groundsim
