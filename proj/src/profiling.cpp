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

#include "groundsim/profiling.hpp"

#include "groundsim/report_math.hpp"
#include "groundsim/structured.hpp"
#include "groundsim/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace groundsim {

namespace {

using json = nlohmann::json;

std::string fold(std::string_view s) {
  std::string out = text::to_lower(text::collapse_whitespace(text::nfc(s)));
  // Curly apostrophes show up in model replies ("bachelor’s degree").
  for (std::size_t pos; (pos = out.find("\xe2\x80\x99")) != std::string::npos;) out.replace(pos, 3, "'");
  return out;
}

bool quote_in_turns(const std::string& needle_form, const Conversation& conv) {
  if (needle_form.empty()) return false;
  for (const auto& t : conv.turns) {
    if (t.role == Speaker::user && text::match_form(t.content).find(needle_form) != std::string::npos) return true;
  }
  return false;
}

std::string render_user_messages(const std::vector<Conversation>& convs) {
  std::string out;
  for (const auto& c : convs) {
    for (const auto& t : c.turns) {
      if (t.role == Speaker::user) out += "[" + c.conversation_id + "] " + t.content + "\n";
    }
  }
  return out;
}

}  // namespace

std::string to_string(StyleDimension d) {
  switch (d) {
    case StyleDimension::capitalization: return "capitalization";
    case StyleDimension::punctuation: return "punctuation";
    case StyleDimension::message_length: return "message_length";
    case StyleDimension::formality: return "formality";
    case StyleDimension::technical_register: return "technical_register";
    case StyleDimension::greeting: return "greeting";
    case StyleDimension::emoticon: return "emoticon";
    case StyleDimension::intent_density: return "intent_density";
  }
  return "formality";
}

StyleDimension style_dimension_from_string(const std::string& raw) {
  std::string s = text::to_lower(text::trim(raw));
  std::replace(s.begin(), s.end(), ' ', '_');
  std::replace(s.begin(), s.end(), '-', '_');
  for (auto d : kStyleDimensions) {
    if (s == to_string(d)) return d;
  }
  if (s == "capitalisation" || s == "casing") return StyleDimension::capitalization;
  if (s == "length") return StyleDimension::message_length;
  if (s == "technical" || s == "register") return StyleDimension::technical_register;
  if (s == "greetings" || s == "greeting_patterns") return StyleDimension::greeting;
  if (s == "emoji" || s == "emoticons" || s == "emoticon/emoji" || s == "emoticon_emoji") return StyleDimension::emoticon;
  if (s == "intent" || s == "density") return StyleDimension::intent_density;
  throw ParseError("unknown style dimension: " + raw);
}

std::string to_string(DemographicField f) {
  switch (f) {
    case DemographicField::age: return "age";
    case DemographicField::education: return "education";
    case DemographicField::gender: return "gender";
    case DemographicField::occupation: return "occupation";
    case DemographicField::marital_status: return "marital_status";
    case DemographicField::income: return "income";
    case DemographicField::location: return "location";
  }
  return "age";
}

DemographicField demographic_field_from_string(const std::string& raw) {
  std::string s = text::to_lower(text::trim(raw));
  std::replace(s.begin(), s.end(), ' ', '_');
  for (auto f : kDemographicFields) {
    if (s == to_string(f)) return f;
  }
  if (s == "marital") return DemographicField::marital_status;
  throw ParseError("unknown demographic field: " + raw);
}

std::string display_label(DemographicField f) {
  switch (f) {
    case DemographicField::age: return "Age";
    case DemographicField::education: return "Education";
    case DemographicField::gender: return "Gender";
    case DemographicField::occupation: return "Occupation";
    case DemographicField::marital_status: return "Marital Status";
    case DemographicField::income: return "Income";
    case DemographicField::location: return "Location";
  }
  return "";
}

std::string to_string(ValueSource s) { return s == ValueSource::extracted ? "extracted" : "inferred"; }

bool CategoryLists::is_categorical(DemographicField f) const {
  return f == DemographicField::age || f == DemographicField::education || f == DemographicField::income;
}

std::optional<std::string> CategoryLists::canonicalize(DemographicField f, const std::string& value) const {
  const std::string trimmed = text::trim(value);
  if (trimmed.empty()) return std::nullopt;
  if (!is_categorical(f)) return trimmed;
  const auto& list = f == DemographicField::age ? age : f == DemographicField::education ? education : income;
  const std::string key = fold(trimmed);
  for (const auto& cat : list) {
    if (fold(cat) == key) return cat;
  }
  return std::nullopt;
}

const CategoryLists& CategoryLists::defaults() {
  static const CategoryLists lists;
  return lists;
}

const FieldValue* DemographicRecord::get(DemographicField f) const {
  auto it = fields.find(f);
  return it == fields.end() ? nullptr : &it->second;
}

void DemographicRecord::recompute_completeness() {
  completeness = static_cast<double>(fields.size()) / static_cast<double>(kDemographicFields.size());
}

void UserProfile::validate() const {
  if (manual.commands.empty()) throw InvalidRequest("profile " + user_id + " has no commands");
  if (manual.commands.size() > kMaxCommands) throw InvalidRequest("profile " + user_id + " has too many commands");
  const std::set<std::string> ids(conversation_ids.begin(), conversation_ids.end());
  for (const auto& cmd : manual.commands) {
    for (const auto& ex : cmd.examples) {
      if (!ids.count(ex.source_conversation_id)) {
        throw InvalidRequest("example source " + ex.source_conversation_id + " missing from conversation_ids");
      }
    }
  }
}

json to_json(const DemographicRecord& r) {
  json j = json::object();
  for (const auto& [f, v] : r.fields) {
    j[to_string(f)] = {{"value", v.value}, {"source", to_string(v.source)}, {"supporting_count", v.supporting_count}};
  }
  return j;
}

DemographicRecord demographics_from_json(const json& j) {
  DemographicRecord r;
  for (const auto& [key, v] : j.items()) {
    FieldValue fv;
    fv.value = v.at("value").get<std::string>();
    fv.source = v.value("source", std::string("extracted")) == "inferred" ? ValueSource::inferred : ValueSource::extracted;
    fv.supporting_count = v.value("supporting_count", 0);
    r.fields[demographic_field_from_string(key)] = fv;
  }
  r.recompute_completeness();
  return r;
}

json to_json(const UserProfile& p) {
  json j;
  j["user_id"] = p.user_id;
  j["commands"] = json::array();
  for (const auto& c : p.manual.commands) {
    json ex = json::array();
    for (const auto& e : c.examples) ex.push_back({{"quote", e.quote}, {"source_conversation_id", e.source_conversation_id}});
    j["commands"].push_back({{"command", c.command}, {"dimension", to_string(c.dimension)}, {"examples", ex}});
  }
  j["demographics"] = to_json(p.demographics);
  j["demographic_consistency"] = p.demographics.consistency;
  if (p.background) j["background"] = *p.background;
  j["conversation_ids"] = p.conversation_ids;
  return j;
}

UserProfile profile_from_json(const json& j) {
  UserProfile p;
  p.user_id = j.at("user_id").get<std::string>();
  p.manual.user_id = p.user_id;
  for (const auto& c : j.at("commands")) {
    StyleCommand cmd;
    cmd.command = c.at("command").get<std::string>();
    cmd.dimension = style_dimension_from_string(c.value("dimension", std::string("formality")));
    for (const auto& e : c.value("examples", json::array())) {
      cmd.examples.push_back({e.at("quote").get<std::string>(), e.at("source_conversation_id").get<std::string>()});
    }
    p.manual.commands.push_back(std::move(cmd));
  }
  p.demographics = demographics_from_json(j.value("demographics", json::object()));
  p.demographics.consistency = j.value("demographic_consistency", 1.0);
  if (j.contains("background") && j["background"].is_string()) p.background = j["background"].get<std::string>();
  p.conversation_ids = j.value("conversation_ids", std::vector<std::string>{});
  return p;
}

json to_json(const FieldMention& m) {
  return {{"field", to_string(m.field)}, {"value", m.value}, {"conversation_id", m.conversation_id}, {"evidence", m.evidence}};
}

FieldMention mention_from_json(const json& j) {
  return {demographic_field_from_string(j.at("field").get<std::string>()), j.at("value").get<std::string>(),
          j.value("conversation_id", std::string()), j.value("evidence", std::string())};
}

// --- style manual ---------------------------------------------------------

std::string style_prompt(const std::vector<Conversation>& user_convs) {
  std::string p =
      "Below are every message one user wrote, each prefixed by its conversation id.\n"
      "Write an executable style manual for imitating this user: up to 15 imperative commands, "
      "each paired with 1-3 example quotes copied character for character from the messages.\n"
      "Cover these dimensions: capitalization, punctuation, message_length, formality, "
      "technical_register, greeting, emoticon, intent_density.\n"
      "Reply with JSON only:\n"
      "{\"commands\": [{\"command\": \"...\", \"dimension\": \"<one of the dimensions>\", "
      "\"examples\": [\"exact quote\", ...]}]}\n\n"
      "<messages>\n";
  p += render_user_messages(user_convs);
  p += "</messages>";
  return p;
}

namespace {

std::vector<StyleCommand> parse_style_reply(const std::string& reply) {
  auto j = extract_json_object(reply);
  if (!j.contains("commands") || !j["commands"].is_array()) throw ParseError("missing commands array");
  std::vector<StyleCommand> out;
  for (const auto& c : j["commands"]) {
    if (out.size() == kMaxCommands) break;
    if (!c.is_object() || !c.contains("command") || !c["command"].is_string()) throw ParseError("command entry malformed");
    StyleCommand cmd;
    cmd.command = text::trim(c["command"].get<std::string>());
    if (cmd.command.empty()) throw ParseError("empty command text");
    cmd.dimension = style_dimension_from_string(c.value("dimension", std::string("formality")));
    for (const auto& e : c.value("examples", json::array())) {
      if (e.is_string()) {
        cmd.examples.push_back({e.get<std::string>(), ""});
      } else if (e.is_object() && e.contains("quote")) {
        cmd.examples.push_back({e["quote"].get<std::string>(), ""});
      }
    }
    out.push_back(std::move(cmd));
  }
  if (out.empty()) throw ParseError("no commands");
  return out;
}

}  // namespace

PersonaManual verify_manual(const std::string& user_id, std::vector<StyleCommand> parsed,
                            const std::vector<Conversation>& user_convs) {
  if (parsed.size() > kMaxCommands) parsed.resize(kMaxCommands);
  PersonaManual manual;
  manual.user_id = user_id;
  for (auto& cmd : parsed) {
    std::vector<StyleExample> kept;
    for (auto& ex : cmd.examples) {
      const std::string form = text::match_form(ex.quote);
      for (const auto& conv : user_convs) {
        if (quote_in_turns(form, conv)) {
          kept.push_back({text::trim(ex.quote), conv.conversation_id});
          break;
        }
      }
    }
    if (kept.empty()) continue;
    cmd.examples = std::move(kept);
    manual.commands.push_back(std::move(cmd));
  }
  if (manual.commands.empty()) throw EmptyManual("every command for " + user_id + " failed verbatim verification");
  return manual;
}

PersonaManual extract_style_profile(const std::vector<Conversation>& user_convs, Gateway& gateway,
                                    const ProfilingOptions& options) {
  if (user_convs.empty()) throw InvalidRequest("no conversations for style extraction");
  const std::string& user_id = user_convs.front().user_id;
  for (const auto& c : user_convs) {
    if (c.user_id != user_id) throw InvalidRequest("conversations belong to different users");
  }
  ChatRequest req;
  req.purpose = "style";
  req.model_name = options.model;
  req.temperature = options.temperature;
  req.max_output = 2048;
  req.messages = {{Role::system, "You are a computational linguist who profiles how individual people write."},
                  {Role::user, style_prompt(user_convs)}};
  auto parsed = complete_structured<ManualParseError>(
      gateway, req, parse_style_reply,
      "Reply again with only the JSON object described above; every command needs a dimension from the list.");
  return verify_manual(user_id, std::move(parsed), user_convs);
}

// --- demographic extraction -----------------------------------------------

std::string demographic_extraction_prompt(const Conversation& conv) {
  const auto& cats = CategoryLists::defaults();
  std::string p =
      "Find explicit self-disclosures of demographic facts by the USER in the conversation below. "
      "Only report what the user states about themself; do not guess.\n"
      "Fields: age, education, gender, occupation, marital_status, income, location.\n"
      "age must be one of: " + text::join(cats.age, ", ") + ".\n"
      "education must be one of: " + text::join(cats.education, ", ") + ".\n"
      "income must be one of: " + text::join(cats.income, ", ") + ".\n"
      "Reply with JSON only: {\"mentions\": [{\"field\": \"...\", \"value\": \"...\", "
      "\"evidence\": \"exact quote from the user\"}]}. Use an empty list when nothing is disclosed.\n\n"
      "<conversation>\n";
  for (const auto& t : conv.turns) p += (t.role == Speaker::user ? "USER: " : "ASSISTANT: ") + t.content + "\n";
  p += "</conversation>";
  return p;
}

std::vector<FieldMention> extract_demographic_mentions(const Conversation& conv, Gateway& gateway,
                                                       const ProfilingOptions& options) {
  ChatRequest req;
  req.purpose = "demo_extract";
  req.model_name = options.model;
  req.temperature = options.temperature;
  req.max_output = 512;
  req.messages = {{Role::system, "You extract demographic self-disclosures from chat logs. Answer with JSON only."},
                  {Role::user, demographic_extraction_prompt(conv)}};
  auto parse = [&](const std::string& reply) {
    auto j = extract_json_object(reply);
    if (!j.contains("mentions") || !j["mentions"].is_array()) throw ParseError("missing mentions array");
    std::vector<FieldMention> out;
    for (const auto& m : j["mentions"]) {
      if (!m.is_object() || !m.contains("field") || !m.contains("value") || !m["value"].is_string()) continue;
      DemographicField field;
      try {
        field = demographic_field_from_string(m["field"].get<std::string>());
      } catch (const ParseError&) {
        continue;
      }
      auto value = options.categories.canonicalize(field, m["value"].get<std::string>());
      if (!value) continue;
      std::string evidence = m.value("evidence", std::string());
      if (!quote_in_turns(text::match_form(evidence), conv)) continue;
      out.push_back({field, *value, conv.conversation_id, evidence});
    }
    return out;
  };
  return complete_structured<MentionParseError>(gateway, req, parse,
                                                "Reply again with only the JSON object {\"mentions\": [...]}.");
}

DemographicRecord aggregate_demographics(const std::vector<FieldMention>& mentions) {
  // field -> folded value -> (votes, spellings)
  struct Tally {
    int votes = 0;
    std::set<std::string> spellings;
  };
  std::map<DemographicField, std::map<std::string, Tally>> by_field;
  std::map<DemographicField, int> mention_count;
  for (const auto& m : mentions) {
    auto& t = by_field[m.field][fold(m.value)];
    ++t.votes;
    t.spellings.insert(text::trim(m.value));
    ++mention_count[m.field];
  }
  DemographicRecord rec;
  int multi = 0;
  int agreeing = 0;
  for (const auto& [field, tallies] : by_field) {
    if (mention_count[field] >= 2) {
      ++multi;
      if (tallies.size() == 1) ++agreeing;
    }
    int best = 0;
    int best_count = 0;
    const Tally* winner = nullptr;
    for (const auto& [_, t] : tallies) {
      if (t.votes > best) {
        best = t.votes;
        best_count = 1;
        winner = &t;
      } else if (t.votes == best) {
        ++best_count;
      }
    }
    if (winner && best_count == 1) {
      rec.fields[field] = FieldValue{*winner->spellings.begin(), ValueSource::extracted, best};
    }
  }
  rec.consistency = multi == 0 ? 1.0 : static_cast<double>(agreeing) / static_cast<double>(multi);
  rec.recompute_completeness();
  return rec;
}

// --- demographic inference ------------------------------------------------

std::string demographic_inference_prompt(const std::vector<Conversation>& user_convs,
                                         const std::vector<DemographicField>& fields, const CategoryLists& categories) {
  std::string p =
      "Estimate the following demographic attributes of the user from indirect cues in their messages "
      "(vocabulary, topics, circumstances they mention). Only answer when the evidence is strong; "
      "otherwise answer \"unknown\". Abstaining is always better than guessing.\n";
  for (auto f : fields) {
    p += "- " + to_string(f);
    if (f == DemographicField::age) p += " (one of: " + text::join(categories.age, ", ") + ")";
    if (f == DemographicField::education) p += " (one of: " + text::join(categories.education, ", ") + ")";
    if (f == DemographicField::income) p += " (one of: " + text::join(categories.income, ", ") + ")";
    p += "\n";
  }
  p += "Reply with JSON only, one key per attribute listed above, e.g. {\"" + to_string(fields.front()) +
       "\": \"unknown\"}.\n\n<messages>\n";
  p += render_user_messages(user_convs);
  p += "</messages>";
  return p;
}

DemographicRecord infer_demographics(const std::vector<Conversation>& user_convs, const DemographicRecord& existing,
                                     Gateway& gateway, const ProfilingOptions& options) {
  std::vector<DemographicField> missing;
  for (auto f : kDemographicFields) {
    if (!existing.get(f)) missing.push_back(f);
  }
  DemographicRecord out = existing;
  if (missing.empty() || user_convs.empty()) {
    out.recompute_completeness();
    return out;
  }
  ChatRequest req;
  req.purpose = "demo_infer";
  req.model_name = options.model;
  req.temperature = options.temperature;
  req.max_output = 256;
  req.messages = {{Role::system, "You infer user demographics conservatively. Answer with JSON only."},
                  {Role::user, demographic_inference_prompt(user_convs, missing, options.categories)}};
  auto parse = [&](const std::string& reply) {
    auto j = extract_json_object(reply);
    std::map<DemographicField, std::string> got;
    for (auto f : missing) {
      auto it = j.find(to_string(f));
      if (it == j.end() || !it->is_string()) continue;
      const std::string v = text::trim(it->get<std::string>());
      if (v.empty() || fold(v) == "unknown") continue;
      if (auto canon = options.categories.canonicalize(f, v)) got[f] = *canon;
    }
    return got;
  };
  auto inferred = complete_structured<InferenceParseError>(
      gateway, req, parse, "Reply again with only a JSON object mapping each attribute to a value or \"unknown\".");
  for (const auto& [f, v] : inferred) out.fields[f] = FieldValue{v, ValueSource::inferred, 0};
  out.recompute_completeness();
  return out;
}

UserProfile consolidate_profile(const PersonaManual& manual, const DemographicRecord& extracted,
                                const DemographicRecord& inferred, std::optional<std::string> background,
                                std::vector<std::string> conversation_ids) {
  UserProfile p;
  p.user_id = manual.user_id;
  p.manual = manual;
  p.background = std::move(background);
  p.conversation_ids = std::move(conversation_ids);
  for (auto f : kDemographicFields) {
    const FieldValue* e = extracted.get(f);
    if (e && e->source != ValueSource::extracted) e = nullptr;
    const FieldValue* i = inferred.get(f);
    if (e) {
      if (i && i->source == ValueSource::extracted && fold(i->value) != fold(e->value)) {
        throw ConflictError("both sources claim an extracted " + to_string(f) + " with different values");
      }
      p.demographics.fields[f] = *e;
    } else if (i) {
      p.demographics.fields[f] = *i;
    }
  }
  p.demographics.consistency = extracted.consistency;
  p.demographics.recompute_completeness();
  p.validate();
  return p;
}

// --- validation -----------------------------------------------------------

AccuracyRow make_accuracy_row(std::string field, int test_cases, int inferred, int correct) {
  AccuracyRow r{std::move(field), test_cases, inferred, correct, std::nullopt};
  if (inferred > 0) r.accuracy = static_cast<double>(correct) / static_cast<double>(inferred);
  return r;
}

AccuracyTable validate_inference(const std::vector<ProfilePair>& pairs) {
  AccuracyTable table;
  int tc = 0, inf = 0, cor = 0;
  for (auto f : kDemographicFields) {
    int test_cases = 0, inferred = 0, correct = 0;
    for (const auto& pair : pairs) {
      const FieldValue* gold = pair.golden.get(f);
      if (!gold || gold->source != ValueSource::extracted) continue;
      ++test_cases;
      const FieldValue* guess = pair.inferred.get(f);
      if (!guess || guess->source != ValueSource::inferred) continue;
      ++inferred;
      if (fold(guess->value) == fold(gold->value)) ++correct;
    }
    table.rows.push_back(make_accuracy_row(display_label(f), test_cases, inferred, correct));
    tc += test_cases;
    inf += inferred;
    cor += correct;
  }
  table.overall = make_accuracy_row("Overall", tc, inf, cor);
  return table;
}

namespace {

std::vector<std::vector<std::string>> accuracy_rows(const AccuracyTable& t) {
  std::vector<std::vector<std::string>> rows{{"Field", "Test Cases", "Inferred", "Correct", "Accuracy"}};
  auto add = [&](const AccuracyRow& r) {
    rows.push_back({r.field, std::to_string(r.test_cases), std::to_string(r.inferred), std::to_string(r.correct),
                    r.accuracy ? format_percent(*r.accuracy) + "%" : "n/a"});
  };
  for (const auto& r : t.rows) add(r);
  add(t.overall);
  return rows;
}

}  // namespace

std::string AccuracyTable::render_text() const { return render_text_table(accuracy_rows(*this)); }
std::string AccuracyTable::render_tsv() const { return groundsim::render_tsv(accuracy_rows(*this)); }

}  // namespace groundsim
