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

#include "groundsim/persona.hpp"

#include "groundsim/structured.hpp"
#include "groundsim/text.hpp"

#include <regex>

namespace groundsim {

namespace {

using json = nlohmann::json;

constexpr std::string_view kOverrideHeader =
    "CRITICAL: You MUST adopt the following real user's communication style for ALL your messages. "
    "This takes HIGHEST priority --- every message you write must follow these style rules, even "
    "while completing the scenario above. The scenario tells you WHAT to say; the persona tells you "
    "HOW to say it.";

constexpr std::string_view kOverrideFooter =
    "Remember: Follow the scenario instructions for content and task flow, but express everything "
    "using this persona's writing style. If the persona uses lowercase, you use lowercase. If the "
    "persona omits punctuation, you omit punctuation. If the persona writes short terse messages, you "
    "write short terse messages. Never fall back to generic polite assistant-like language.";

constexpr std::string_view kDemographicsHeading = "Demographics:";
constexpr std::string_view kBackgroundPrefix = "Additional background: ";
constexpr std::string_view kStyleHeading = "Communication Style Instructions:";

// Display order of demographic lines.
constexpr std::array<DemographicField, 7> kPersonaFieldOrder{
    DemographicField::age,        DemographicField::education,      DemographicField::location,
    DemographicField::gender,     DemographicField::occupation,     DemographicField::marital_status,
    DemographicField::income};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string single_line(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::vector<std::string> parse_quoted_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '"') {
      ++i;
      continue;
    }
    std::string cur;
    ++i;
    while (i < s.size() && s[i] != '"') {
      if (s[i] == '\\' && i + 1 < s.size()) ++i;
      cur += s[i++];
    }
    ++i;
    out.push_back(std::move(cur));
  }
  return out;
}

}  // namespace

std::string ScenarioSplit::scenario_text() const {
  if (user_background && !user_background->empty()) return "User background: " + *user_background + "\n\n" + task_only;
  return task_only;
}

std::set<std::string> identifier_tokens(std::string_view text, const std::vector<std::string>& names) {
  static const std::regex code(R"(\b[A-Z0-9]{5,}\b)");
  static const std::regex snake(R"(\b[a-z]+(?:_[a-z]+)*_[0-9]+\b)");
  static const std::regex email(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})");
  std::set<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), code); it != std::sregex_iterator(); ++it) {
    const std::string tok = it->str();
    if (tok.find_first_of("0123456789") != std::string::npos) out.insert(tok);
  }
  for (const auto* re : {&snake, &email}) {
    for (auto it = std::sregex_iterator(s.begin(), s.end(), *re); it != std::sregex_iterator(); ++it) out.insert(it->str());
  }
  for (const auto& n : names) {
    if (!n.empty() && s.find(n) != std::string::npos) out.insert(n);
  }
  return out;
}

std::string separation_prompt(const std::string& scenario, const std::optional<std::string>& structured_persona) {
  std::string p =
      "Split the user-simulation scenario below into two parts.\n"
      "task_only: every fact needed to complete the task: booking numbers, order ids, user names, "
      "desired outcomes and procedural steps. Keep identifiers exactly as written. Rewrite mixed "
      "sentences so the factual part stays (\"Be insistent about getting a full refund\" keeps "
      "\"You want a full refund\").\n"
      "directives: tone, emotion and interaction-style instructions (\"be insistent\", \"express "
      "frustration\"), one short phrase each. Use an empty list when there are none.\n";
  if (structured_persona) {
    p += "user_background: factual user context from the persona description below (no tone or style).\n";
  }
  p += "Reply with JSON only: {\"task_only\": \"...\", \"directives\": [\"...\"]";
  if (structured_persona) p += ", \"user_background\": \"...\"";
  p += "}\n\n<scenario>\n" + scenario + "\n</scenario>";
  if (structured_persona) p += "\n\n<persona>\n" + *structured_persona + "\n</persona>";
  return p;
}

ScenarioSplit separate_directives(const std::string& scenario, Gateway& gateway, const SeparationOptions& options) {
  if (text::is_blank(scenario)) throw InvalidRequest("empty scenario");
  const auto required = identifier_tokens(scenario, options.declared_names);

  auto parse = [&](const std::string& reply) {
    auto j = extract_json_object(reply);
    if (!j.contains("task_only") || !j["task_only"].is_string()) throw ParseError("missing task_only");
    ScenarioSplit split;
    split.task_only = text::trim(j["task_only"].get<std::string>());
    if (split.task_only.empty()) throw ParseError("empty task_only");
    if (j.contains("directives") && j["directives"].is_array()) {
      for (const auto& d : j["directives"]) {
        if (d.is_string() && !text::is_blank(d.get<std::string>())) split.directives.push_back(text::trim(d.get<std::string>()));
      }
    }
    if (options.structured_persona) {
      std::string bg = j.value("user_background", std::string());
      split.user_background = text::is_blank(bg) ? text::trim(*options.structured_persona) : text::trim(bg);
    }
    return split;
  };
  auto missing_ids = [&](const ScenarioSplit& split) {
    std::vector<std::string> lost;
    for (const auto& id : required) {
      if (split.task_only.find(id) == std::string::npos) lost.push_back(id);
    }
    return lost;
  };

  ChatRequest req;
  req.purpose = "separate";
  req.model_name = options.model;
  req.temperature = options.temperature;
  req.max_output = 1024;
  req.messages = {{Role::system, "You separate task facts from behavioural directives. Answer with JSON only."},
                  {Role::user, separation_prompt(scenario, options.structured_persona)}};

  auto first = gateway.complete(req);
  std::string complaint;
  try {
    auto split = parse(first.content);
    auto lost = missing_ids(split);
    if (lost.empty()) return split;
    complaint = "task_only dropped these identifiers: " + text::join(lost, ", ") + ". Copy them exactly.";
  } catch (const ParseError& e) {
    complaint = std::string("the reply could not be parsed: ") + e.what();
  }
  req.messages.push_back({Role::assistant, first.content});
  req.messages.push_back({Role::user, "Reply again with only the JSON object; " + complaint});
  auto second = gateway.complete(req);
  auto split = parse(second.content);  // ParseError propagates
  auto lost = missing_ids(split);
  if (!lost.empty()) throw LeakageError("identifiers lost in separation: " + text::join(lost, ", "));
  return split;
}

PersonaBlock format_persona(const UserProfile& profile) {
  PersonaBlock block;
  std::vector<std::string> sections;
  if (!profile.demographics.fields.empty()) {
    std::string s(kDemographicsHeading);
    for (auto f : kPersonaFieldOrder) {
      if (const auto* v = profile.demographics.get(f)) {
        s += "\n- " + display_label(f) + ": " + single_line(v->value) + " (source: " + to_string(v->source) + ")";
      }
    }
    sections.push_back(std::move(s));
    block.sections_present.insert(PersonaSection::demographics);
  }
  if (profile.background && !text::is_blank(*profile.background)) {
    sections.push_back(std::string(kBackgroundPrefix) + text::trim(*profile.background));
    block.sections_present.insert(PersonaSection::background);
  }
  if (!profile.manual.commands.empty()) {
    std::string s(kStyleHeading);
    for (std::size_t i = 0; i < profile.manual.commands.size(); ++i) {
      const auto& cmd = profile.manual.commands[i];
      s += i == 0 ? "\n" : "\n\n";
      s += "Command: " + single_line(cmd.command);
      if (!cmd.examples.empty()) {
        s += "\nExamples: ";
        for (std::size_t k = 0; k < cmd.examples.size(); ++k) {
          if (k) s += ", ";
          s += quote(single_line(cmd.examples[k].quote));
        }
      }
    }
    sections.push_back(std::move(s));
    block.sections_present.insert(PersonaSection::style);
  }
  block.rendered = text::join(sections, "\n\n");
  return block;
}

ParsedPersona parse_persona(std::string_view rendered) {
  ParsedPersona out;
  const std::string s(rendered);
  auto style_at = s.find(std::string(kStyleHeading));
  const std::string head = style_at == std::string::npos ? s : s.substr(0, style_at);

  if (text::starts_with(head, kDemographicsHeading)) {
    for (const auto& line : text::split_lines(head)) {
      if (!text::starts_with(line, "- ")) continue;
      auto colon = line.find(": ");
      auto src = line.rfind(" (source: ");
      if (colon == std::string::npos || src == std::string::npos || src < colon) continue;
      const std::string label = line.substr(2, colon - 2);
      const std::string value = line.substr(colon + 2, src - colon - 2);
      const std::string source = line.substr(src + 10, line.size() - src - 11);
      for (auto f : kDemographicFields) {
        if (display_label(f) == label) {
          out.demographics.push_back(
              {f, FieldValue{value, source == "inferred" ? ValueSource::inferred : ValueSource::extracted, 0}});
        }
      }
    }
  }
  if (auto bg = head.find(std::string(kBackgroundPrefix)); bg != std::string::npos) {
    std::string rest = head.substr(bg + kBackgroundPrefix.size());
    out.background = text::trim(rest);
  }
  if (style_at != std::string::npos) {
    for (const auto& line : text::split_lines(s.substr(style_at))) {
      if (text::starts_with(line, "Command: ")) {
        out.commands.push_back({line.substr(9), {}});
      } else if (text::starts_with(line, "Examples: ") && !out.commands.empty()) {
        out.commands.back().second = parse_quoted_list(std::string_view(line).substr(10));
      }
    }
  }
  return out;
}

std::string simulation_guidelines(GuidelineMode mode) {
  std::string g =
      "You are simulating a human user who is chatting with an AI assistant. Stay in the role of the "
      "user for the whole conversation and never act as the assistant.\n\n"
      "Goal pursuit:\n"
      "- Work toward the goal described in the scenario. Bring up details when they become relevant, "
      "the way a real user would, and do not invent facts the scenario does not give you.\n"
      "- Do not solve the task yourself or tell the assistant how to solve it.\n\n"
      "Turn taking:\n"
      "- Write exactly one user message per turn, then stop and wait for the reply.\n"
      "- React to what the assistant just said before moving on.\n\n";
  if (mode == GuidelineMode::grounded) {
    g +=
        "Writing:\n"
        "- Write like a real person typing into a chat box, not like an assistant. "
        "Do not 'clean up' the writing. If the commands require poor grammar and frequent typos, your "
        "response must be equally messy.\n\n";
  }
  g += "Ending:\n- When the goal is met, or it clearly cannot be met, send your last message with ";
  g += kTerminationToken;
  g += " alone on its final line.";
  return g;
}

std::string persona_override_block(const PersonaBlock& persona) {
  std::string s(kPersonaOpen);
  s += "\n";
  s += kOverrideHeader;
  s += "\n\n" + persona.rendered + "\n\n";
  s += kOverrideFooter;
  s += "\n";
  s += kPersonaClose;
  return s;
}

PromptBundle assemble_prompt(const std::string& guidelines, const ScenarioSplit& split,
                             const std::optional<PersonaBlock>& persona) {
  PromptBundle b;
  b.system_prompt = guidelines + "\n\n" + std::string(kScenarioOpen) + "\n" + split.scenario_text() + "\n" +
                    std::string(kScenarioClose);
  b.condition = PromptCondition::baseline_np;
  if (persona) {
    b.system_prompt += "\n\n" + persona_override_block(*persona);
    b.condition = PromptCondition::with_persona;
  }
  return b;
}

PromptBundle assemble_original_prompt(const std::string& guidelines, const std::string& raw_scenario) {
  return {guidelines + "\n\n" + std::string(kScenarioOpen) + "\n" + raw_scenario + "\n" + std::string(kScenarioClose),
          PromptCondition::original};
}

}  // namespace groundsim
