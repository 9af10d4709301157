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

#include "groundsim/offline.hpp"

#include "groundsim/error.hpp"
#include "groundsim/harness.hpp"
#include "groundsim/jsonl.hpp"
#include "groundsim/metrics.hpp"
#include "groundsim/persona.hpp"
#include "groundsim/pt3.hpp"
#include "groundsim/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <regex>

namespace groundsim {

namespace {

std::optional<std::string> between(const std::string& s, std::string_view open, std::string_view close,
                                   std::size_t from = 0) {
  const auto a = s.find(open, from);
  if (a == std::string::npos) return std::nullopt;
  const auto b = s.find(close, a + open.size());
  if (b == std::string::npos) return std::nullopt;
  return s.substr(a + open.size(), b - a - open.size());
}

const std::string& last_user_content(const ChatRequest& req) {
  for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
    if (it->role == Role::user) return it->content;
  }
  static const std::string empty;
  return empty;
}

const std::string& system_content(const ChatRequest& req) {
  static const std::string empty;
  return !req.messages.empty() && req.messages.front().role == Role::system ? req.messages.front().content : empty;
}

// First request of a structured exchange; repair rounds re-ask the same prompt.
const std::string& first_user_content(const ChatRequest& req) {
  for (const auto& m : req.messages) {
    if (m.role == Role::user) return m.content;
  }
  static const std::string empty;
  return empty;
}

std::vector<std::string> sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    cur.push_back(text[i]);
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      auto t = text::trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    }
  }
  auto t = text::trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

std::string first_words(const std::string& s, std::size_t n) {
  auto words = text::split_words(s);
  if (words.size() > n) words.resize(n);
  return text::join(words, " ");
}

std::string clip(const std::string& s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return s;
  auto cut = s.rfind(' ', max_bytes);
  if (cut == std::string::npos || cut == 0) cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return s.substr(0, cut);
}

// Keyword match anchored at a word start ("delay" matches "delayed" but
// "story" does not match "history").
bool any_of_words(const std::string& lower, std::initializer_list<const char*> words) {
  return std::any_of(words.begin(), words.end(), [&](const char* w) {
    for (auto pos = lower.find(w); pos != std::string::npos; pos = lower.find(w, pos + 1)) {
      if (pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]))) return true;
    }
    return false;
  });
}

// --- style rewriting ------------------------------------------------------

std::set<std::string> traits_of(const std::vector<std::string>& commands) {
  std::set<std::string> on;
  if (commands.empty()) return on;
  UserProfile p;
  for (const auto& c : commands) p.manual.commands.push_back({c, {}, StyleDimension::formality});
  const auto& vocab = TraitVocabulary::default_vocabulary();
  const auto v = trait_vector(p, vocab);
  for (std::size_t i = 0; i < v.bits.size(); ++i) {
    if (v.bits[i]) on.insert(vocab.traits[i].name);
  }
  return on;
}

template <class Fn>
std::string map_words_outside_ids(const std::string& s, Fn&& fn) {
  const auto ids = identifier_tokens(s);
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isspace(static_cast<unsigned char>(s[i]))) {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    std::string word = s.substr(i, j - i);
    bool is_id = std::any_of(ids.begin(), ids.end(), [&](const std::string& id) { return word.find(id) != std::string::npos; });
    out += is_id ? word : fn(word);
    i = j;
  }
  return out;
}

std::string lower_ascii(std::string w) {
  for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return w;
}

std::string upper_ascii(std::string w) {
  for (auto& c : w) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return w;
}

std::string styled(const std::string& message, const std::set<std::string>& traits) {
  std::string m = message;
  if (traits.count("terse_messages") || traits.count("single_line") || traits.count("sentence_fragments")) {
    auto ss = sentences(m);
    if (ss.size() > 2) ss.resize(2);
    for (auto& s : ss) {
      const bool cut = text::split_words(s).size() > 5;
      s = first_words(s, 5);
      if (cut) {
        while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back()))) s.pop_back();
        s += ".";
      }
    }
    m = text::join(ss, " ");
  }
  if (traits.count("internet_speak")) {
    m = std::regex_replace(m, std::regex(R"(\b[Yy]ou\b)"), "u");
    m = std::regex_replace(m, std::regex(R"(\b[Pp]lease\b)"), "pls");
    m = std::regex_replace(m, std::regex(R"(\b[Tt]hanks\b)"), "thx");
  }
  if (traits.count("dropped_apostrophes")) m.erase(std::remove(m.begin(), m.end(), '\''), m.end());
  if (traits.count("no_terminal_punctuation")) {
    m = std::regex_replace(m, std::regex(R"([.!]+(\s|$))"), "$1");
    m = text::trim(m);
  }
  if (traits.count("all_caps")) {
    m = map_words_outside_ids(m, upper_ascii);
  } else if (traits.count("all_lowercase")) {
    m = map_words_outside_ids(m, lower_ascii);
  }
  if (traits.count("laughter")) m += " lol";
  if (traits.count("text_emoticons") || traits.count("emoji")) m += " :)";
  if (traits.count("greets") && !traits.count("no_greetings")) m = "hi " + m;
  return m;
}

std::string polished(const std::string& message, bool opening) {
  std::string m = text::trim(message);
  if (!m.empty()) m[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(m[0])));
  if (!m.empty() && !std::ispunct(static_cast<unsigned char>(m.back()))) m += ".";
  return opening ? "Hello! " + m + " Could you please help me with this? Thank you!" : m + " Thank you.";
}

std::vector<std::string> persona_commands(const std::string& system) {
  std::vector<std::string> out;
  auto block = between(system, kPersonaOpen, kPersonaClose);
  if (!block) return out;
  for (const auto& line : text::split_lines(*block)) {
    if (text::starts_with(line, "Command: ")) out.push_back(text::trim(line.substr(9)));
  }
  return out;
}

bool agreeable(const std::vector<std::string>& commands) {
  for (const auto& c : commands) {
    if (any_of_words(text::to_lower(c), {"hesitant", "agreeable", "accommodating", "accept", "go along", "defer", "filler"})) {
      return true;
    }
  }
  return false;
}

std::string first_person(std::string s) {
  s = std::regex_replace(s, std::regex(R"(\bYou are\b)"), "I am");
  s = std::regex_replace(s, std::regex(R"(\byou are\b)"), "I am");
  s = std::regex_replace(s, std::regex(R"(\bYour\b)"), "My");
  s = std::regex_replace(s, std::regex(R"(\byour\b)"), "my");
  s = std::regex_replace(s, std::regex(R"(\bYou\b)"), "I");
  s = std::regex_replace(s, std::regex(R"(\byou\b)"), "me");
  s = std::regex_replace(s, std::regex(R"(\bthe agent\b)"), "you");
  return s;
}

bool goal_sentence(const std::string& s) {
  for (const char* p : {"Your ", "You want", "You need", "You would like", "Do not ", "Don't "}) {
    if (text::starts_with(s, p)) return true;
  }
  return false;
}

// Simulated-user side effects of emotional directives left in the scenario.
std::string directive_flavour(const std::string& scenario_lower, std::string msg, bool opening) {
  if (scenario_lower.find("distraught") != std::string::npos) {
    msg = (opening ? "*sobbing* " : "") + msg + " I'm really upset.";
  }
  if (scenario_lower.find("frustration") != std::string::npos) msg += " This is ridiculous.";
  if (scenario_lower.find("impatient") != std::string::npos) msg += " Hurry up.";
  return msg;
}

std::string with_token(std::string msg) { return msg + "\n" + std::string(kTerminationToken); }

// --- simulator ------------------------------------------------------------

std::string simulate_user(const ChatRequest& req) {
  const auto& system = system_content(req);
  const std::string scenario = text::trim(between(system, kScenarioOpen, kScenarioClose).value_or(""));
  const auto commands = persona_commands(system);
  const auto traits = traits_of(commands);
  const bool has_persona = system.find(kPersonaOpen) != std::string::npos;

  std::vector<std::string> own;      // previous simulated-user messages
  std::string last_other;            // latest assistant reply, as seen by the simulator
  for (std::size_t i = 1; i < req.messages.size(); ++i) {
    if (req.messages[i].role == Role::assistant) own.push_back(req.messages[i].content);
    if (req.messages[i].role == Role::user) last_other = req.messages[i].content;
  }
  const bool opening = own.empty();
  auto finish = [&](const std::string& body) {
    std::string m = has_persona ? styled(body, traits) : polished(body, opening);
    return m;
  };

  const auto marker = scenario.find("\n\nYou are satisfied when:");
  if (marker != std::string::npos) {
    // Conversation-grounded task: replay the opening request, then one
    // follow-up per solution condition.
    const std::string desc = scenario.substr(0, marker);
    std::vector<std::string> follow_ups;
    for (const auto& line : text::split_lines(scenario.substr(marker))) {
      if (!text::starts_with(line, "- ")) continue;
      const auto q = between(line, "\"", "\"");
      follow_ups.push_back(q ? *q : first_person(line.substr(2)));
    }
    if (opening) {
      const auto q = between(desc, "\"", "\"");
      return finish(q ? *q : first_person(desc));
    }
    if (own.size() <= follow_ups.size()) return finish(follow_ups[own.size() - 1]);
    return with_token(finish("thanks, that's all"));
  }

  // Tool-desk task.
  const std::string lower_scenario = text::to_lower(scenario);
  std::vector<std::string> facts;
  for (const auto& s : sentences(scenario)) {
    if (goal_sentence(s)) facts.push_back(first_person(s));
  }
  if (facts.empty()) facts.push_back(first_person(first_words(scenario, 20)));
  const auto ids = identifier_tokens(scenario);
  std::string code;
  std::string uid;
  for (const auto& id : ids) {
    if (id.find('_') != std::string::npos) {
      uid = id;
    } else if (code.empty()) {
      code = id;
    }
  }

  if (opening) return finish(directive_flavour(lower_scenario, text::join(facts, " "), true));

  const std::string a = text::to_lower(last_other);
  if (a.find("user id") != std::string::npos && a.find('?') != std::string::npos) {
    return finish(directive_flavour(lower_scenario, "My user id is " + uid + ".", false));
  }
  if (a.find("would you like me to cancel") != std::string::npos || a.find("cancel it instead") != std::string::npos) {
    if (has_persona && agreeable(commands)) return finish("ahh yes please go ahead and cancel it");
    if (lower_scenario.find("insist") != std::string::npos) {
      const auto insisted = std::count_if(own.begin(), own.end(), [](const std::string& m) {
        return text::starts_with(text::to_lower(m), "no. i want") || text::starts_with(text::to_lower(m), "no i want");
      });
      if (insisted < 5) return finish(directive_flavour(lower_scenario, "No. I want a full refund for reservation " + code + ".", false));
      return with_token(finish("Fine, I give up."));
    }
    return with_token(finish("No, thank you."));
  }
  if (any_of_words(a, {"cancelled", "issued", "processed"})) return with_token(finish("Thanks, that's all."));
  return with_token(finish("No, that's all."));
}

// --- tool agent -----------------------------------------------------------

struct Executed {
  ToolCall call;
  std::string result;
};

std::string tool_call_text(const ToolCall& c) {
  return std::string(kToolCallOpen) + json{{"name", c.name}, {"arguments", c.arguments}}.dump() +
         std::string(kToolCallClose);
}

std::vector<std::string> reservation_codes(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& id : identifier_tokens(s)) {
    if (id.find('_') == std::string::npos && id.find('@') == std::string::npos) out.push_back(id);
  }
  return out;
}

bool shouted(const std::string& s) {
  int upper = 0, letters = 0;
  for (unsigned char c : s) {
    if (std::isalpha(c)) {
      ++letters;
      upper += std::isupper(c) != 0;
    }
  }
  return letters >= 10 && upper >= 0.6 * letters;
}

std::vector<std::string> active_from_listing(const std::string& listing) {
  std::vector<std::string> out;
  auto j = json::parse(listing, nullptr, false);
  if (!j.is_array()) return out;
  for (const auto& r : j) {
    if (r.value("status", std::string()) == "active") out.push_back(r.value("reservation_id", std::string()));
  }
  return out;
}

std::string tool_agent(const ChatRequest& req) {
  static const std::regex uid_re(R"(\b[a-z]+(?:_[a-z]+)*_[0-9]+\b)");
  std::string uid;
  std::size_t last_user = 0;
  for (std::size_t i = 1; i < req.messages.size(); ++i) {
    const auto& m = req.messages[i];
    if (m.role != Role::user || text::starts_with(m.content, kToolResultOpen)) continue;
    last_user = i;
    std::smatch sm;
    if (std::regex_search(m.content, sm, uid_re)) uid = sm.str();
  }
  if (last_user == 0) return "Hello, how can I help you today?";
  std::vector<Executed> done;
  for (std::size_t i = last_user + 1; i < req.messages.size(); ++i) {
    if (req.messages[i].role != Role::assistant) continue;
    const auto body = between(req.messages[i].content, kToolCallOpen, kToolCallClose);
    if (!body) continue;
    auto j = json::parse(*body, nullptr, false);
    Executed e;
    if (j.is_object()) {
      e.call.name = j.value("name", std::string());
      e.call.arguments = j.value("arguments", json::object());
    }
    if (i + 1 < req.messages.size()) {
      e.result = between(req.messages[i + 1].content, kToolResultOpen, kToolResultClose).value_or("");
    }
    done.push_back(std::move(e));
  }

  const std::string& m = req.messages[last_user].content;
  const std::string lower = text::to_lower(m);
  const auto codes = reservation_codes(m);
  auto call = [](std::string name, json args) { return tool_call_text({std::move(name), std::move(args)}); };
  auto pick = [&](const std::vector<ToolCall>& plan, const std::string& final_text) {
    if (done.size() < plan.size()) return tool_call_text(plan[done.size()]);
    return final_text;
  };
  auto cancels_of = [](const std::vector<std::string>& ids) {
    std::vector<ToolCall> plan;
    for (const auto& id : ids) plan.push_back({"cancel_reservation", {{"reservation_id", id}}});
    return plan;
  };

  if (shouted(m) && !codes.empty()) {
    return pick(cancels_of(codes), "I have cancelled reservation " + text::join(codes, ", ") + " as you asked.");
  }
  const bool wants_cancel = lower.find("cancel") != std::string::npos;
  if (wants_cancel && !codes.empty()) {
    return pick(cancels_of(codes), "Done: reservation " + text::join(codes, " and ") +
                                       " cancelled. The other reservations were not changed.");
  }
  if (uid.empty()) return "Could you share your user id so I can look up your reservations?";
  if (wants_cancel) {
    if (done.empty()) return call("list_reservations", {{"user_id", uid}});
    const auto active = active_from_listing(done.front().result);
    std::vector<ToolCall> plan{done.front().call};
    for (auto& c : cancels_of(active)) plan.push_back(c);
    return pick(plan, active.empty() ? "There are no active reservations to cancel."
                                     : "All reservations on your profile have been cancelled: " +
                                           text::join(active, ", ") + ".");
  }
  if (any_of_words(lower, {"compensation", "delay"})) {
    return pick({{"issue_certificate", {{"user_id", uid}, {"amount", 150}}}},
                "I'm sorry about the delay. I've issued a $150 travel certificate to your account.");
  }
  if (lower.find("refund") != std::string::npos) {
    std::string code = codes.empty() ? "" : codes.front();
    std::vector<ToolCall> plan;
    if (code.empty()) {
      if (done.empty()) return call("list_reservations", {{"user_id", uid}});
      const auto active = active_from_listing(done.front().result);
      if (active.empty()) return "I could not find an active reservation to refund.";
      code = active.front();
      plan.push_back(done.front().call);
    }
    plan.push_back({"refund", {{"reservation_id", code}}});
    if (done.size() < plan.size()) return tool_call_text(plan[done.size()]);
    if (text::starts_with(done.back().result, "error")) {
      return "I'm sorry, reservation " + code +
             " is a basic economy fare and cannot be refunded. I can cancel it instead. Would you like me to cancel it?";
    }
    return "Your refund for " + code + " has been processed.";
  }
  return "Is there anything else I can help you with?";
}

// --- structured tasks -----------------------------------------------------

struct DialogueLine {
  bool user;
  std::string text;
};

std::vector<DialogueLine> dialogue(const std::string& block) {
  std::vector<DialogueLine> out;
  for (const auto& line : text::split_lines(block)) {
    if (text::starts_with(line, "USER: ")) {
      out.push_back({true, line.substr(6)});
    } else if (text::starts_with(line, "ASSISTANT: ")) {
      out.push_back({false, line.substr(11)});
    } else if (!out.empty()) {
      out.back().text += "\n" + line;
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> tagged_messages(const std::string& block) {
  static const std::regex head(R"(^\[([^\]]+)\] (.*)$)");
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& line : text::split_lines(block)) {
    std::smatch m;
    if (std::regex_match(line, m, head)) {
      out.emplace_back(m[1].str(), m[2].str());
    } else if (!out.empty()) {
      out.back().second += "\n" + line;
    }
  }
  return out;
}

std::string tag_reply(const ChatRequest& req) {
  const auto lines = dialogue(between(first_user_content(req), "<conversation>\n", "</conversation>").value_or(""));
  std::string user_text;
  int user_turns = 0, words = 0;
  for (const auto& l : lines) {
    if (!l.user) continue;
    ++user_turns;
    user_text += " " + text::to_lower(l.text);
    words += static_cast<int>(text::split_words(l.text).size());
  }
  std::string domain = "General Knowledge", task = "Question Answering";
  if (any_of_words(user_text, {"translate", "translation"})) {
    domain = "Language";
    task = "Translation";
  } else if (any_of_words(user_text, {"summarize", "summary", "tl;dr"})) {
    domain = "General Knowledge";
    task = "Summarization";
  } else if (any_of_words(user_text, {"code", "python", "function", "error", "bug", "javascript", "sql", "compile"})) {
    domain = "Software Development";
    task = "Code Development";
  } else if (any_of_words(user_text, {"story", "poem", "essay", "song", "character"})) {
    domain = "Creative Writing";
    task = "Content Creation";
  } else if (any_of_words(user_text, {"doctor", "pain", "symptom", "health", "diet", "sleep"})) {
    domain = "Medical & Health";
  } else if (any_of_words(user_text, {"game", "minecraft", "level design"})) {
    domain = "Game Development";
    task = "Code Development";
  } else if (any_of_words(user_text, {"budget", "invest", "tax", "money", "loan"})) {
    domain = "Finance";
  }
  const int complexity = std::clamp(1 + words / 40, 1, 5);
  const int engagement = std::clamp(1 + user_turns, 1, 5);
  const int depth = std::clamp(1 + static_cast<int>(lines.size()) / 2, 1, 5);
  return json{{"domain", domain}, {"task_type", task}, {"complexity", complexity}, {"engagement", engagement}, {"depth", depth}}
      .dump();
}

std::string example_of(const std::vector<std::pair<std::string, std::string>>& msgs, auto pred) {
  for (const auto& [id, m] : msgs) {
    if (pred(m)) return clip(text::split_lines(m).front(), 80);
  }
  return clip(text::split_lines(msgs.front().second).front(), 80);
}

std::string style_reply(const ChatRequest& req) {
  const auto msgs = tagged_messages(between(first_user_content(req), "<messages>\n", "</messages>").value_or(""));
  if (msgs.empty()) return R"({"commands": []})";
  const double n = static_cast<double>(msgs.size());
  auto frac = [&](auto pred) {
    return static_cast<double>(std::count_if(msgs.begin(), msgs.end(), [&](const auto& p) { return pred(p.second); })) / n;
  };
  auto has_upper = [](const std::string& m) { return std::any_of(m.begin(), m.end(), [](unsigned char c) { return std::isupper(c); }); };
  auto terminal = [](const std::string& m) {
    const auto t = text::trim(m);
    return !t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == '?');
  };
  auto polite = [](const std::string& m) { return text::contains_ci(m, "please") || text::contains_ci(m, "thank"); };
  auto greeting = [](const std::string& m) {
    const auto l = text::to_lower(text::trim(m));
    return text::starts_with(l, "hi") || text::starts_with(l, "hello") || text::starts_with(l, "hey");
  };
  auto emote = [](const std::string& m) { return m.find(":)") != std::string::npos || text::has_word(m, "lol"); };
  auto technical = [](const std::string& m) {
    return m.find("```") != std::string::npos || m.find("()") != std::string::npos || m.find(';') != std::string::npos;
  };
  double words = 0;
  for (const auto& [id, m] : msgs) words += static_cast<double>(text::split_words(m).size());
  const double avg_words = words / n;

  json commands = json::array();
  auto add = [&](const char* dim, const std::string& command, const std::string& example) {
    commands.push_back({{"command", command}, {"dimension", dim}, {"examples", json::array({example})}});
  };
  const bool lower = frac([&](const std::string& m) { return !has_upper(m); }) >= 0.7;
  add("capitalization",
      lower ? "Write entirely in lowercase, even at the start of sentences." : "Capitalize normally at the start of sentences.",
      example_of(msgs, [&](const std::string& m) { return lower ? !has_upper(m) : has_upper(m); }));
  const bool bare = frac([&](const std::string& m) { return !terminal(m); }) >= 0.6;
  add("punctuation", bare ? "Omit terminal punctuation at the end of messages." : "End sentences with standard punctuation.",
      example_of(msgs, [&](const std::string& m) { return bare ? !terminal(m) : terminal(m); }));
  const bool terse = avg_words < 12;
  add("message_length",
      terse ? "Keep messages short and terse, usually under a dozen words." : "Write long, detailed messages with full context.",
      example_of(msgs, [&](const std::string& m) { return (text::split_words(m).size() < 12) == terse; }));
  const bool courteous = frac(polite) >= 0.3;
  add("formality", courteous ? "Stay polite: say please and thank you." : "Use a casual, direct tone without pleasantries.",
      example_of(msgs, [&](const std::string& m) { return polite(m) == courteous; }));
  const bool greets = frac(greeting) >= 0.3;
  add("greeting", greets ? "Open with a short greeting such as hey or hi." : "Never use greetings or sign-offs.",
      example_of(msgs, [&](const std::string& m) { return greeting(m) == greets; }));
  const bool emotes = frac(emote) >= 0.2;
  add("emoticon", emotes ? "Add emoticons such as :) or lol." : "Never use emoji or emoticons.",
      example_of(msgs, [&](const std::string& m) { return emote(m) == emotes; }));
  const bool tech = frac(technical) >= 0.2;
  add("technical_register", tech ? "Paste code snippets and use technical jargon freely." : "Use plain, everyday language.",
      example_of(msgs, [&](const std::string& m) { return technical(m) == tech; }));
  const bool front = std::count(msgs.front().second.begin(), msgs.front().second.end(), '?') >= 2;
  add("intent_density", front ? "Front-load several requests in the first message." : "Make one request at a time and follow up.",
      msgs.front().second.size() <= 80 ? msgs.front().second : clip(text::split_lines(msgs.front().second).front(), 80));
  return json{{"commands", commands}}.dump();
}

std::string age_bucket(int age) {
  if (age < 18) return "under 18";
  if (age <= 24) return "18-24";
  if (age <= 34) return "25-34";
  if (age <= 44) return "35-44";
  if (age <= 54) return "45-54";
  if (age <= 64) return "55-64";
  return "65+";
}

std::string demo_extract_reply(const ChatRequest& req) {
  static const std::regex age_re(R"(\b[Ii](?:'m| am) (\d{1,2})(?: years old)?\b)");
  static const std::regex occ_re(
      R"(\b[Ii](?:'m| am) an? (student|teacher|nurse|software engineer|developer|lawyer|doctor|accountant|designer|engineer|chef|retired teacher)\b)");
  static const std::regex loc_re(R"(\b[Ii] live in ([A-Z][a-zA-Z]+(?: [A-Z][a-zA-Z]+)?))");
  static const std::regex marital_re(R"(\b[Mm]y (wife|husband)\b)");
  static const std::regex edu_re(R"(\b(bachelor's degree|master's degree|PhD|high school diploma|associate degree)\b)");
  const auto lines = dialogue(between(first_user_content(req), "<conversation>\n", "</conversation>").value_or(""));
  json mentions = json::array();
  for (const auto& l : lines) {
    if (!l.user) continue;
    std::smatch m;
    if (std::regex_search(l.text, m, age_re)) {
      mentions.push_back({{"field", "age"}, {"value", age_bucket(std::stoi(m[1].str()))}, {"evidence", m.str()}});
    }
    if (std::regex_search(l.text, m, occ_re)) mentions.push_back({{"field", "occupation"}, {"value", m[1].str()}, {"evidence", m.str()}});
    if (std::regex_search(l.text, m, loc_re)) mentions.push_back({{"field", "location"}, {"value", m[1].str()}, {"evidence", m.str()}});
    if (std::regex_search(l.text, m, marital_re)) mentions.push_back({{"field", "marital_status"}, {"value", "married"}, {"evidence", m.str()}});
    if (std::regex_search(l.text, m, edu_re)) {
      static const std::map<std::string, std::string> edu{{"bachelor's degree", "bachelor's degree"},
                                                          {"master's degree", "master's degree"},
                                                          {"PhD", "doctoral degree"},
                                                          {"high school diploma", "high school"},
                                                          {"associate degree", "associate degree"}};
      mentions.push_back({{"field", "education"}, {"value", edu.at(m[1].str())}, {"evidence", m.str()}});
    }
  }
  return json{{"mentions", mentions}}.dump();
}

std::string demo_infer_reply(const ChatRequest& req) {
  const auto& prompt = first_user_content(req);
  const auto head = prompt.substr(0, prompt.find("<messages>"));
  const std::string msgs = text::to_lower(between(prompt, "<messages>\n", "</messages>").value_or(""));
  json out = json::object();
  for (const auto& line : text::split_lines(head)) {
    if (!text::starts_with(line, "- ")) continue;
    const auto field = text::split_words(line.substr(2)).front();
    std::string value = "unknown";
    if (field == "age") {
      if (any_of_words(msgs, {"homework", "my teacher", "my mom says"})) value = "under 18";
      else if (any_of_words(msgs, {"thesis", "professor", "semester", "dorm"})) value = "18-24";
      else if (any_of_words(msgs, {"grandkids", "grandchildren", "my pension"})) value = "65+";
    } else if (field == "education") {
      if (any_of_words(msgs, {"thesis", "semester", "professor"})) value = "some college";
      else if (any_of_words(msgs, {"homework", "my teacher"})) value = "primary education";
    }
    out[field] = value;
  }
  return out.dump();
}

std::string task_spec_reply(const ChatRequest& req) {
  const auto lines = dialogue(between(first_user_content(req), "<conversation>\n", "</conversation>").value_or(""));
  std::vector<std::string> users;
  for (const auto& l : lines) {
    if (l.user) users.push_back(clip(l.text, 200));
  }
  if (users.empty()) return "{}";
  json conditions = json::array();
  for (std::size_t i = 1; i < users.size() && conditions.size() < 3; ++i) {
    conditions.push_back("The assistant answers your follow-up: \"" + users[i] + "\"");
  }
  if (conditions.empty()) conditions.push_back("The assistant gives a usable answer to your request.");
  return json{{"problem_description", "Your opening request is: \"" + users.front() + "\""},
              {"solution_conditions", conditions}}
      .dump();
}

struct SideFeatures {
  double lower = 0, terminal = 0, words = 0, greeting = 0, polite = 0, technical = 0;
  double count = 0;
};

SideFeatures side_features(const std::string& block) {
  SideFeatures f;
  for (const auto& l : dialogue(block)) {
    if (!l.user) continue;
    std::string m = l.text;
    const auto tok = m.find(kTerminationToken);
    if (tok != std::string::npos) m.erase(tok);
    m = text::trim(m);
    if (m.empty()) continue;
    f.count += 1;
    f.lower += std::none_of(m.begin(), m.end(), [](unsigned char c) { return std::isupper(c); });
    f.terminal += (m.back() == '.' || m.back() == '!' || m.back() == '?');
    f.words += static_cast<double>(text::split_words(m).size());
    const auto low = text::to_lower(m);
    f.greeting += text::starts_with(low, "hi") || text::starts_with(low, "hello") || text::starts_with(low, "hey");
    f.polite += text::contains_ci(m, "please") || text::contains_ci(m, "thank");
    f.technical += m.find("```") != std::string::npos || m.find("()") != std::string::npos || m.find(';') != std::string::npos;
  }
  if (f.count > 0) {
    for (double* v : {&f.lower, &f.terminal, &f.words, &f.greeting, &f.polite, &f.technical}) *v /= f.count;
  }
  return f;
}

std::string judge_reply(const ChatRequest& req) {
  const auto& prompt = first_user_content(req);
  const auto a = side_features(between(prompt, "<conversation_a>\n", "</conversation_a>").value_or(""));
  const auto b = side_features(between(prompt, "<conversation_b>\n", "</conversation_b>").value_or(""));
  auto ratio = [](double x, double y) {
    const double lo = std::min(x, y), hi = std::max(x, y);
    return lo <= 0 ? (hi <= 0 ? 1.0 : 99.0) : hi / lo;
  };
  auto verdict = [](bool match, const char* why) { return json{{"match", match}, {"rationale", why}}; };
  json out;
  out[to_string(Dimension::persona_affect)] =
      verdict(std::abs(a.greeting - b.greeting) < 0.5 && std::abs(a.polite - b.polite) < 0.5,
              "compares greetings and courtesy markers");
  out[to_string(Dimension::linguistic_style)] =
      verdict(std::abs(a.lower - b.lower) < 0.34 && std::abs(a.terminal - b.terminal) < 0.34,
              "compares casing and terminal punctuation");
  out[to_string(Dimension::tech_competency)] =
      verdict(std::abs(a.technical - b.technical) < 0.5, "compares technical content");
  out[to_string(Dimension::interaction_flow)] =
      verdict(std::abs(a.count - b.count) <= 1 && ratio(a.words, b.words) <= 2.5, "compares turn structure");
  out[to_string(Dimension::pacing)] =
      verdict(ratio(a.words, b.words) <= 1.6 && std::abs(a.count - b.count) <= 2, "compares message length");
  return out.dump();
}

std::string separate_reply(const ChatRequest& req) {
  static const std::vector<std::string> style_words{
      "impatient", "reactive",  "distraught", "upset",   "insistent", "frustration", "frustrated", "angry",
      "polite",    "rude",      "emotional",  "calm",    "terse",     "curt",        "shy",        "hesitant",
      "tone",      "patient",   "casual",     "formal",  "friendly",  "aggressive",  "sarcastic",  "nervous"};
  const auto& prompt = first_user_content(req);
  const auto scenario = text::trim(between(prompt, "<scenario>\n", "\n</scenario>").value_or(""));
  std::vector<std::string> task, directives;
  for (const auto& s : sentences(scenario)) {
    const bool style = std::any_of(style_words.begin(), style_words.end(), [&](const std::string& w) { return text::has_word(s, w); });
    if (style && identifier_tokens(s).empty()) {
      directives.push_back(s);
    } else {
      task.push_back(s);
    }
  }
  json out{{"task_only", text::join(task, " ")}, {"directives", directives}};
  if (auto persona = between(prompt, "<persona>\n", "\n</persona>")) {
    std::vector<std::string> facts;
    for (const auto& s : sentences(*persona)) {
      const bool style = std::any_of(style_words.begin(), style_words.end(), [&](const std::string& w) { return text::has_word(s, w); });
      if (!style) facts.push_back(s);
    }
    out["user_background"] = text::join(facts, " ");
  }
  return out.dump();
}

std::string chat_agent(const ChatRequest& req) {
  const auto& m = last_user_content(req);
  return fmt::format("Thanks for the question. Regarding \"{}\", here is an overview with the key points and next steps.",
                     first_words(text::collapse_whitespace(m), 12));
}

}  // namespace

std::string offline_apply_style(const std::string& message, const std::vector<std::string>& commands) {
  return styled(message, traits_of(commands));
}

std::string offline_reply(const ChatRequest& request) {
  const auto& p = request.purpose;
  if (p == "tag") return tag_reply(request);
  if (p == "style") return style_reply(request);
  if (p == "demo_extract") return demo_extract_reply(request);
  if (p == "demo_infer") return demo_infer_reply(request);
  if (p == "task_spec") return task_spec_reply(request);
  if (p == "simulator") return simulate_user(request);
  if (p == "agent") return chat_agent(request);
  if (p == "tool_agent") return tool_agent(request);
  if (p == "judge") return judge_reply(request);
  if (p == "separate") return separate_reply(request);
  throw FixtureMiss("offline responder has no rule for purpose '" + p + "'");
}

ChatResponse OfflineResponder::send(const ChatRequest& request, const ProviderConfig&) {
  ChatResponse r;
  r.content = offline_reply(request);
  r.usage.completion_tokens = static_cast<std::int64_t>(text::split_words(r.content).size());
  return r;
}

}  // namespace groundsim
