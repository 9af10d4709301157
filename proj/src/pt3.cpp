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

#include "groundsim/pt3.hpp"

#include "groundsim/report_math.hpp"
#include "groundsim/rng.hpp"
#include "groundsim/structured.hpp"
#include "groundsim/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace groundsim {

namespace {
using json = nlohmann::json;
}

void SubsetSpec::validate() const {
  if (size < 1) throw InvalidRequest("subset size must be >= 1");
  if (min_user_turns < 1 || min_quality < 1 || max_message_chars < 1 || per_user_cap < 1 || mixed_per_domain_cap < 1) {
    throw InvalidRequest("subset thresholds must be positive");
  }
}

SubsetSpec SubsetSpec::from_json(const json& j) {
  SubsetSpec s;
  s.name = j.value("name", s.name);
  if (j.contains("domain_filter") && j["domain_filter"].is_string()) s.domain_filter = j["domain_filter"].get<std::string>();
  if (j.contains("excluded_domains")) s.excluded_domains = j["excluded_domains"].get<std::set<std::string>>();
  if (j.contains("excluded_task_types")) s.excluded_task_types = j["excluded_task_types"].get<std::set<std::string>>();
  s.size = j.value("size", s.size);
  s.min_user_turns = j.value("min_user_turns", s.min_user_turns);
  s.min_quality = j.value("min_quality", s.min_quality);
  s.max_message_chars = j.value("max_message_chars", s.max_message_chars);
  s.per_user_cap = j.value("per_user_cap", s.per_user_cap);
  s.mixed_per_domain_cap = j.value("mixed_per_domain_cap", s.mixed_per_domain_cap);
  s.validate();
  return s;
}

std::string to_string(CleaningClass c) {
  switch (c) {
    case CleaningClass::stripped_all: return "stripped_all";
    case CleaningClass::removed_tagged: return "removed_tagged";
    case CleaningClass::unchanged: return "unchanged";
  }
  return "unchanged";
}

json to_json(const TestCase& c) {
  return {{"case_id", c.case_id},
          {"subset", c.subset},
          {"real_conversation", to_json(c.real_conversation)},
          {"profile", to_json(c.profile)},
          {"cleaned_profile", to_json(c.cleaned_profile)},
          {"cleaning_class", to_string(c.cleaning_class)}};
}

TestCase test_case_from_json(const json& j) {
  TestCase c;
  c.case_id = j.at("case_id").get<std::string>();
  c.subset = j.value("subset", std::string());
  c.real_conversation = conversation_from_json(j.at("real_conversation"));
  c.profile = profile_from_json(j.at("profile"));
  c.cleaned_profile = profile_from_json(j.at("cleaned_profile"));
  const auto cls = j.value("cleaning_class", std::string("unchanged"));
  c.cleaning_class = cls == "stripped_all"     ? CleaningClass::stripped_all
                     : cls == "removed_tagged" ? CleaningClass::removed_tagged
                                               : CleaningClass::unchanged;
  return c;
}

CleanResult clean_profile(const UserProfile& profile, const std::string& test_conv_id) {
  const auto& ids = profile.conversation_ids;
  const bool contains_test = std::find(ids.begin(), ids.end(), test_conv_id) != ids.end();
  CleanResult out{profile, CleaningClass::unchanged};
  if (!contains_test) return out;

  const bool single_source =
      std::all_of(ids.begin(), ids.end(), [&](const std::string& id) { return id == test_conv_id; });
  out.cleaning_class = single_source ? CleaningClass::stripped_all : CleaningClass::removed_tagged;
  for (auto& cmd : out.profile.manual.commands) {
    if (single_source) {
      cmd.examples.clear();
    } else {
      std::erase_if(cmd.examples, [&](const StyleExample& e) { return e.source_conversation_id == test_conv_id; });
    }
  }
  return out;
}

std::vector<Conversation> qualifying_conversations(const std::vector<Conversation>& corpus, const SubsetSpec& spec,
                                                   const std::map<std::string, UserProfile>& profiles) {
  spec.validate();
  std::vector<Conversation> pool;
  for (const auto& c : corpus) {
    if (!c.tags || !profiles.count(c.user_id)) continue;
    if (spec.domain_filter && c.tags->domain != *spec.domain_filter) continue;
    if (spec.excluded_domains.count(c.tags->domain) || spec.excluded_task_types.count(c.tags->task_type)) continue;
    if (static_cast<int>(c.user_turn_count()) < spec.min_user_turns) continue;
    if (c.tags->quality_score < spec.min_quality) continue;
    const bool too_long = std::any_of(c.turns.begin(), c.turns.end(), [&](const Turn& t) {
      return t.role == Speaker::user && text::utf8_length(t.content) > static_cast<std::size_t>(spec.max_message_chars);
    });
    if (too_long) continue;
    pool.push_back(c);
  }
  std::sort(pool.begin(), pool.end(), quality_order);
  std::map<std::string, int> per_user, per_domain;
  std::vector<Conversation> selected;
  for (auto& c : pool) {
    if (per_user[c.user_id] >= spec.per_user_cap) continue;
    if (!spec.domain_filter && per_domain[c.tags->domain] >= spec.mixed_per_domain_cap) continue;
    ++per_user[c.user_id];
    ++per_domain[c.tags->domain];
    selected.push_back(std::move(c));
  }
  return selected;
}

std::vector<TestCase> build_subset(const std::vector<Conversation>& corpus, const SubsetSpec& spec,
                                   const std::map<std::string, UserProfile>& profiles) {
  auto selected = qualifying_conversations(corpus, spec, profiles);
  if (static_cast<int>(selected.size()) < spec.size) {
    throw InsufficientCorpus("subset " + spec.name + " needs " + std::to_string(spec.size) + " conversations, found " +
                             std::to_string(selected.size()));
  }
  selected.resize(static_cast<std::size_t>(spec.size));
  std::vector<TestCase> cases;
  for (auto& conv : selected) {
    TestCase tc;
    tc.case_id = spec.name + ":" + conv.conversation_id;
    tc.subset = spec.name;
    tc.profile = profiles.at(conv.user_id);
    auto cleaned = clean_profile(tc.profile, conv.conversation_id);
    tc.cleaned_profile = std::move(cleaned.profile);
    tc.cleaning_class = cleaned.cleaning_class;
    tc.real_conversation = std::move(conv);
    cases.push_back(std::move(tc));
  }
  return cases;
}

SimTrajectory strip_termination(const SimTrajectory& traj) {
  SimTrajectory out = traj;
  for (auto it = out.turns.rbegin(); it != out.turns.rend(); ++it) {
    if (it->role != Speaker::user) continue;
    if (carries_termination(it->content)) {
      std::string t = text::trim(it->content);
      t.resize(t.size() - kTerminationToken.size());
      it->content = text::trim(t);
      if (it->content.empty()) out.turns.erase(std::next(it).base());
    }
    break;
  }
  for (std::size_t i = 0; i < out.turns.size(); ++i) out.turns[i].index = static_cast<int>(i);
  return out;
}

std::string to_string(Dimension d) {
  switch (d) {
    case Dimension::persona_affect: return "persona_affect";
    case Dimension::linguistic_style: return "linguistic_style";
    case Dimension::tech_competency: return "tech_competency";
    case Dimension::interaction_flow: return "interaction_flow";
    case Dimension::pacing: return "pacing";
  }
  return "";
}

std::string dimension_title(Dimension d) {
  switch (d) {
    case Dimension::persona_affect: return "Persona & Affective Traits";
    case Dimension::linguistic_style: return "Linguistic Style & Mechanics";
    case Dimension::tech_competency: return "Tech Competency & Knowledge";
    case Dimension::interaction_flow: return "Interaction & Data Flow";
    case Dimension::pacing: return "Pacing & Action Sequencing";
  }
  return "";
}

std::string dimension_rubric(Dimension d) {
  switch (d) {
    case Dimension::persona_affect: return "Demeanor, emotional state, patience level, personality cues";
    case Dimension::linguistic_style: return "Vocabulary, phrasing, formality, typos, message length patterns";
    case Dimension::tech_competency: return "Domain expertise, terminology usage, depth of questions";
    case Dimension::interaction_flow: return "Information-sharing habits (scattered vs. dense), questioning style";
    case Dimension::pacing: return "Turn length, topic transitions, conversation conclusion patterns";
  }
  return "";
}

json to_json(const PT3Verdict& v) {
  json dims = json::object();
  for (auto d : kDimensions) dims[to_string(d)] = {{"match", v.at(d).match}, {"rationale", v.at(d).rationale}};
  return {{"case_id", v.case_id}, {"subset", v.subset}, {"condition", to_string(v.condition)}, {"dimensions", dims}};
}

PT3Verdict verdict_from_json(const json& j) {
  PT3Verdict v;
  v.case_id = j.value("case_id", std::string());
  v.subset = j.value("subset", std::string());
  v.condition = sim_condition_from_string(j.value("condition", std::string("baseline")));
  const auto& dims = j.at("dimensions");
  for (auto d : kDimensions) {
    const auto& e = dims.at(to_string(d));
    v.at(d) = {e.at("match").get<bool>(), e.value("rationale", std::string())};
  }
  return v;
}

std::vector<bool> presentation_orders(std::size_t n, std::uint64_t seed) {
  std::vector<bool> orders(n, false);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) orders[i] = true;
  SeededRng rng(seed);
  rng.shuffle(orders);
  return orders;
}

namespace {

std::string render_dialogue(const std::vector<Turn>& turns) {
  std::string out;
  for (const auto& t : turns) out += (t.role == Speaker::user ? "USER: " : "ASSISTANT: ") + t.content + "\n";
  return out;
}

}  // namespace

std::string judge_prompt(const Conversation& real, const SimTrajectory& synthetic, bool real_first) {
  const std::string real_text = render_dialogue(real.turns);
  const std::string synth_text = render_dialogue(synthetic.turns);
  std::string p =
      "You will read two conversations between a user and an AI assistant. Judge, for each dimension "
      "below, whether the USER in Conversation A and the USER in Conversation B are indistinguishable, "
      "as if both were written by the same person. Ignore what the assistant says.\n\nDimensions:\n";
  for (auto d : kDimensions) p += "- " + to_string(d) + " (" + dimension_title(d) + "): " + dimension_rubric(d) + "\n";
  p +=
      "\nReply with JSON only: {\"<dimension key>\": {\"match\": true|false, \"rationale\": \"one sentence\"}, ...} "
      "with all five dimension keys.\n\n<conversation_a>\n";
  p += real_first ? real_text : synth_text;
  p += "</conversation_a>\n\n<conversation_b>\n";
  p += real_first ? synth_text : real_text;
  p += "</conversation_b>";
  return p;
}

PT3Verdict parse_verdict_reply(const std::string& reply) {
  auto j = extract_json_object(reply);
  if (j.contains("dimensions") && j["dimensions"].is_object()) j = j["dimensions"];
  PT3Verdict v;
  for (auto d : kDimensions) {
    auto it = j.find(to_string(d));
    if (it == j.end()) throw ParseError("missing dimension " + to_string(d));
    if (it->is_boolean()) {
      v.at(d) = {it->get<bool>(), ""};
    } else if (it->is_object() && it->contains("match") && (*it)["match"].is_boolean()) {
      v.at(d) = {(*it)["match"].get<bool>(), it->value("rationale", std::string())};
    } else {
      throw ParseError("dimension " + to_string(d) + " lacks a boolean match");
    }
  }
  return v;
}

PT3Verdict judge_pair(const Conversation& real, const SimTrajectory& synthetic, Gateway& gateway,
                      const JudgeOptions& options) {
  ChatRequest req;
  req.purpose = "judge";
  req.model_name = options.model;
  req.temperature = options.temperature;
  req.max_output = 1024;
  req.messages = {{Role::system, "You are an expert annotator of conversational behaviour. Answer with JSON only."},
                  {Role::user, judge_prompt(real, synthetic, options.real_first)}};
  auto v = complete_structured<VerdictParseError>(
      gateway, req, parse_verdict_reply, "Reply again with only the JSON object containing all five dimension keys.");
  v.case_id = synthetic.case_id;
  v.condition = synthetic.condition;
  return v;
}

namespace {

void check_weights(const DimensionWeights& w) {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw InvalidRequest("dimension weights must be non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidRequest("dimension weights must sum to 1");
}

}  // namespace

double fidelity_index(const std::array<double, 5>& rates, const DimensionWeights& weights) {
  check_weights(weights);
  double idx = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) idx += weights[i] * rates[i];
  return idx;
}

FidelityReport aggregate_fidelity(const std::vector<PT3Verdict>& verdicts, const DimensionWeights& weights,
                                  std::string label) {
  if (verdicts.empty()) throw InvalidRequest("no verdicts to aggregate");
  check_weights(weights);
  FidelityReport r;
  r.label = std::move(label);
  r.weights = weights;
  r.case_count = verdicts.size();
  r.judgment_count = kDimensions.size() * verdicts.size();

  auto rates_of = [](const std::vector<const PT3Verdict*>& vs) {
    std::array<double, 5> rates{};
    for (std::size_t i = 0; i < kDimensions.size(); ++i) {
      std::size_t hits = 0;
      for (const auto* v : vs) hits += v->dimensions[i].match;
      rates[i] = static_cast<double>(hits) / static_cast<double>(vs.size());
    }
    return rates;
  };

  std::vector<const PT3Verdict*> all;
  std::map<std::string, std::vector<const PT3Verdict*>> by_subset;
  for (const auto& v : verdicts) {
    all.push_back(&v);
    if (!v.subset.empty()) by_subset[v.subset].push_back(&v);
  }
  r.dimension_rates = rates_of(all);
  r.fidelity_index = fidelity_index(r.dimension_rates, weights);
  for (const auto& [name, vs] : by_subset) r.subset_rates[name] = fidelity_index(rates_of(vs), weights);
  return r;
}

namespace {

std::vector<std::vector<std::string>> fidelity_rows(const FidelityReport& b, const FidelityReport& p) {
  std::vector<std::vector<std::string>> rows{{"", "Baseline", "With Profile", "Delta"}};
  auto pct = [](double x) { return format_percent(x); };
  auto delta = [](double a, double b) { return format_signed((b - a) * 100.0); };
  rows.push_back({"By dimension", "", "", ""});
  for (std::size_t i = 0; i < kDimensions.size(); ++i) {
    rows.push_back({"  " + dimension_title(kDimensions[i]), pct(b.dimension_rates[i]), pct(p.dimension_rates[i]),
                    delta(b.dimension_rates[i], p.dimension_rates[i])});
  }
  std::set<std::string> subsets;
  for (const auto& [k, _] : b.subset_rates) subsets.insert(k);
  for (const auto& [k, _] : p.subset_rates) subsets.insert(k);
  if (!subsets.empty()) {
    rows.push_back({"By subset", "", "", ""});
    for (const auto& s : subsets) {
      auto bi = b.subset_rates.find(s);
      auto pi = p.subset_rates.find(s);
      const bool both = bi != b.subset_rates.end() && pi != p.subset_rates.end();
      rows.push_back({"  " + s, bi != b.subset_rates.end() ? pct(bi->second) : "",
                      pi != p.subset_rates.end() ? pct(pi->second) : "", both ? delta(bi->second, pi->second) : ""});
    }
  }
  rows.push_back({"Overall", pct(b.fidelity_index), pct(p.fidelity_index), delta(b.fidelity_index, p.fidelity_index)});
  return rows;
}

}  // namespace

std::string render_fidelity_table(const FidelityReport& baseline, const FidelityReport& with_profile) {
  return render_text_table(fidelity_rows(baseline, with_profile));
}

std::string render_fidelity_tsv(const FidelityReport& baseline, const FidelityReport& with_profile) {
  auto rows = fidelity_rows(baseline, with_profile);
  for (auto& r : rows) r[0] = text::trim(r[0]);
  return render_tsv(rows);
}

}  // namespace groundsim
