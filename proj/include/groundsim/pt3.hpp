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
#include "groundsim/simulation.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace groundsim {

struct SubsetSpec {
  std::string name = "mixed";
  std::optional<std::string> domain_filter;  // absent = mixed-domain subset
  std::set<std::string> excluded_domains{"Game Development"};
  std::set<std::string> excluded_task_types;
  int size = 100;
  int min_user_turns = 3;
  int min_quality = 10;
  int max_message_chars = 2000;
  int per_user_cap = 2;
  // Applied only to mixed-domain subsets.
  int mixed_per_domain_cap = 2;

  void validate() const;
  static SubsetSpec from_json(const nlohmann::json& j);
};

enum class CleaningClass { stripped_all, removed_tagged, unchanged };

std::string to_string(CleaningClass c);

struct TestCase {
  std::string case_id;
  std::string subset;
  Conversation real_conversation;
  UserProfile profile;
  UserProfile cleaned_profile;
  CleaningClass cleaning_class = CleaningClass::unchanged;
};

nlohmann::json to_json(const TestCase& c);
TestCase test_case_from_json(const nlohmann::json& j);

struct CleanResult {
  UserProfile profile;
  CleaningClass cleaning_class;
};

CleanResult clean_profile(const UserProfile& profile, const std::string& test_conv_id);

// Conversations passing every filter, in selection order, before the size
// cut. Exposed for reporting how close a corpus is to a full subset.
std::vector<Conversation> qualifying_conversations(const std::vector<Conversation>& corpus, const SubsetSpec& spec,
                                                   const std::map<std::string, UserProfile>& profiles);

std::vector<TestCase> build_subset(const std::vector<Conversation>& corpus, const SubsetSpec& spec,
                                   const std::map<std::string, UserProfile>& profiles);

SimTrajectory strip_termination(const SimTrajectory& traj);

enum class Dimension { persona_affect, linguistic_style, tech_competency, interaction_flow, pacing };

inline constexpr std::array<Dimension, 5> kDimensions{Dimension::persona_affect, Dimension::linguistic_style,
                                                      Dimension::tech_competency, Dimension::interaction_flow,
                                                      Dimension::pacing};

std::string to_string(Dimension d);
std::string dimension_title(Dimension d);   // "Persona & Affective Traits"
std::string dimension_rubric(Dimension d);  // description column of the rubric table

struct DimensionVerdict {
  bool match = false;
  std::string rationale;

  bool operator==(const DimensionVerdict&) const = default;
};

struct PT3Verdict {
  std::string case_id;
  std::string subset;
  SimCondition condition = SimCondition::baseline;
  std::array<DimensionVerdict, 5> dimensions;  // indexed in kDimensions order

  const DimensionVerdict& at(Dimension d) const { return dimensions[static_cast<std::size_t>(d)]; }
  DimensionVerdict& at(Dimension d) { return dimensions[static_cast<std::size_t>(d)]; }
  bool operator==(const PT3Verdict&) const = default;
};

nlohmann::json to_json(const PT3Verdict& v);
PT3Verdict verdict_from_json(const nlohmann::json& j);

struct JudgeOptions {
  std::string model = "gpt-4o";
  double temperature = 0.0;
  // true: the real conversation is shown as Conversation A.
  bool real_first = true;
};

// Balanced, seed-shuffled left/right assignment for n cases.
std::vector<bool> presentation_orders(std::size_t n, std::uint64_t seed);

std::string judge_prompt(const Conversation& real, const SimTrajectory& synthetic, bool real_first);
PT3Verdict parse_verdict_reply(const std::string& reply);
PT3Verdict judge_pair(const Conversation& real, const SimTrajectory& synthetic, Gateway& gateway,
                      const JudgeOptions& options = {});

using DimensionWeights = std::array<double, 5>;
inline constexpr DimensionWeights kUniformWeights{0.2, 0.2, 0.2, 0.2, 0.2};

struct FidelityReport {
  std::string label;
  std::array<double, 5> dimension_rates{};
  std::map<std::string, double> subset_rates;  // per-subset Fidelity Index
  double fidelity_index = 0.0;
  DimensionWeights weights = kUniformWeights;
  std::size_t case_count = 0;
  std::size_t judgment_count = 0;
};

double fidelity_index(const std::array<double, 5>& rates, const DimensionWeights& weights = kUniformWeights);

FidelityReport aggregate_fidelity(const std::vector<PT3Verdict>& verdicts,
                                  const DimensionWeights& weights = kUniformWeights, std::string label = {});

// Baseline vs With-Profile comparison in the By-dimension / By-subset /
// Overall layout, percentages with one decimal.
std::string render_fidelity_table(const FidelityReport& baseline, const FidelityReport& with_profile);
std::string render_fidelity_tsv(const FidelityReport& baseline, const FidelityReport& with_profile);

}  // namespace groundsim
