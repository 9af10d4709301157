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
#include "groundsim/profiling.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace groundsim {

inline constexpr std::string_view kTerminationToken = "###DONE###";
inline constexpr std::string_view kScenarioOpen = "<scenario>";
inline constexpr std::string_view kScenarioClose = "</scenario>";
inline constexpr std::string_view kPersonaOpen = "<persona_override>";
inline constexpr std::string_view kPersonaClose = "</persona_override>";

struct ScenarioSplit {
  std::string task_only;
  std::vector<std::string> directives;
  std::optional<std::string> user_background;

  // Scenario text handed to the simulator: the background line (when
  // present) followed by the task-only instructions.
  std::string scenario_text() const;
  bool operator==(const ScenarioSplit&) const = default;
};

enum class PersonaSection { demographics, background, style };

struct PersonaBlock {
  std::string rendered;
  std::set<PersonaSection> sections_present;

  bool operator==(const PersonaBlock&) const = default;
};

enum class PromptCondition { baseline_np, with_persona, original };

struct PromptBundle {
  std::string system_prompt;
  PromptCondition condition = PromptCondition::baseline_np;
};

// Identifier-like tokens that must survive directive separation:
// upper-case alphanumeric codes of length >= 5 containing a digit
// (ABC123, FDZ0T5), snake_case user ids ending in digits (mia_li_3668),
// e-mail addresses, and the caller-supplied names.
std::set<std::string> identifier_tokens(std::string_view text, const std::vector<std::string>& names = {});

struct SeparationOptions {
  std::string model = "gpt-4o";
  double temperature = 0.0;
  // Proper names from the task's structured user fields.
  std::vector<std::string> declared_names;
  // Structured persona text from the task record; triggers the background line.
  std::optional<std::string> structured_persona;
};

ScenarioSplit separate_directives(const std::string& scenario, Gateway& gateway, const SeparationOptions& options = {});
std::string separation_prompt(const std::string& scenario, const std::optional<std::string>& structured_persona);

PersonaBlock format_persona(const UserProfile& profile);

// Inverse of format_persona for the sections it renders.
struct ParsedPersona {
  std::vector<std::pair<DemographicField, FieldValue>> demographics;  // supporting_count not rendered
  std::optional<std::string> background;
  std::vector<std::pair<std::string, std::vector<std::string>>> commands;
};
ParsedPersona parse_persona(std::string_view rendered);

enum class GuidelineMode { grounded, baseline };

std::string simulation_guidelines(GuidelineMode mode);

PromptBundle assemble_prompt(const std::string& guidelines, const ScenarioSplit& split,
                             const std::optional<PersonaBlock>& persona);
// Original-condition shape: the raw scenario, directives included.
PromptBundle assemble_original_prompt(const std::string& guidelines, const std::string& raw_scenario);

// The fixed persona_override wrapper with {persona_block} substituted.
std::string persona_override_block(const PersonaBlock& persona);

}  // namespace groundsim
