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

// Frozen reference values. Each mean row is the column mean of the model
// rows above it.

#include <array>
#include <string_view>

namespace expected {

// Per-dimension match rates (%) in dimension order: persona/affect,
// linguistic style, tech competency, interaction flow, pacing.
inline constexpr std::array<double, 5> kBaselineRates{7.2, 6.2, 93.3, 7.7, 6.5};
inline constexpr std::array<double, 5> kProfileRates{39.0, 26.2, 93.2, 36.0, 32.0};
inline constexpr std::string_view kBaselineOverall = "24.2";
inline constexpr std::string_view kProfileOverall = "45.3";

struct ModelRates {
  std::string_view model;
  double orig;
  double np;
  double persona;
};

inline constexpr std::array<ModelRates, 6> kAirline{{
    {"gpt-4o", 52.0, 50.0, 41.3},
    {"gpt-5-mini", 42.0, 48.0, 46.0},
    {"gpt-5", 46.0, 48.0, 44.7},
    {"llama-3-70b", 56.0, 54.0, 44.0},
    {"gpt-oss-20b", 44.0, 38.0, 45.3},
    {"claude-3-sonnet", 52.0, 52.0, 49.3},
}};

inline constexpr std::array<ModelRates, 6> kRetail{{
    {"gpt-4o", 60.5, 77.2, 74.0},
    {"gpt-5-mini", 49.1, 50.9, 56.6},
    {"gpt-5", 75.4, 77.2, 71.6},
    {"llama-3-70b", 64.0, 69.3, 63.2},
    {"gpt-oss-20b", 53.5, 63.2, 47.7},
    {"claude-3-sonnet", 65.8, 72.8, 76.3},
}};

// Mean row: Orig, NP, Persona, Delta.
inline constexpr std::array<std::string_view, 4> kAirlineMean{"48.7", "48.3", "45.1", "-3.2"};
inline constexpr std::array<std::string_view, 4> kRetailMean{"61.4", "68.4", "64.9", "-3.5"};

inline constexpr std::array<std::string_view, 6> kAirlineDeltas{"-8.7", "-2.0", "-3.3", "-10.0", "+7.3", "-2.7"};
inline constexpr std::array<std::string_view, 6> kRetailDeltas{"-3.2", "+5.7", "-5.6", "-6.1", "-15.5", "+3.5"};

// Airline demographic pools: NP, High-Edu, Low-Edu, Young, Oldest, Perfect.
inline constexpr std::array<std::array<double, 6>, 6> kAirlinePools{{
    {50.0, 46.0, 50.0, 50.0, 52.0, 46.0},
    {48.0, 36.0, 48.0, 39.2, 38.0, 42.0},
    {48.0, 40.0, 40.0, 46.0, 48.0, 50.0},
    {54.0, 50.0, 40.0, 58.0, 46.0, 46.0},
    {38.0, 44.0, 44.0, 46.0, 34.0, 36.0},
    {52.0, 48.0, 58.0, 48.0, 46.0, 54.0},
}};

// Anti-leakage composition of the 600-case benchmark.
inline constexpr int kStrippedAll = 150;
inline constexpr int kRemovedTagged = 380;
inline constexpr int kUnchanged = 70;

// Demographic inference accuracy: gender 35/41, overall 170/264.
inline constexpr std::string_view kGenderAccuracy = "85.4";
inline constexpr std::string_view kOverallAccuracy = "64.4";

inline constexpr int kAgentMessageCap = 9;

// Persona wrapper, verbatim.
inline constexpr std::string_view kOverrideHead =
    "<persona_override>\n"
    "CRITICAL: You MUST adopt the following real user's communication style for ALL your messages. "
    "This takes HIGHEST priority --- every message you write must follow these style rules, even while "
    "completing the scenario above. The scenario tells you WHAT to say; the persona tells you HOW to say it.\n"
    "\n";
inline constexpr std::string_view kOverrideTail =
    "\n"
    "\n"
    "Remember: Follow the scenario instructions for content and task flow, but express everything using "
    "this persona's writing style. If the persona uses lowercase, you use lowercase. If the persona omits "
    "punctuation, you omit punctuation. If the persona writes short terse messages, you write short terse "
    "messages. Never fall back to generic polite assistant-like language.\n"
    "</persona_override>";

// Persona block for the fixture profile: demographics and three commands.
inline constexpr std::string_view kFixturePersonaBlock =
    "Demographics:\n"
    "- Age: 18-24 (source: extracted)\n"
    "- Education: bachelor's degree (source: extracted)\n"
    "- Location: Hong Kong (source: extracted)\n"
    "- Gender: female (source: inferred)\n"
    "\n"
    "Communication Style Instructions:\n"
    "Command: Use mixed casing with a tendency towards lowercase, especially at the beginning of sentences.\n"
    "Examples: \"i wanna share a place\", \"i want to talk about a tourist city\"\n"
    "\n"
    "Command: Avoid using terminal punctuation in one-line responses.\n"
    "Examples: \"please check it\", \"make it shorter and 4 sentences\"\n"
    "\n"
    "Command: Use filler words like \"ahhh\" and \"hmm\" to convey hesitation or thought.\n"
    "Examples: \"ahhh, my emotion was not good\", \"hmm, actually found things too high to sell\"";

}  // namespace expected
