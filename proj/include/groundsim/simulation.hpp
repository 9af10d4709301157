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
#include "groundsim/persona.hpp"
#include "groundsim/profiling.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace groundsim {

inline constexpr std::size_t kTaskSpecWindow = 10;  // messages, both roles

struct TaskSpec {
  std::string problem_description;
  std::vector<std::string> solution_conditions;
  std::string source_conversation_id;

  bool operator==(const TaskSpec&) const = default;
};

nlohmann::json to_json(const TaskSpec& s);
TaskSpec task_spec_from_json(const nlohmann::json& j);

struct SimConfig {
  int max_agent_messages = 9;
  double sim_temperature = 0.7;
  double agent_temperature = 0.7;
  std::string sim_model = "gpt-4o";
  std::string agent_model = "gpt-4o";
  std::int64_t seed = 7;
  int max_output = 1024;

  void validate() const;
};

enum class Termination { user_signal, cap_reached, error };
enum class SimCondition { baseline, with_profile };

std::string to_string(Termination t);
std::string to_string(SimCondition c);
SimCondition sim_condition_from_string(const std::string& s);

struct SimTrajectory {
  std::string case_id;
  std::vector<Turn> turns;
  Termination terminated_by = Termination::error;
  SimCondition condition = SimCondition::baseline;
  std::optional<std::string> profile_id;

  std::size_t assistant_count() const;
  bool operator==(const SimTrajectory&) const = default;
};

nlohmann::json to_json(const SimTrajectory& t);
SimTrajectory trajectory_from_json(const nlohmann::json& j);

// Raised when the gateway fails mid-dialogue; carries what was recorded.
class SimulationError : public GatewayError {
 public:
  SimulationError(const std::string& what, SimTrajectory partial)
      : GatewayError(what), partial_(std::move(partial)) {}
  const SimTrajectory& partial() const { return partial_; }

 private:
  SimTrajectory partial_;
};

struct TaskSpecOptions {
  std::string model = "gpt-4o";
  double temperature = 0.0;
};

std::string task_spec_prompt(const Conversation& conv);
TaskSpec extract_task_spec(const Conversation& conv, Gateway& gateway, const TaskSpecOptions& options = {});

// Scenario text a simulator receives for a task specification.
std::string render_task_scenario(const TaskSpec& spec);

// Exact simulator system prompt for either arm. The baseline arm uses the
// same grounded guidelines text so the arms differ only by the persona block.
std::string simulator_system_prompt(const TaskSpec& spec, const std::optional<UserProfile>& profile);

inline constexpr std::string_view kAgentSystemPrompt =
    "You are a helpful assistant. Answer the user's requests accurately and clearly.";

bool carries_termination(std::string_view message);

SimTrajectory run_paired_simulation(const TaskSpec& spec, const std::optional<UserProfile>& profile,
                                    const SimConfig& cfg, Gateway& gateway, std::string case_id = {});

}  // namespace groundsim
