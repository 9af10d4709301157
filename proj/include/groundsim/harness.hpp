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
#include "groundsim/metrics.hpp"
#include "groundsim/persona.hpp"
#include "groundsim/profiling.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace groundsim {

enum class TaskDomain { airline, retail, custom };

std::string to_string(TaskDomain d);
TaskDomain task_domain_from_string(const std::string& s);

struct EvalTask {
  std::string task_id;
  TaskDomain domain = TaskDomain::custom;
  std::string raw_scenario;
  std::optional<ScenarioSplit> split;
  std::optional<std::string> structured_persona;
  std::vector<std::string> declared_names;
};

nlohmann::json to_json(const EvalTask& t);
EvalTask eval_task_from_json(const nlohmann::json& j);
std::vector<EvalTask> load_tasks(const std::filesystem::path& path);

// Fills `split` for every task that lacks one.
void separate_tasks(std::vector<EvalTask>& tasks, Gateway& gateway, const std::string& model = "gpt-4o");

struct PersonaAssignment {
  std::uint64_t seed = 0;
  std::string pool_name = "all";
  std::map<std::string, std::string> task_to_profile;
};

nlohmann::json to_json(const PersonaAssignment& a);
PersonaAssignment assignment_from_json(const nlohmann::json& j);

// Uniform sampling with replacement, one draw per task in task order.
PersonaAssignment assign_personas(const std::vector<EvalTask>& tasks, const std::vector<UserProfile>& pool,
                                  std::uint64_t seed, std::string pool_name = "all");

enum class PoolCriterion { high_edu, low_edu, young, oldest, all };

std::string to_string(PoolCriterion c);
PoolCriterion pool_criterion_from_string(const std::string& s);

struct PoolRules {
  std::set<std::string> high_edu{"bachelor's degree", "master's degree", "doctoral degree"};
  std::set<std::string> low_edu{"no formal education", "primary education", "high school", "some college",
                                "associate degree"};
  std::set<std::string> young{"under 18", "18-24"};
  std::set<std::string> oldest{"55-64", "65+"};

  static PoolRules from_json(const nlohmann::json& j);
};

// Profiles whose field value belongs to the criterion's category set.
// Throws EmptyPool when nothing qualifies.
std::vector<UserProfile> select_pool(const std::vector<UserProfile>& profiles, PoolCriterion criterion,
                                     const PoolRules& rules = {});

inline constexpr std::string_view kPerfectUserVersion = "perfect-user-v1";
PersonaBlock perfect_user_persona();

// --- task environments ----------------------------------------------------

struct ToolCall {
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();
};

class TaskEnvironment {
 public:
  virtual ~TaskEnvironment() = default;
  // Returns the initial observation shown to the agent. Throws
  // EnvironmentError for tasks the environment does not know.
  virtual std::string reset(const EvalTask& task) = 0;
  virtual std::string step(const ToolCall& call) = 0;
  virtual bool is_success() const = 0;
  // Tool descriptions placed in the agent's system prompt.
  virtual std::string tool_manifest() const = 0;
};

using EnvironmentFactory = std::function<std::unique_ptr<TaskEnvironment>()>;

// Scripted airline desk with three hand-authored tasks ("42", "27", "47").
std::unique_ptr<TaskEnvironment> make_mock_airline_environment();
std::vector<EvalTask> mock_airline_tasks();

// External process speaking line-delimited JSON on stdin/stdout:
//   {"op":"reset","task":{...}}          -> {"observation": "...", "tools": "..."}
//   {"op":"step","name":..,"arguments":..} -> {"observation": "..."}
//   {"op":"is_success"}                  -> {"success": true|false}
std::unique_ptr<TaskEnvironment> make_process_environment(const std::string& command);

// "mock" or "adapter:<path>".
EnvironmentFactory environment_factory(const std::string& spec);

// --- runs -----------------------------------------------------------------

enum class RunCondition { original, np, persona, perfect };

std::string to_string(RunCondition c);
RunCondition run_condition_from_string(const std::string& s);

struct HarnessConfig {
  std::string sim_model = "gpt-4o";
  std::string agent_model = "gpt-4o";
  double sim_temperature = 0.7;
  double agent_temperature = 0.0;
  int max_user_turns = 15;
  int max_tool_steps = 10;  // per agent turn
  int max_output = 1024;
  int workers = 4;
  GuidelineMode guidelines = GuidelineMode::grounded;
};

inline constexpr std::string_view kToolCallOpen = "<tool_call>";
inline constexpr std::string_view kToolCallClose = "</tool_call>";
inline constexpr std::string_view kToolResultOpen = "<tool_result>";
inline constexpr std::string_view kToolResultClose = "</tool_result>";

std::string tool_agent_system_prompt(const std::string& manifest, const std::string& initial_observation);

struct TaskOutcome {
  std::string task_id;
  bool success = false;
  std::optional<std::string> profile_id;
  std::string diagnostic;
  std::vector<Turn> transcript;
  std::string simulator_prompt;
};

struct RunResult {
  RunCondition condition = RunCondition::np;
  std::string sim_model;
  std::string agent_model;
  std::uint64_t seed = 0;
  TaskDomain domain = TaskDomain::custom;
  std::string pool_name;
  std::vector<TaskOutcome> outcomes;
  double success_rate = 0.0;

  void recompute_rate();
};

// Transcripts are written separately; to_json keeps only per-task outcomes.
nlohmann::json to_json(const RunResult& r);
RunResult run_result_from_json(const nlohmann::json& j);

// Simulator system prompt for one task under a condition.
std::string harness_simulator_prompt(const EvalTask& task, RunCondition condition,
                                     const std::optional<PersonaBlock>& persona, const HarnessConfig& cfg);

RunResult run_condition(const std::vector<EvalTask>& tasks, RunCondition condition,
                        const std::optional<PersonaAssignment>& assignment,
                        const std::map<std::string, UserProfile>& profiles, const HarnessConfig& cfg,
                        const EnvironmentFactory& environment, Gateway& gateway, std::uint64_t seed = 7);

// --- reports --------------------------------------------------------------

inline const std::vector<std::string> kDefaultModelOrder{"gpt-4o",      "gpt-5-mini",  "gpt-5",
                                                         "llama-3-70b", "gpt-oss-20b", "claude-3-sonnet"};
inline constexpr std::array<std::uint64_t, 3> kDefaultSeeds{7, 8, 9};

struct AggregateOptions {
  std::vector<std::string> model_order = kDefaultModelOrder;
  std::vector<std::string> pool_columns{"high_edu", "low_edu", "young", "oldest", "perfect"};
};

struct ModelRow {
  std::string model;
  std::optional<double> orig, np, persona, delta, range;
  std::map<std::string, std::optional<double>> pools;
};

struct DomainTable {
  TaskDomain domain;
  std::size_t task_count = 0;
  std::vector<ModelRow> rows;
  ModelRow mean;
};

struct AggregateReport {
  std::vector<DomainTable> domains;
  std::vector<std::string> pool_columns;  // only those present in the results
  std::vector<std::string> notes;         // IncompleteGrid diagnostics

  std::string render_text() const;
  std::string render_tsv() const;
  std::string render_pools_text() const;
};

// Rates are percentages. Persona = mean over seeds of pool "all" runs;
// Δ = Persona − NP; range = max − min over seeds; mean row = unweighted
// mean over models, blank when any model cell is missing.
AggregateReport aggregate_runs(const std::vector<RunResult>& results, const AggregateOptions& options = {});

struct SensitivityReport {
  std::string label;
  MetricBundle with_directives;
  MetricBundle without_directives;

  std::string render_text() const;
  std::string render_tsv() const;
};

std::vector<std::vector<std::string>> user_messages(const std::vector<TaskOutcome>& outcomes);

SensitivityReport directive_sensitivity_report(const std::vector<std::vector<std::string>>& orig_conversations,
                                               const std::vector<std::vector<std::string>>& np_conversations,
                                               std::string label = {}, const MetricLexicons& lexicons = {});

}  // namespace groundsim
