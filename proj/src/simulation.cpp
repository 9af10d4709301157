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

#include "groundsim/simulation.hpp"

#include "groundsim/structured.hpp"
#include "groundsim/text.hpp"

namespace groundsim {

namespace {
using json = nlohmann::json;
}

void SimConfig::validate() const {
  if (max_agent_messages < 1) throw InvalidRequest("max_agent_messages must be >= 1");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::user_signal: return "user_signal";
    case Termination::cap_reached: return "cap_reached";
    case Termination::error: return "error";
  }
  return "error";
}

std::string to_string(SimCondition c) { return c == SimCondition::baseline ? "baseline" : "with_profile"; }

SimCondition sim_condition_from_string(const std::string& s) {
  if (s == "baseline") return SimCondition::baseline;
  if (s == "with_profile" || s == "profile") return SimCondition::with_profile;
  throw InvalidRequest("unknown condition: " + s);
}

std::size_t SimTrajectory::assistant_count() const {
  std::size_t n = 0;
  for (const auto& t : turns) n += t.role == Speaker::assistant;
  return n;
}

json to_json(const TaskSpec& s) {
  return {{"problem_description", s.problem_description},
          {"solution_conditions", s.solution_conditions},
          {"source_conversation_id", s.source_conversation_id}};
}

TaskSpec task_spec_from_json(const json& j) {
  return {j.at("problem_description").get<std::string>(),
          j.at("solution_conditions").get<std::vector<std::string>>(),
          j.value("source_conversation_id", std::string())};
}

json to_json(const SimTrajectory& t) {
  json j;
  j["case_id"] = t.case_id;
  j["condition"] = to_string(t.condition);
  if (t.profile_id) j["profile_id"] = *t.profile_id;
  j["turns"] = json::array();
  for (const auto& turn : t.turns) j["turns"].push_back({{"role", to_string(turn.role)}, {"content", turn.content}});
  j["terminated_by"] = to_string(t.terminated_by);
  return j;
}

SimTrajectory trajectory_from_json(const json& j) {
  SimTrajectory t;
  t.case_id = j.value("case_id", std::string());
  t.condition = sim_condition_from_string(j.value("condition", std::string("baseline")));
  if (j.contains("profile_id") && j["profile_id"].is_string()) t.profile_id = j["profile_id"].get<std::string>();
  int idx = 0;
  for (const auto& turn : j.at("turns")) {
    t.turns.push_back({turn.at("role").get<std::string>() == "user" ? Speaker::user : Speaker::assistant,
                       turn.at("content").get<std::string>(), idx++});
  }
  const auto term = j.value("terminated_by", std::string("error"));
  t.terminated_by = term == "user_signal"   ? Termination::user_signal
                    : term == "cap_reached" ? Termination::cap_reached
                                            : Termination::error;
  return t;
}

std::string task_spec_prompt(const Conversation& conv) {
  std::string p =
      "Below is the opening of a real conversation between a user and an AI assistant.\n"
      "Describe the user's underlying problem in a few sentences, written as instructions to someone "
      "who will play this user (\"You want to ...\"), and list the conditions under which the user "
      "would consider the problem solved.\n"
      "Reply with JSON only: {\"problem_description\": \"...\", \"solution_conditions\": [\"...\"]}\n\n"
      "<conversation>\n";
  const std::size_t n = std::min(conv.turns.size(), kTaskSpecWindow);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = conv.turns[i];
    p += (t.role == Speaker::user ? "USER: " : "ASSISTANT: ") + t.content + "\n";
  }
  p += "</conversation>";
  return p;
}

TaskSpec extract_task_spec(const Conversation& conv, Gateway& gateway, const TaskSpecOptions& options) {
  if (conv.user_turn_count() == 0) throw InvalidRequest("conversation has no user turns");
  ChatRequest req;
  req.purpose = "task_spec";
  req.model_name = options.model;
  req.temperature = options.temperature;
  req.max_output = 1024;
  req.messages = {{Role::system, "You turn conversation logs into task specifications. Answer with JSON only."},
                  {Role::user, task_spec_prompt(conv)}};
  auto parse = [&](const std::string& reply) {
    auto j = extract_json_object(reply);
    TaskSpec spec;
    spec.problem_description = text::trim(j.value("problem_description", std::string()));
    if (spec.problem_description.empty()) throw ParseError("missing problem_description");
    for (const auto& c : j.value("solution_conditions", json::array())) {
      if (c.is_string() && !text::is_blank(c.get<std::string>())) spec.solution_conditions.push_back(text::trim(c.get<std::string>()));
    }
    if (spec.solution_conditions.empty()) throw ParseError("no solution_conditions");
    spec.source_conversation_id = conv.conversation_id;
    return spec;
  };
  return complete_structured<SpecParseError>(
      gateway, req, parse, "Reply again with only the JSON object; include at least one solution condition.");
}

std::string render_task_scenario(const TaskSpec& spec) {
  std::string s = spec.problem_description + "\n\nYou are satisfied when:";
  for (const auto& c : spec.solution_conditions) s += "\n- " + c;
  return s;
}

std::string simulator_system_prompt(const TaskSpec& spec, const std::optional<UserProfile>& profile) {
  ScenarioSplit split;
  split.task_only = render_task_scenario(spec);
  std::optional<PersonaBlock> persona;
  if (profile) persona = format_persona(*profile);
  return assemble_prompt(simulation_guidelines(GuidelineMode::grounded), split, persona).system_prompt;
}

bool carries_termination(std::string_view message) {
  const std::string t = text::trim(message);
  return t.size() >= kTerminationToken.size() && t.compare(t.size() - kTerminationToken.size(), std::string::npos,
                                                            kTerminationToken) == 0;
}

SimTrajectory run_paired_simulation(const TaskSpec& spec, const std::optional<UserProfile>& profile,
                                    const SimConfig& cfg, Gateway& gateway, std::string case_id) {
  cfg.validate();
  SimTrajectory traj;
  traj.case_id = std::move(case_id);
  traj.condition = profile ? SimCondition::with_profile : SimCondition::baseline;
  if (profile) traj.profile_id = profile->user_id;

  const std::string sim_system = simulator_system_prompt(spec, profile);
  auto push = [&](Speaker role, std::string content) {
    traj.turns.push_back({role, std::move(content), static_cast<int>(traj.turns.size())});
  };

  while (true) {
    ChatRequest sim;
    sim.purpose = "simulator";
    sim.model_name = cfg.sim_model;
    sim.temperature = cfg.sim_temperature;
    sim.max_output = cfg.max_output;
    sim.seed = cfg.seed;
    sim.messages.push_back({Role::system, sim_system});
    // From the simulator's side the roles are mirrored.
    for (const auto& t : traj.turns) {
      sim.messages.push_back({t.role == Speaker::user ? Role::assistant : Role::user, t.content});
    }
    std::string user_msg;
    try {
      user_msg = gateway.complete(sim).content;
    } catch (const GatewayError& e) {
      traj.terminated_by = Termination::error;
      throw SimulationError(std::string("simulator call failed: ") + e.what(), traj);
    }
    if (text::is_blank(user_msg)) {
      traj.terminated_by = Termination::error;
      return traj;
    }
    push(Speaker::user, user_msg);
    if (carries_termination(user_msg)) {
      traj.terminated_by = Termination::user_signal;
      return traj;
    }

    ChatRequest agent;
    agent.purpose = "agent";
    agent.model_name = cfg.agent_model;
    agent.temperature = cfg.agent_temperature;
    agent.max_output = cfg.max_output;
    agent.seed = cfg.seed;
    agent.messages.push_back({Role::system, std::string(kAgentSystemPrompt)});
    for (const auto& t : traj.turns) {
      agent.messages.push_back({t.role == Speaker::user ? Role::user : Role::assistant, t.content});
    }
    std::string reply;
    try {
      reply = gateway.complete(agent).content;
    } catch (const GatewayError& e) {
      traj.terminated_by = Termination::error;
      throw SimulationError(std::string("agent call failed: ") + e.what(), traj);
    }
    push(Speaker::assistant, text::is_blank(reply) ? std::string("(no response)") : reply);
    if (static_cast<int>(traj.assistant_count()) >= cfg.max_agent_messages) {
      traj.terminated_by = Termination::cap_reached;
      return traj;
    }
  }
}

}  // namespace groundsim
