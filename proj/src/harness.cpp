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

#include "groundsim/harness.hpp"

#include "groundsim/error.hpp"
#include "groundsim/jsonl.hpp"
#include "groundsim/parallel.hpp"
#include "groundsim/report_math.hpp"
#include "groundsim/rng.hpp"
#include "groundsim/simulation.hpp"
#include "groundsim/structured.hpp"
#include "groundsim/text.hpp"

#include <algorithm>

namespace groundsim {

std::string to_string(TaskDomain d) {
  switch (d) {
    case TaskDomain::airline: return "airline";
    case TaskDomain::retail: return "retail";
    case TaskDomain::custom: return "custom";
  }
  return "custom";
}

TaskDomain task_domain_from_string(const std::string& s) {
  const auto l = text::to_lower(s);
  if (l == "airline") return TaskDomain::airline;
  if (l == "retail") return TaskDomain::retail;
  if (l == "custom" || l.empty()) return TaskDomain::custom;
  throw InvalidRequest("unknown task domain: " + s);
}

json to_json(const EvalTask& t) {
  json j{{"task_id", t.task_id}, {"domain", to_string(t.domain)}, {"raw_scenario", t.raw_scenario}};
  if (t.structured_persona) j["structured_persona"] = *t.structured_persona;
  if (!t.declared_names.empty()) j["declared_names"] = t.declared_names;
  if (t.split) {
    json s{{"task_only", t.split->task_only}, {"directives", t.split->directives}};
    if (t.split->user_background) s["user_background"] = *t.split->user_background;
    j["split"] = s;
  }
  return j;
}

EvalTask eval_task_from_json(const json& j) {
  EvalTask t;
  const auto& id = j.at("task_id");
  t.task_id = id.is_string() ? id.get<std::string>() : id.dump();
  t.domain = task_domain_from_string(j.value("domain", std::string("custom")));
  t.raw_scenario = j.at("raw_scenario").get<std::string>();
  if (j.contains("structured_persona") && j["structured_persona"].is_string()) {
    t.structured_persona = j["structured_persona"].get<std::string>();
  }
  t.declared_names = j.value("declared_names", std::vector<std::string>{});
  if (j.contains("split") && j["split"].is_object()) {
    const auto& s = j["split"];
    ScenarioSplit split;
    split.task_only = s.at("task_only").get<std::string>();
    split.directives = s.value("directives", std::vector<std::string>{});
    if (s.contains("user_background") && s["user_background"].is_string()) {
      split.user_background = s["user_background"].get<std::string>();
    }
    t.split = std::move(split);
  }
  return t;
}

std::vector<EvalTask> load_tasks(const std::filesystem::path& path) {
  std::vector<EvalTask> tasks;
  for (const auto& r : read_json_lines(path).records) tasks.push_back(eval_task_from_json(r));
  if (tasks.empty()) throw InvalidRequest("no tasks in " + path.string());
  return tasks;
}

void separate_tasks(std::vector<EvalTask>& tasks, Gateway& gateway, const std::string& model) {
  for (auto& t : tasks) {
    if (t.split) continue;
    SeparationOptions opts;
    opts.model = model;
    opts.declared_names = t.declared_names;
    opts.structured_persona = t.structured_persona;
    t.split = separate_directives(t.raw_scenario, gateway, opts);
  }
}

json to_json(const PersonaAssignment& a) {
  return {{"seed", a.seed}, {"pool_name", a.pool_name}, {"mapping", a.task_to_profile}};
}

PersonaAssignment assignment_from_json(const json& j) {
  PersonaAssignment a;
  a.seed = j.value("seed", std::uint64_t{0});
  a.pool_name = j.value("pool_name", std::string("all"));
  a.task_to_profile = j.at("mapping").get<std::map<std::string, std::string>>();
  return a;
}

PersonaAssignment assign_personas(const std::vector<EvalTask>& tasks, const std::vector<UserProfile>& pool,
                                  std::uint64_t seed, std::string pool_name) {
  if (pool.empty()) throw EmptyPool("persona pool '" + pool_name + "' is empty");
  PersonaAssignment a;
  a.seed = seed;
  a.pool_name = std::move(pool_name);
  SeededRng rng(seed);
  for (const auto& t : tasks) a.task_to_profile[t.task_id] = pool[rng.below(pool.size())].user_id;
  return a;
}

std::string to_string(PoolCriterion c) {
  switch (c) {
    case PoolCriterion::high_edu: return "high_edu";
    case PoolCriterion::low_edu: return "low_edu";
    case PoolCriterion::young: return "young";
    case PoolCriterion::oldest: return "oldest";
    case PoolCriterion::all: return "all";
  }
  return "all";
}

PoolCriterion pool_criterion_from_string(const std::string& s) {
  for (auto c : {PoolCriterion::high_edu, PoolCriterion::low_edu, PoolCriterion::young, PoolCriterion::oldest,
                 PoolCriterion::all}) {
    if (to_string(c) == s) return c;
  }
  throw InvalidRequest("unknown pool: " + s);
}

PoolRules PoolRules::from_json(const json& j) {
  PoolRules r;
  auto load = [&](const char* key, std::set<std::string>& dst) {
    if (j.contains(key)) dst = j[key].get<std::set<std::string>>();
  };
  load("high_edu", r.high_edu);
  load("low_edu", r.low_edu);
  load("young", r.young);
  load("oldest", r.oldest);
  return r;
}

std::vector<UserProfile> select_pool(const std::vector<UserProfile>& profiles, PoolCriterion criterion,
                                     const PoolRules& rules) {
  std::vector<UserProfile> pool;
  for (const auto& p : profiles) {
    bool keep = false;
    auto in = [&](DemographicField f, const std::set<std::string>& cats) {
      const auto* v = p.demographics.get(f);
      return v && cats.count(text::to_lower(v->value)) > 0;
    };
    switch (criterion) {
      case PoolCriterion::all: keep = true; break;
      case PoolCriterion::high_edu: keep = in(DemographicField::education, rules.high_edu); break;
      case PoolCriterion::low_edu: keep = in(DemographicField::education, rules.low_edu); break;
      case PoolCriterion::young: keep = in(DemographicField::age, rules.young); break;
      case PoolCriterion::oldest: keep = in(DemographicField::age, rules.oldest); break;
    }
    if (keep) pool.push_back(p);
  }
  if (pool.empty()) throw EmptyPool("no profiles qualify for pool " + to_string(criterion));
  return pool;
}

PersonaBlock perfect_user_persona() {
  UserProfile p;
  p.user_id = "perfect_user";
  auto add = [&](StyleDimension d, const char* cmd) { p.manual.commands.push_back({cmd, {}, d}); };
  add(StyleDimension::intent_density,
      "State every relevant detail up front: your user id, the exact reservation or order numbers, and exactly "
      "what you want done.");
  add(StyleDimension::intent_density, "Answer each of the assistant's questions directly and completely.");
  add(StyleDimension::formality,
      "Confirm decisively when the assistant proposes the action you asked for, and decline clearly when it does "
      "not match your goal.");
  add(StyleDimension::formality, "Stay polite and cooperative, and never express frustration.");
  add(StyleDimension::capitalization, "Write clear, complete sentences with standard capitalization and punctuation.");
  add(StyleDimension::message_length, "Keep each message to one to three sentences.");
  return format_persona(p);
}

std::string to_string(RunCondition c) {
  switch (c) {
    case RunCondition::original: return "original";
    case RunCondition::np: return "np";
    case RunCondition::persona: return "persona";
    case RunCondition::perfect: return "perfect";
  }
  return "np";
}

RunCondition run_condition_from_string(const std::string& s) {
  const auto l = text::to_lower(s);
  if (l == "original" || l == "orig") return RunCondition::original;
  if (l == "np" || l == "no_persona") return RunCondition::np;
  if (l == "persona") return RunCondition::persona;
  if (l == "perfect") return RunCondition::perfect;
  throw InvalidRequest("unknown condition: " + s);
}

std::string tool_agent_system_prompt(const std::string& manifest, const std::string& initial_observation) {
  std::string p =
      "You are a customer service agent. Help the user with their request using the tools below, and follow "
      "the desk policy. Confirm what you did in plain language once you are finished.\n\n"
      "To call a tool, reply with nothing but ";
  p += kToolCallOpen;
  p += "{\"name\": \"<tool>\", \"arguments\": {...}}";
  p += kToolCallClose;
  p += ". The result comes back as ";
  p += kToolResultOpen;
  p += "...";
  p += kToolResultClose;
  p += ".\n\nTools:\n" + manifest + "\n\nDesk state:\n" + initial_observation;
  return p;
}

void RunResult::recompute_rate() {
  if (outcomes.empty()) {
    success_rate = 0.0;
    return;
  }
  const auto wins = std::count_if(outcomes.begin(), outcomes.end(), [](const TaskOutcome& o) { return o.success; });
  success_rate = static_cast<double>(wins) / static_cast<double>(outcomes.size());
}

json to_json(const RunResult& r) {
  json outs = json::array();
  for (const auto& o : r.outcomes) {
    json jo{{"task_id", o.task_id}, {"success", o.success}};
    if (o.profile_id) jo["profile_id"] = *o.profile_id;
    if (!o.diagnostic.empty()) jo["diagnostic"] = o.diagnostic;
    outs.push_back(jo);
  }
  return {{"condition", to_string(r.condition)}, {"sim_model", r.sim_model},   {"agent_model", r.agent_model},
          {"seed", r.seed},                      {"domain", to_string(r.domain)}, {"pool_name", r.pool_name},
          {"success_rate", r.success_rate},      {"outcomes", outs}};
}

RunResult run_result_from_json(const json& j) {
  RunResult r;
  r.condition = run_condition_from_string(j.at("condition").get<std::string>());
  r.sim_model = j.at("sim_model").get<std::string>();
  r.agent_model = j.value("agent_model", std::string());
  r.seed = j.value("seed", std::uint64_t{0});
  r.domain = task_domain_from_string(j.value("domain", std::string("custom")));
  r.pool_name = j.value("pool_name", std::string());
  for (const auto& o : j.value("outcomes", json::array())) {
    TaskOutcome t;
    t.task_id = o.at("task_id").is_string() ? o["task_id"].get<std::string>() : o["task_id"].dump();
    t.success = o.at("success").get<bool>();
    if (o.contains("profile_id") && o["profile_id"].is_string()) t.profile_id = o["profile_id"].get<std::string>();
    t.diagnostic = o.value("diagnostic", std::string());
    r.outcomes.push_back(std::move(t));
  }
  if (r.outcomes.empty()) {
    r.success_rate = j.value("success_rate", 0.0);
  } else {
    r.recompute_rate();
  }
  return r;
}

std::string harness_simulator_prompt(const EvalTask& task, RunCondition condition,
                                     const std::optional<PersonaBlock>& persona, const HarnessConfig& cfg) {
  const auto guidelines = simulation_guidelines(cfg.guidelines);
  if (condition == RunCondition::original) return assemble_original_prompt(guidelines, task.raw_scenario).system_prompt;
  if (!task.split) throw InvalidRequest("task " + task.task_id + " has no directive split; run separation first");
  if (condition == RunCondition::np) return assemble_prompt(guidelines, *task.split, std::nullopt).system_prompt;
  if (!persona) throw InvalidRequest("condition " + to_string(condition) + " needs a persona");
  return assemble_prompt(guidelines, *task.split, persona).system_prompt;
}

namespace {

std::optional<ToolCall> parse_tool_call(const std::string& reply) {
  const auto open = reply.find(kToolCallOpen);
  if (open == std::string::npos) return std::nullopt;
  const auto body_start = open + kToolCallOpen.size();
  const auto close = reply.find(kToolCallClose, body_start);
  const auto body = reply.substr(body_start, close == std::string::npos ? std::string::npos : close - body_start);
  const auto j = json::parse(body, nullptr, false);
  ToolCall call;
  if (j.is_discarded() || !j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    call.name = "";
    return call;
  }
  call.name = j["name"].get<std::string>();
  if (j.contains("arguments") && j["arguments"].is_object()) call.arguments = j["arguments"];
  return call;
}

TaskOutcome run_task(const EvalTask& task, const std::string& sim_prompt, const HarnessConfig& cfg,
                     const EnvironmentFactory& environment, Gateway& gateway, std::uint64_t seed) {
  TaskOutcome out;
  out.task_id = task.task_id;
  out.simulator_prompt = sim_prompt;
  auto env = environment();
  const std::string agent_system = tool_agent_system_prompt(env->tool_manifest(), env->reset(task));
  std::vector<ChatMessage> agent_log;

  auto push = [&](Speaker role, std::string content) {
    out.transcript.push_back({role, std::move(content), static_cast<int>(out.transcript.size())});
  };

  for (int turn = 0; turn < cfg.max_user_turns; ++turn) {
    ChatRequest sim;
    sim.purpose = "simulator";
    sim.model_name = cfg.sim_model;
    sim.temperature = cfg.sim_temperature;
    sim.max_output = cfg.max_output;
    sim.seed = static_cast<std::int64_t>(seed);
    sim.messages.push_back({Role::system, sim_prompt});
    for (const auto& t : out.transcript) {
      sim.messages.push_back({t.role == Speaker::user ? Role::assistant : Role::user, t.content});
    }
    const auto user_msg = gateway.complete(sim).content;
    if (text::is_blank(user_msg)) {
      out.diagnostic = "simulator returned an empty message";
      break;
    }
    push(Speaker::user, user_msg);
    if (carries_termination(user_msg)) break;

    agent_log.push_back({Role::user, user_msg});
    std::optional<std::string> final_reply;
    for (int step = 0; step < cfg.max_tool_steps && !final_reply; ++step) {
      ChatRequest agent;
      agent.purpose = "tool_agent";
      agent.model_name = cfg.agent_model;
      agent.temperature = cfg.agent_temperature;
      agent.max_output = cfg.max_output;
      agent.seed = static_cast<std::int64_t>(seed);
      agent.messages.push_back({Role::system, agent_system});
      agent.messages.insert(agent.messages.end(), agent_log.begin(), agent_log.end());
      const auto reply = gateway.complete(agent).content;
      agent_log.push_back({Role::assistant, reply});
      if (auto call = parse_tool_call(reply)) {
        std::string obs = call->name.empty() ? "error: malformed tool call" : env->step(*call);
        agent_log.push_back({Role::user, std::string(kToolResultOpen) + obs + std::string(kToolResultClose)});
      } else {
        final_reply = reply;
      }
    }
    push(Speaker::assistant, final_reply.value_or("(agent exceeded the tool step limit)"));
  }
  out.success = env->is_success();
  return out;
}

}  // namespace

RunResult run_condition(const std::vector<EvalTask>& tasks, RunCondition condition,
                        const std::optional<PersonaAssignment>& assignment,
                        const std::map<std::string, UserProfile>& profiles, const HarnessConfig& cfg,
                        const EnvironmentFactory& environment, Gateway& gateway, std::uint64_t seed) {
  if (condition == RunCondition::persona && !assignment) throw InvalidRequest("persona condition needs an assignment");
  RunResult result;
  result.condition = condition;
  result.sim_model = cfg.sim_model;
  result.agent_model = cfg.agent_model;
  result.seed = seed;
  result.domain = tasks.empty() ? TaskDomain::custom : tasks.front().domain;
  result.pool_name = condition == RunCondition::persona   ? assignment->pool_name
                     : condition == RunCondition::perfect ? "perfect"
                                                          : "";

  // Prompts are built up front so configuration errors surface before any call.
  std::vector<std::string> prompts;
  std::vector<std::optional<std::string>> profile_ids;
  for (const auto& t : tasks) {
    std::optional<PersonaBlock> persona;
    std::optional<std::string> pid;
    if (condition == RunCondition::persona) {
      auto it = assignment->task_to_profile.find(t.task_id);
      if (it == assignment->task_to_profile.end()) throw InvalidRequest("task " + t.task_id + " has no assigned persona");
      auto p = profiles.find(it->second);
      if (p == profiles.end()) throw InvalidRequest("assigned profile " + it->second + " not loaded");
      persona = format_persona(p->second);
      pid = it->second;
    } else if (condition == RunCondition::perfect) {
      persona = perfect_user_persona();
      pid = "perfect_user";
    }
    prompts.push_back(harness_simulator_prompt(t, condition, persona, cfg));
    profile_ids.push_back(pid);
  }

  result.outcomes = parallel_map<TaskOutcome>(tasks.size(), static_cast<std::size_t>(cfg.workers), [&](std::size_t i) {
    TaskOutcome o;
    try {
      o = run_task(tasks[i], prompts[i], cfg, environment, gateway, seed);
    } catch (const EnvironmentError& e) {
      o.task_id = tasks[i].task_id;
      o.success = false;
      o.diagnostic = std::string("environment error: ") + e.what();
    } catch (const GatewayError& e) {
      o.task_id = tasks[i].task_id;
      o.success = false;
      o.diagnostic = std::string("gateway error: ") + e.what();
    }
    o.profile_id = profile_ids[i];
    return o;
  });
  result.recompute_rate();
  return result;
}

// --- aggregation ----------------------------------------------------------

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return mean(v);
}

std::string cell(const std::optional<double>& v) { return v ? format_fixed1(*v) : ""; }
std::string signed_cell(const std::optional<double>& v) { return v ? format_signed(*v) : ""; }

std::string domain_title(TaskDomain d) {
  switch (d) {
    case TaskDomain::airline: return "Airline";
    case TaskDomain::retail: return "Retail";
    case TaskDomain::custom: return "Custom";
  }
  return "Custom";
}

std::string pool_title(const std::string& p) {
  static const std::map<std::string, std::string> titles{{"high_edu", "High-Edu"}, {"low_edu", "Low-Edu"},
                                                         {"young", "Young"},       {"oldest", "Oldest"},
                                                         {"perfect", "Perfect"}};
  auto it = titles.find(p);
  return it == titles.end() ? p : it->second;
}

}  // namespace

AggregateReport aggregate_runs(const std::vector<RunResult>& results, const AggregateOptions& options) {
  AggregateReport report;
  std::set<std::string> pools_seen;
  for (const auto& r : results) {
    if (r.condition == RunCondition::perfect) pools_seen.insert("perfect");
    if (r.condition == RunCondition::persona && !r.pool_name.empty() && r.pool_name != "all") {
      pools_seen.insert(r.pool_name);
    }
  }
  for (const auto& p : options.pool_columns) {
    if (pools_seen.count(p)) report.pool_columns.push_back(p);
  }
  for (const auto& p : pools_seen) {
    if (std::find(report.pool_columns.begin(), report.pool_columns.end(), p) == report.pool_columns.end()) {
      report.pool_columns.push_back(p);
    }
  }

  for (auto domain : {TaskDomain::airline, TaskDomain::retail, TaskDomain::custom}) {
    std::vector<const RunResult*> runs;
    for (const auto& r : results) {
      if (r.domain == domain) runs.push_back(&r);
    }
    if (runs.empty()) continue;
    DomainTable table;
    table.domain = domain;

    std::vector<std::string> models;
    for (const auto& m : options.model_order) {
      if (std::any_of(runs.begin(), runs.end(), [&](const RunResult* r) { return r->sim_model == m; })) models.push_back(m);
    }
    std::set<std::string> extra;
    for (const auto* r : runs) {
      table.task_count = std::max(table.task_count, r->outcomes.size());
      if (std::find(models.begin(), models.end(), r->sim_model) == models.end()) extra.insert(r->sim_model);
    }
    models.insert(models.end(), extra.begin(), extra.end());

    for (const auto& m : models) {
      ModelRow row;
      row.model = m;
      std::vector<double> orig, np, persona;
      std::map<std::string, std::vector<double>> pools;
      for (const auto* r : runs) {
        if (r->sim_model != m) continue;
        const double pct = 100.0 * r->success_rate;
        switch (r->condition) {
          case RunCondition::original: orig.push_back(pct); break;
          case RunCondition::np: np.push_back(pct); break;
          case RunCondition::persona:
            if (r->pool_name.empty() || r->pool_name == "all") {
              persona.push_back(pct);
            } else {
              pools[r->pool_name].push_back(pct);
            }
            break;
          case RunCondition::perfect: pools["perfect"].push_back(pct); break;
        }
      }
      row.orig = mean_of(orig);
      row.np = mean_of(np);
      row.persona = mean_of(persona);
      if (!persona.empty()) {
        const auto [lo, hi] = std::minmax_element(persona.begin(), persona.end());
        row.range = *hi - *lo;
      }
      if (row.persona && row.np) row.delta = *row.persona - *row.np;
      const std::string where = domain_title(domain) + "/" + m;
      if (!row.orig) report.notes.push_back("IncompleteGrid: " + where + " has no Orig run");
      if (!row.np) report.notes.push_back("IncompleteGrid: " + where + " has no NP run");
      if (!row.persona) report.notes.push_back("IncompleteGrid: " + where + " has no Persona run");
      for (const auto& p : report.pool_columns) {
        row.pools[p] = mean_of(pools[p]);
        if (!row.pools[p]) report.notes.push_back("IncompleteGrid: " + where + " has no " + pool_title(p) + " run");
      }
      table.rows.push_back(std::move(row));
    }

    auto column_mean = [&](auto getter) -> std::optional<double> {
      std::vector<double> v;
      for (const auto& row : table.rows) {
        auto x = getter(row);
        if (!x) return std::nullopt;
        v.push_back(*x);
      }
      return mean_of(v);
    };
    table.mean.model = "Mean";
    table.mean.orig = column_mean([](const ModelRow& r) { return r.orig; });
    table.mean.np = column_mean([](const ModelRow& r) { return r.np; });
    table.mean.persona = column_mean([](const ModelRow& r) { return r.persona; });
    table.mean.delta = column_mean([](const ModelRow& r) { return r.delta; });
    table.mean.range = column_mean([](const ModelRow& r) { return r.range; });
    for (const auto& p : report.pool_columns) {
      table.mean.pools[p] = column_mean([&](const ModelRow& r) { return r.pools.at(p); });
    }
    report.domains.push_back(std::move(table));
  }
  return report;
}

std::string AggregateReport::render_text() const {
  std::vector<std::string> models;
  for (const auto& d : domains) {
    for (const auto& r : d.rows) {
      if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    }
  }
  auto find_row = [](const DomainTable& d, const std::string& m) -> const ModelRow* {
    for (const auto& r : d.rows) {
      if (r.model == m) return &r;
    }
    return nullptr;
  };

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Model"};
  for (const auto& d : domains) {
    const auto t = domain_title(d.domain) + " (n=" + std::to_string(d.task_count) + ")";
    for (const char* c : {" Orig", " NP", " Persona", " Delta"}) header.push_back(t + c);
  }
  rows.push_back(header);
  auto add_row = [&](const std::string& name, auto pick) {
    std::vector<std::string> line{name};
    for (const auto& d : domains) {
      const ModelRow* r = pick(d);
      line.push_back(r ? cell(r->orig) : "");
      line.push_back(r ? cell(r->np) : "");
      line.push_back(r ? cell(r->persona) : "");
      line.push_back(r ? signed_cell(r->delta) : "");
    }
    rows.push_back(line);
  };
  for (const auto& m : models) add_row(m, [&](const DomainTable& d) { return find_row(d, m); });
  add_row("Mean", [](const DomainTable& d) { return &d.mean; });

  std::string out = "Agent task success rate (%)\n" + render_text_table(rows);

  std::vector<std::vector<std::string>> ranges{{"Model"}};
  for (const auto& d : domains) ranges.front().push_back(domain_title(d.domain) + " Persona range");
  for (const auto& m : models) {
    std::vector<std::string> line{m};
    for (const auto& d : domains) {
      const auto* r = find_row(d, m);
      line.push_back(r ? cell(r->range) : "");
    }
    ranges.push_back(line);
  }
  std::vector<std::string> mean_line{"Mean"};
  for (const auto& d : domains) mean_line.push_back(cell(d.mean.range));
  ranges.push_back(mean_line);
  out += "\nPersona range across seeds (max - min, points)\n" + render_text_table(ranges);

  if (!pool_columns.empty()) out += "\n" + render_pools_text();
  for (const auto& n : notes) out += n + "\n";
  return out;
}

std::string AggregateReport::render_pools_text() const {
  std::string out;
  for (const auto& d : domains) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"Model", "NP"};
    for (const auto& p : pool_columns) header.push_back(pool_title(p));
    rows.push_back(header);
    for (const auto& r : d.rows) {
      std::vector<std::string> line{r.model, cell(r.np)};
      for (const auto& p : pool_columns) {
        auto it = r.pools.find(p);
        line.push_back(it == r.pools.end() ? "" : cell(it->second));
      }
      rows.push_back(line);
    }
    out += "Persona pools, " + domain_title(d.domain) + " (n=" + std::to_string(d.task_count) + ")\n" +
           render_text_table(rows);
  }
  return out;
}

std::string AggregateReport::render_tsv() const {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"domain", "model", "orig", "np", "persona", "delta", "persona_range"};
  for (const auto& p : pool_columns) header.push_back(p);
  rows.push_back(header);
  for (const auto& d : domains) {
    auto emit = [&](const ModelRow& r) {
      std::vector<std::string> line{to_string(d.domain), r.model, cell(r.orig),       cell(r.np),
                                    cell(r.persona),     signed_cell(r.delta), cell(r.range)};
      for (const auto& p : pool_columns) {
        auto it = r.pools.find(p);
        line.push_back(it == r.pools.end() ? "" : cell(it->second));
      }
      rows.push_back(line);
    };
    for (const auto& r : d.rows) emit(r);
    emit(d.mean);
  }
  return groundsim::render_tsv(rows);
}

// --- directive sensitivity ------------------------------------------------

std::vector<std::vector<std::string>> user_messages(const std::vector<TaskOutcome>& outcomes) {
  std::vector<std::vector<std::string>> out;
  for (const auto& o : outcomes) {
    std::vector<std::string> msgs;
    for (const auto& t : o.transcript) {
      if (t.role != Speaker::user) continue;
      std::string m = t.content;
      const auto pos = m.rfind(kTerminationToken);
      if (pos != std::string::npos) m.erase(pos, kTerminationToken.size());
      m = text::trim(m);
      if (!m.empty()) msgs.push_back(m);
    }
    out.push_back(std::move(msgs));
  }
  return out;
}

SensitivityReport directive_sensitivity_report(const std::vector<std::vector<std::string>>& orig_conversations,
                                               const std::vector<std::vector<std::string>>& np_conversations,
                                               std::string label, const MetricLexicons& lexicons) {
  return {std::move(label), compute_metrics(orig_conversations, lexicons), compute_metrics(np_conversations, lexicons)};
}

namespace {

std::vector<std::vector<std::string>> sensitivity_rows(const SensitivityReport& r) {
  const auto& a = r.with_directives;
  const auto& b = r.without_directives;
  auto pct = [](double v) { return format_percent(v) + "%"; };
  return {{"Metric", "With Directives", "Without (NP)"},
          {"Roleplay markers", pct(a.roleplay_marker_rate), pct(b.roleplay_marker_rate)},
          {"Stage directions", pct(a.stage_direction_rate), pct(b.stage_direction_rate)},
          {"Frustration words", pct(a.frustration_rate), pct(b.frustration_rate)},
          {"Contains \"please\"", pct(a.please_rate), pct(b.please_rate)},
          {"Has lists", pct(a.list_rate), pct(b.list_rate)},
          {"Multi-line (>=3)", pct(a.multiline_rate), pct(b.multiline_rate)},
          {"Avg message length", format_fixed1(a.avg_message_chars) + " chars",
           format_fixed1(b.avg_message_chars) + " chars"},
          {"Avg msgs/conv", format_fixed1(a.avg_messages_per_conversation),
           format_fixed1(b.avg_messages_per_conversation)}};
}

}  // namespace

std::string SensitivityReport::render_text() const {
  std::string out = label.empty() ? std::string() : label + "\n";
  return out + render_text_table(sensitivity_rows(*this));
}

std::string SensitivityReport::render_tsv() const {
  auto rows = sensitivity_rows(*this);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].insert(rows[i].begin(), i == 0 ? std::string("model") : label);
  return groundsim::render_tsv(rows);
}

}  // namespace groundsim
