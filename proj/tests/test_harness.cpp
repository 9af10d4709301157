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

#include "groundsim/error.hpp"
#include "groundsim/harness.hpp"
#include "groundsim/offline.hpp"
#include "groundsim/report_math.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace groundsim;
using namespace testing_support;

namespace {

Gateway offline_gateway() { return Gateway(std::make_shared<OfflineResponder>(), ProviderConfig{}); }

UserProfile aged(const std::string& id, const std::string& age, const std::string& edu) {
  auto p = profile(id, {command("Write plainly.", {})}, {"C-" + id});
  if (!age.empty()) p.demographics.fields[DemographicField::age] = {age, ValueSource::extracted, 1};
  if (!edu.empty()) p.demographics.fields[DemographicField::education] = {edu, ValueSource::inferred, 0};
  return p;
}

std::vector<EvalTask> separated_mock_tasks(Gateway& gw) {
  auto tasks = mock_airline_tasks();
  separate_tasks(tasks, gw);
  return tasks;
}

RunResult synthetic_run(RunCondition c, const std::string& model, double pct, std::uint64_t seed = 7,
                        const std::string& pool = "", TaskDomain d = TaskDomain::airline) {
  RunResult r;
  r.condition = c;
  r.sim_model = model;
  r.seed = seed;
  r.domain = d;
  r.pool_name = pool;
  const int wins = static_cast<int>(std::lround(pct * 10.0));
  for (int i = 0; i < 1000; ++i) r.outcomes.push_back({std::to_string(i), i < wins, std::nullopt, "", {}, ""});
  r.recompute_rate();
  return r;
}

std::string toy_adapter() { return "python3 " + std::string(GROUNDSIM_TEST_DIR) + "/fixtures/toy_adapter.py"; }

}  // namespace

TEST(AssignPersonas, DeterministicWithReplacement) {
  auto tasks = mock_airline_tasks();
  std::vector<UserProfile> pool{aged("a", "", ""), aged("b", "", ""), aged("c", "", "")};
  const auto a = assign_personas(tasks, pool, 11);
  EXPECT_EQ(a.task_to_profile, assign_personas(tasks, pool, 11).task_to_profile);
  EXPECT_EQ(a.task_to_profile.size(), 3u);
  bool any_diff = false;
  for (std::uint64_t s = 12; s < 20; ++s) any_diff |= assign_personas(tasks, pool, s).task_to_profile != a.task_to_profile;
  EXPECT_TRUE(any_diff);
  for (const auto& [t, p] : assign_personas(tasks, {aged("solo", "", "")}, 3).task_to_profile) EXPECT_EQ(p, "solo");
  EXPECT_THROW(assign_personas(tasks, {}, 1), EmptyPool);
  EXPECT_EQ(assignment_from_json(to_json(a)).task_to_profile, a.task_to_profile);
}

TEST(SelectPool, RulesAndEmptyPool) {
  std::vector<UserProfile> ps{aged("y", "18-24", "high school"), aged("o", "65+", "Master's Degree"), aged("u", "", "")};
  EXPECT_EQ(select_pool(ps, PoolCriterion::young).front().user_id, "y");
  EXPECT_EQ(select_pool(ps, PoolCriterion::oldest).front().user_id, "o");
  EXPECT_EQ(select_pool(ps, PoolCriterion::high_edu).front().user_id, "o");
  EXPECT_EQ(select_pool(ps, PoolCriterion::low_edu).front().user_id, "y");
  EXPECT_EQ(select_pool(ps, PoolCriterion::all).size(), 3u);
  EXPECT_THROW(select_pool({aged("u", "", "")}, PoolCriterion::young), EmptyPool);
  const auto rules = PoolRules::from_json({{"young", {"25-34"}}});
  EXPECT_THROW(select_pool(ps, PoolCriterion::young, rules), EmptyPool);
  EXPECT_THROW(pool_criterion_from_string("richest"), InvalidRequest);
}

TEST(PerfectUser, CooperativePersona) {
  const auto p = perfect_user_persona();
  EXPECT_NE(p.rendered.find("State every relevant detail up front"), std::string::npos);
  EXPECT_EQ(p.rendered.find("Demographics"), std::string::npos);
  EXPECT_EQ(p, perfect_user_persona());
}

TEST(MockAirline, ToolsAndSuccess) {
  auto env = make_mock_airline_environment();
  EvalTask t;
  t.task_id = "42";
  env->reset(t);
  EXPECT_NE(env->step({"list_reservations", {{"user_id", "omar_rossi_1241"}}}).find("FDZ0T5"), std::string::npos);
  env->step({"cancel_reservation", {{"reservation_id", "FDZ0T5"}}});
  EXPECT_FALSE(env->is_success());
  env->step({"cancel_reservation", {{"reservation_id", "HSR97W"}}});
  EXPECT_TRUE(env->is_success());
  t.task_id = "47";
  env->reset(t);
  EXPECT_EQ(env->step({"refund", {{"reservation_id", "ZR4M8N"}}}).rfind("error", 0), 0u);
  EXPECT_TRUE(env->is_success());
  t.task_id = "99";
  EXPECT_THROW(env->reset(t), EnvironmentError);
}

TEST(RunCondition, NpPassesAndStylePersonasExposeFailures) {
  auto gw = offline_gateway();
  const auto tasks = separated_mock_tasks(gw);
  for (const auto& t : tasks) {
    ASSERT_TRUE(t.split.has_value());
    EXPECT_EQ(t.split->task_only.find("impatient"), std::string::npos);
    EXPECT_EQ(t.split->task_only.find("distraught"), std::string::npos);
  }
  HarnessConfig cfg;
  cfg.workers = 2;
  const auto env = environment_factory("mock");
  const auto np = run_condition(tasks, RunCondition::np, std::nullopt, {}, cfg, env, gw);
  for (const auto& o : np.outcomes) EXPECT_TRUE(o.success) << o.task_id;
  EXPECT_DOUBLE_EQ(np.success_rate, 1.0);

  std::map<std::string, UserProfile> profiles{
      {"terse", profile("terse", {command("Keep messages short and terse.", {}, StyleDimension::message_length)}, {"C1"})},
      {"shout", profile("shout", {command("Write in ALL CAPS.", {})}, {"C2"})},
      {"agree", profile("agree", {command("Use filler words and sound hesitant.", {}, StyleDimension::formality)}, {"C3"})}};
  PersonaAssignment a;
  a.task_to_profile = {{"42", "terse"}, {"27", "shout"}, {"47", "agree"}};
  const auto persona = run_condition(tasks, RunCondition::persona, a, profiles, cfg, env, gw);
  for (const auto& o : persona.outcomes) EXPECT_FALSE(o.success) << o.task_id;
  EXPECT_EQ(persona.outcomes[0].profile_id.value(), "terse");

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto head = np.outcomes[i].simulator_prompt;
    EXPECT_EQ(persona.outcomes[i].simulator_prompt.rfind(head, 0), 0u);
  }
  const auto again = run_condition(tasks, RunCondition::persona, a, profiles, cfg, env, gw);
  for (std::size_t i = 0; i < tasks.size(); ++i) EXPECT_EQ(again.outcomes[i].transcript, persona.outcomes[i].transcript);
}

TEST(RunCondition, ConfigurationErrors) {
  auto gw = offline_gateway();
  HarnessConfig cfg;
  const auto env = environment_factory("mock");
  auto raw = mock_airline_tasks();
  EXPECT_THROW(run_condition(raw, RunCondition::np, std::nullopt, {}, cfg, env, gw), InvalidRequest);
  EXPECT_THROW(run_condition(raw, RunCondition::persona, std::nullopt, {}, cfg, env, gw), InvalidRequest);
  EXPECT_THROW(environment_factory("bogus"), InvalidRequest);
  const auto orig = run_condition(raw, RunCondition::original, std::nullopt, {}, cfg, env, gw);
  EXPECT_EQ(orig.outcomes.size(), 3u);
  EXPECT_NE(orig.outcomes[0].simulator_prompt.find("impatient"), std::string::npos);
  EXPECT_EQ(run_result_from_json(to_json(orig)).success_rate, orig.success_rate);
}

TEST(ProcessAdapter, SpeaksJsonLines) {
  auto env = make_process_environment(toy_adapter());
  EvalTask t;
  t.task_id = "t1";
  EXPECT_EQ(env->reset(t), "toy desk for task t1");
  EXPECT_EQ(env->tool_manifest(), "- solve {}");
  EXPECT_FALSE(env->is_success());
  EXPECT_EQ(env->step({"solve", {}}), "solved");
  EXPECT_TRUE(env->is_success());

  auto dead = make_process_environment("exit 0");
  EXPECT_THROW(dead->reset(t), EnvironmentError);
}

TEST(ProcessAdapter, FailedTaskRecordedNotFatal) {
  auto gw = offline_gateway();
  EvalTask t;
  t.task_id = "t1";
  t.raw_scenario = "Your user id is toy_user_1. You want the thing solved.";
  HarnessConfig cfg;
  const auto r = run_condition({t}, RunCondition::original, std::nullopt, {}, cfg, environment_factory("adapter:" + toy_adapter()), gw);
  ASSERT_EQ(r.outcomes.size(), 1u);
  EXPECT_FALSE(r.outcomes[0].success);
  const auto broken = run_condition({t}, RunCondition::original, std::nullopt, {}, cfg, environment_factory("adapter:exit 3"), gw);
  EXPECT_NE(broken.outcomes[0].diagnostic.find("environment error"), std::string::npos);
}

TEST(AggregateRuns, SeedsMeanRangeAndDelta) {
  std::vector<RunResult> runs{synthetic_run(RunCondition::original, "gpt-4o", 52.0),
                              synthetic_run(RunCondition::np, "gpt-4o", 50.0)};
  for (auto [seed, pct] : {std::pair{7, 42.0}, {8, 50.0}, {9, 46.0}}) {
    runs.push_back(synthetic_run(RunCondition::persona, "gpt-4o", pct, static_cast<std::uint64_t>(seed), "all"));
  }
  const auto rep = aggregate_runs(runs);
  ASSERT_EQ(rep.domains.size(), 1u);
  const auto& row = rep.domains[0].rows.at(0);
  EXPECT_DOUBLE_EQ(*row.persona, 46.0);
  EXPECT_DOUBLE_EQ(*row.range, 8.0);
  EXPECT_EQ(format_signed(*row.delta), "-4.0");
  EXPECT_TRUE(rep.notes.empty());
  EXPECT_EQ(rep.domains[0].task_count, 1000u);
  EXPECT_NE(rep.render_text().find("46.0"), std::string::npos);
}

TEST(AggregateRuns, IncompleteGridBlanksMean) {
  std::vector<RunResult> runs{synthetic_run(RunCondition::np, "gpt-4o", 50.0), synthetic_run(RunCondition::np, "gpt-5", 48.0),
                              synthetic_run(RunCondition::persona, "gpt-4o", 41.3, 7, "all")};
  const auto rep = aggregate_runs(runs);
  const auto& t = rep.domains[0];
  EXPECT_EQ(format_fixed1(*t.mean.np), "49.0");
  EXPECT_FALSE(t.mean.persona.has_value());
  EXPECT_FALSE(t.mean.orig.has_value());
  EXPECT_FALSE(rep.notes.empty());
  EXPECT_NE(rep.notes.front().find("IncompleteGrid"), std::string::npos);
}

TEST(AggregateRuns, PoolColumns) {
  std::vector<RunResult> runs{synthetic_run(RunCondition::np, "gpt-4o", 50.0),
                              synthetic_run(RunCondition::persona, "gpt-4o", 46.0, 7, "high_edu"),
                              synthetic_run(RunCondition::perfect, "gpt-4o", 46.0, 7, "perfect")};
  const auto rep = aggregate_runs(runs);
  EXPECT_EQ(rep.pool_columns, (std::vector<std::string>{"high_edu", "perfect"}));
  EXPECT_DOUBLE_EQ(*rep.domains[0].rows[0].pools.at("high_edu"), 46.0);
  EXPECT_NE(rep.render_pools_text().find("High-Edu"), std::string::npos);
  EXPECT_NE(rep.render_tsv().find("high_edu"), std::string::npos);
}

TEST(Sensitivity, IdentityZeroAndRates) {
  const std::vector<std::vector<std::string>> same{{"hello there", "*sighs* fine"}};
  const auto id = directive_sensitivity_report(same, same, "m");
  EXPECT_DOUBLE_EQ(id.with_directives.roleplay_marker_rate, id.without_directives.roleplay_marker_rate);

  const auto zero = directive_sensitivity_report({{"plain"}}, {{"plain"}});
  EXPECT_DOUBLE_EQ(zero.with_directives.roleplay_marker_rate, 0.0);

  std::vector<std::vector<std::string>> orig(1), np(1);
  for (int i = 0; i < 1000; ++i) {
    orig[0].push_back(i < 194 ? "*sobbing* help" : "help");
    np[0].push_back(i < 109 ? "*waves* help" : "help");
  }
  const auto r = directive_sensitivity_report(orig, np, "gpt-4o");
  const auto text = r.render_text();
  EXPECT_NE(text.find("19.4%"), std::string::npos);
  EXPECT_NE(text.find("10.9%"), std::string::npos);
  EXPECT_NE(r.render_tsv().find("gpt-4o\tRoleplay markers\t19.4%\t10.9%"), std::string::npos);
}

TEST(Sensitivity, UserMessagesStripToken) {
  TaskOutcome o;
  o.transcript = {{Speaker::user, "hi", 0}, {Speaker::assistant, "hello", 1}, {Speaker::user, "bye\n###DONE###", 2}};
  EXPECT_EQ(user_messages({o}), (std::vector<std::vector<std::string>>{{"hi", "bye"}}));
}
