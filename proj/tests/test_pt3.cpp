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
#include "groundsim/pt3.hpp"
#include "groundsim/report_math.hpp"

#include "expected.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace groundsim;
using namespace testing_support;

namespace {

std::map<std::string, UserProfile> profiles_for(const std::vector<Conversation>& convs) {
  std::map<std::string, UserProfile> out;
  for (const auto& c : convs) {
    auto& p = out[c.user_id];
    p.user_id = c.user_id;
    p.manual.user_id = c.user_id;
    p.conversation_ids.push_back(c.conversation_id);
    p.manual.commands = {command("Write tersely.", {})};
  }
  return out;
}

Conversation q(const std::string& id, const std::string& user, int quality_each, int turns = 3) {
  std::vector<std::string> msgs(static_cast<std::size_t>(turns), "a question about " + id);
  return tagged(make_conv(id, user, msgs), "Domain " + id.substr(0, 1), quality_each, quality_each, quality_each);
}

std::vector<PT3Verdict> verdicts_with_rates(const std::array<double, 5>& percent, int cases) {
  std::vector<PT3Verdict> vs(static_cast<std::size_t>(cases));
  for (std::size_t d = 0; d < 5; ++d) {
    const int hits = static_cast<int>(std::lround(percent[d] * cases / 100.0));
    for (int i = 0; i < hits; ++i) vs[static_cast<std::size_t>(i)].dimensions[d].match = true;
  }
  return vs;
}

std::string all_dims_reply(std::initializer_list<bool> matches) {
  nlohmann::json j;
  auto it = matches.begin();
  for (auto d : kDimensions) j[to_string(d)] = {{"match", *it++}, {"rationale", "r"}};
  return j.dump();
}

}  // namespace

TEST(SubsetSpec, Validation) {
  SubsetSpec s;
  s.size = 0;
  EXPECT_THROW(s.validate(), InvalidRequest);
  const auto parsed = SubsetSpec::from_json({{"name", "med"}, {"domain_filter", "Medical & Health"}, {"size", 5}});
  EXPECT_EQ(parsed.domain_filter.value(), "Medical & Health");
  EXPECT_EQ(parsed.size, 5);
  EXPECT_EQ(parsed.min_quality, 10);
}

TEST(BuildSubset, FiltersCapsAndOrder) {
  std::vector<Conversation> convs{q("a1", "u1", 4), q("a2", "u1", 5), q("a3", "u1", 3), q("a4", "u1", 4), q("b1", "u2", 4), q("c1", "u3", 4),
                                  q("d1", "u4", 4, 2), q("e1", "u5", 2)};
  auto long_msg = q("f1", "u6", 4);
  long_msg.turns[0].content = std::string(2400, 'x');
  convs.push_back(long_msg);
  SubsetSpec spec;
  spec.size = 4;
  spec.mixed_per_domain_cap = 5;
  const auto cases = build_subset(convs, spec, profiles_for(convs));
  std::vector<std::string> ids;
  for (const auto& c : cases) ids.push_back(c.real_conversation.conversation_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"a2", "a1", "b1", "c1"}));
  EXPECT_EQ(cases[0].case_id, "mixed:a2");

  spec.size = 5;
  EXPECT_THROW(build_subset(convs, spec, profiles_for(convs)), InsufficientCorpus);
}

TEST(BuildSubset, MixedDomainCapAndDomainFilter) {
  std::vector<Conversation> convs;
  for (int i = 0; i < 4; ++i) convs.push_back(q("a" + std::to_string(i), "ua" + std::to_string(i), 4));
  for (int i = 0; i < 4; ++i) convs.push_back(q("b" + std::to_string(i), "ub" + std::to_string(i), 4));
  SubsetSpec mixed;
  mixed.size = 4;
  EXPECT_EQ(build_subset(convs, mixed, profiles_for(convs)).size(), 4u);
  mixed.size = 5;
  EXPECT_THROW(build_subset(convs, mixed, profiles_for(convs)), InsufficientCorpus);
  SubsetSpec only_a;
  only_a.name = "a";
  only_a.domain_filter = "Domain a";
  only_a.size = 4;
  for (const auto& c : build_subset(convs, only_a, profiles_for(convs))) EXPECT_EQ(c.real_conversation.tags->domain, "Domain a");
}

TEST(CleanProfile, ThreeClasses) {
  auto single = profile("u", {command("Lowercase.", {{"x", "C1"}, {"y", "C1"}}), command("Terse.", {{"z", "C1"}})}, {"C1"});
  const auto r1 = clean_profile(single, "C1");
  EXPECT_EQ(r1.cleaning_class, CleaningClass::stripped_all);
  ASSERT_EQ(r1.profile.manual.commands.size(), 2u);
  for (const auto& c : r1.profile.manual.commands) EXPECT_TRUE(c.examples.empty());
  EXPECT_EQ(r1.profile.manual.commands[0].command, "Lowercase.");

  auto multi = profile("u", {command("Lowercase.", {{"x", "C1"}, {"y", "C2"}})}, {"C1", "C2"});
  const auto r2 = clean_profile(multi, "C1");
  EXPECT_EQ(r2.cleaning_class, CleaningClass::removed_tagged);
  ASSERT_EQ(r2.profile.manual.commands[0].examples.size(), 1u);
  EXPECT_EQ(r2.profile.manual.commands[0].examples[0].source_conversation_id, "C2");

  auto disjoint = profile("u", {command("Lowercase.", {{"x", "C2"}, {"y", "C3"}})}, {"C2", "C3"});
  const auto r3 = clean_profile(disjoint, "C1");
  EXPECT_EQ(r3.cleaning_class, CleaningClass::unchanged);
  EXPECT_EQ(r3.profile, disjoint);
}

TEST(StripTermination, Cases) {
  SimTrajectory t;
  t.turns = {{Speaker::user, "hi", 0}, {Speaker::assistant, "hello", 1}, {Speaker::user, "ok thanks\n###DONE###", 2}};
  EXPECT_EQ(strip_termination(t).turns.back().content, "ok thanks");
  t.turns.back().content = "###DONE###";
  EXPECT_EQ(strip_termination(t).turns.size(), 2u);
  t.turns.back().content = "no token here";
  EXPECT_EQ(strip_termination(t), t);
}

TEST(JudgePair, ParsesVerdictsAndRepairs) {
  const auto real = make_conv("C1", "u", {"hey"});
  SimTrajectory synth;
  synth.case_id = "c";
  synth.condition = SimCondition::with_profile;
  synth.turns = {{Speaker::user, "hello", 0}};

  auto all = scripted([](const ChatRequest&) { return all_dims_reply({true, true, true, true, true}); });
  const auto v = judge_pair(real, synth, *all);
  for (const auto& d : v.dimensions) EXPECT_TRUE(d.match);
  EXPECT_EQ(v.condition, SimCondition::with_profile);

  auto tech = scripted([](const ChatRequest&) { return all_dims_reply({false, false, true, false, false}); });
  const auto t = judge_pair(real, synth, *tech);
  EXPECT_TRUE(t.at(Dimension::tech_competency).match);
  EXPECT_FALSE(t.at(Dimension::linguistic_style).match);

  auto missing = scripted([](const ChatRequest&) { return std::string(R"({"pacing":{"match":true}})"); });
  EXPECT_THROW(judge_pair(real, synth, *missing), VerdictParseError);
}

TEST(JudgePrompt, OrderAndNoLabels) {
  const auto real = make_conv("C1", "u", {"REAL-USER-TEXT"});
  SimTrajectory synth;
  synth.turns = {{Speaker::user, "SYNTHETIC-USER-TEXT", 0}};
  const auto a = judge_prompt(real, synth, true);
  const auto b = judge_prompt(real, synth, false);
  EXPECT_LT(a.find("REAL-USER-TEXT"), a.find("SYNTHETIC-USER-TEXT"));
  EXPECT_GT(b.find("REAL-USER-TEXT"), b.find("SYNTHETIC-USER-TEXT"));
  for (const auto& p : {a, b}) {
    EXPECT_EQ(p.find("real conversation"), std::string::npos);
    EXPECT_EQ(p.find("synthetic"), std::string::npos);
    for (auto d : kDimensions) EXPECT_NE(p.find(dimension_rubric(d)), std::string::npos);
  }
}

TEST(PresentationOrders, BalancedAndSeeded) {
  for (std::size_t n : {1u, 2u, 7u, 100u, 1201u}) {
    const auto o = presentation_orders(n, 7);
    const auto firsts = static_cast<long>(std::count(o.begin(), o.end(), true));
    EXPECT_LE(std::abs(2 * firsts - static_cast<long>(n)), 1);
    EXPECT_EQ(o, presentation_orders(n, 7));
  }
  EXPECT_NE(presentation_orders(100, 7), presentation_orders(100, 8));
}

TEST(AggregateFidelity, ReferenceOverallRates) {
  const auto base = aggregate_fidelity(verdicts_with_rates(expected::kBaselineRates, 1000));
  const auto prof = aggregate_fidelity(verdicts_with_rates(expected::kProfileRates, 1000));
  EXPECT_EQ(format_percent(base.fidelity_index), expected::kBaselineOverall);
  EXPECT_EQ(format_percent(prof.fidelity_index), expected::kProfileOverall);
  EXPECT_EQ(base.judgment_count, 5000u);
  EXPECT_EQ(base.case_count, 1000u);
}

TEST(AggregateFidelity, SingleAllTrueAndSubsets) {
  std::vector<PT3Verdict> vs(1);
  for (auto& d : vs[0].dimensions) d.match = true;
  vs[0].subset = "mixed";
  const auto r = aggregate_fidelity(vs);
  EXPECT_DOUBLE_EQ(r.fidelity_index, 1.0);
  for (double x : r.dimension_rates) EXPECT_DOUBLE_EQ(x, 1.0);
  EXPECT_DOUBLE_EQ(r.subset_rates.at("mixed"), 1.0);
  EXPECT_THROW(aggregate_fidelity({}), InvalidRequest);
  EXPECT_THROW(aggregate_fidelity(vs, {0.5, 0.5, 0.5, 0.0, 0.0}), InvalidRequest);
}

TEST(AggregateFidelity, UniformMeanAndMonotone) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PT3Verdict> vs(1 + rng() % 20);
    for (auto& v : vs) {
      for (auto& d : v.dimensions) d.match = rng() % 2;
    }
    const auto r = aggregate_fidelity(vs);
    double mean = 0;
    for (double x : r.dimension_rates) mean += x / 5.0;
    EXPECT_NEAR(r.fidelity_index, mean, 1e-12);
    auto flipped = vs;
    auto& cell = flipped[rng() % flipped.size()].dimensions[rng() % 5];
    cell.match = true;
    EXPECT_GE(aggregate_fidelity(flipped).fidelity_index + 1e-12, r.fidelity_index);
  }
}

TEST(FidelityTable, LayoutAndRounding) {
  auto base = aggregate_fidelity(verdicts_with_rates(expected::kBaselineRates, 1000), kUniformWeights, "Baseline");
  auto prof = aggregate_fidelity(verdicts_with_rates(expected::kProfileRates, 1000), kUniformWeights, "With Profile");
  const auto text = render_fidelity_table(base, prof);
  EXPECT_NE(text.find("Persona & Affective Traits"), std::string::npos);
  EXPECT_NE(text.find("24.2"), std::string::npos);
  EXPECT_NE(text.find("45.3"), std::string::npos);
  EXPECT_NE(text.find("+21.1"), std::string::npos);
  const auto tsv = render_fidelity_tsv(base, prof);
  EXPECT_NE(tsv.find('\t'), std::string::npos);
}

TEST(Pt3Records, JsonRoundTrip) {
  PT3Verdict v;
  v.case_id = "mixed:c1";
  v.subset = "mixed";
  v.condition = SimCondition::with_profile;
  v.at(Dimension::pacing) = {true, "same rhythm"};
  EXPECT_EQ(verdict_from_json(to_json(v)), v);

  TestCase tc;
  tc.case_id = "mixed:c1";
  tc.subset = "mixed";
  tc.real_conversation = q("c1", "u", 4);
  tc.profile = profile("u", {command("Lowercase.", {{"x", "c1"}})}, {"c1"});
  tc.cleaned_profile = clean_profile(tc.profile, "c1").profile;
  tc.cleaning_class = CleaningClass::stripped_all;
  EXPECT_EQ(test_case_from_json(to_json(tc)).cleaned_profile, tc.cleaned_profile);
  EXPECT_EQ(test_case_from_json(to_json(tc)).real_conversation, tc.real_conversation);
}
