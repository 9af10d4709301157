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
#include "groundsim/profiling.hpp"
#include "groundsim/report_math.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace groundsim;
using namespace testing_support;

namespace {

std::vector<Conversation> user_convs() {
  return {make_conv("C1", "u", {"i wanna share a place", "make it shorter and 4 sentences"}),
          make_conv("C2", "u", {"please check it", "i want to talk about a tourist city"})};
}

std::string manual_reply(const std::vector<std::pair<std::string, std::vector<std::string>>>& cmds) {
  nlohmann::json j{{"commands", nlohmann::json::array()}};
  for (const auto& [c, ex] : cmds) j["commands"].push_back({{"command", c}, {"dimension", "capitalization"}, {"examples", ex}});
  return j.dump();
}

FieldMention mention(DemographicField f, const std::string& v, const std::string& conv = "c") {
  return {f, v, conv, "evidence"};
}

}  // namespace

TEST(StyleProfile, VerbatimExamplesTaggedWithSource) {
  auto gw = scripted([](const ChatRequest&) {
    return manual_reply({{"Use all lowercase letters", {"i wanna share a place", "i want to talk about a tourist city"}},
                         {"Invented command", {"this was never said"}}});
  });
  const auto m = extract_style_profile(user_convs(), *gw);
  ASSERT_EQ(m.commands.size(), 1u);
  EXPECT_EQ(m.commands[0].command, "Use all lowercase letters");
  ASSERT_EQ(m.commands[0].examples.size(), 2u);
  EXPECT_EQ(m.commands[0].examples[0].source_conversation_id, "C1");
  EXPECT_EQ(m.commands[0].examples[1].source_conversation_id, "C2");
}

TEST(StyleProfile, FabricatedExampleDroppedCommandKept) {
  auto gw = scripted([](const ChatRequest&) {
    return manual_reply({{"Skip punctuation", {"please check it", "totally fabricated quote"}}});
  });
  const auto m = extract_style_profile(user_convs(), *gw);
  ASSERT_EQ(m.commands.size(), 1u);
  ASSERT_EQ(m.commands[0].examples.size(), 1u);
  EXPECT_EQ(m.commands[0].examples[0].quote, "please check it");
}

TEST(StyleProfile, CapsAtFifteenCommands) {
  auto gw = scripted([](const ChatRequest&) {
    std::vector<std::pair<std::string, std::vector<std::string>>> cmds;
    for (int i = 0; i < 20; ++i) cmds.push_back({"command " + std::to_string(i), {"please check it"}});
    return manual_reply(cmds);
  });
  const auto m = extract_style_profile(user_convs(), *gw);
  ASSERT_EQ(m.commands.size(), kMaxCommands);
  EXPECT_EQ(m.commands.back().command, "command 14");
}

TEST(StyleProfile, EmptyAfterVerificationAndParseFailure) {
  auto fake = scripted([](const ChatRequest&) { return manual_reply({{"Made up", {"nobody wrote this"}}}); });
  EXPECT_THROW(extract_style_profile(user_convs(), *fake), EmptyManual);
  auto junk = scripted([](const ChatRequest&) { return std::string("I cannot help with that."); });
  EXPECT_THROW(extract_style_profile(user_convs(), *junk), ManualParseError);
}

TEST(StyleProfile, NormalizedMatchingToleratesWhitespaceAndNfc) {
  const std::vector<Conversation> convs{make_conv("C1", "u", {"caf\xC3\xA9   time\nplease"})};
  auto parsed = std::vector<StyleCommand>{command("Mention cafes", {{"cafe\xCC\x81 time please", ""}})};
  const auto m = verify_manual("u", parsed, convs);
  ASSERT_EQ(m.commands.size(), 1u);
  EXPECT_EQ(m.commands[0].examples[0].source_conversation_id, "C1");
}

TEST(DemographicMentions, WhitelistEnforced) {
  const auto conv = make_conv("c", "u", {"as a 19 year old in college, i'm 18-24 basically"});
  auto ok = scripted([](const ChatRequest&) {
    return std::string(R"({"mentions":[{"field":"age","value":"18-24","evidence":"i'm 18-24"}]})");
  });
  const auto m = extract_demographic_mentions(conv, *ok);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].value, "18-24");
  EXPECT_EQ(m[0].conversation_id, "c");

  auto bad = scripted([](const ChatRequest&) {
    return std::string(R"({"mentions":[{"field":"age","value":"19","evidence":"19 year old"}]})");
  });
  EXPECT_TRUE(extract_demographic_mentions(conv, *bad).empty());

  auto none = scripted([](const ChatRequest&) { return std::string(R"({"mentions":[]})"); });
  EXPECT_TRUE(extract_demographic_mentions(make_conv("d", "u", {"hello"}), *none).empty());
}

TEST(AggregateDemographics, MajorityTieAndConsistency) {
  using F = DemographicField;
  const auto r = aggregate_demographics({mention(F::age, "18-24"), mention(F::age, "18-24"), mention(F::age, "25-34")});
  ASSERT_NE(r.get(F::age), nullptr);
  EXPECT_EQ(r.get(F::age)->value, "18-24");
  EXPECT_EQ(r.get(F::age)->supporting_count, 2);
  EXPECT_DOUBLE_EQ(r.consistency, 0.0);

  const auto tie = aggregate_demographics({mention(F::age, "18-24"), mention(F::age, "25-34")});
  EXPECT_EQ(tie.get(F::age), nullptr);

  std::vector<FieldMention> singles;
  for (auto f : kDemographicFields) singles.push_back(mention(f, f == F::age ? "25-34" : f == F::education ? "high school" : f == F::income ? "$25k-$50k" : "x"));
  const auto all = aggregate_demographics(singles);
  EXPECT_DOUBLE_EQ(all.consistency, 1.0);
  EXPECT_DOUBLE_EQ(all.completeness, 1.0);
}

TEST(AggregateDemographics, RandomizedAgainstOracle) {
  std::mt19937 rng(2024);
  const std::vector<std::string> ages{"under 18", "18-24", "25-34", "35-44"};
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    std::vector<std::string> votes;
    std::vector<FieldMention> ms;
    for (int i = 0; i < n; ++i) {
      votes.push_back(ages[rng() % ages.size()]);
      ms.push_back(mention(DemographicField::age, votes.back(), "c" + std::to_string(i)));
    }
    const auto rec = aggregate_demographics(ms);
    const auto* got = rec.get(DemographicField::age);
    if (auto maj = oracle::strict_majority(votes)) {
      ASSERT_NE(got, nullptr);
      EXPECT_EQ(got->value, *maj);
    }
    if (oracle::top_tie(votes)) EXPECT_EQ(got, nullptr);
    std::shuffle(ms.begin(), ms.end(), rng);
    EXPECT_EQ(aggregate_demographics(ms), rec);
  }
}

TEST(InferDemographics, OnlyMissingFieldsAndAbstention) {
  DemographicRecord existing;
  existing.fields[DemographicField::age] = {"18-24", ValueSource::extracted, 1};
  std::string prompt;
  auto gw = scripted([&](const ChatRequest& r) {
    prompt = r.messages.back().content;
    return std::string(R"({"education":"bachelor's degree","income":"unknown","gender":"female"})");
  });
  const auto out = infer_demographics(user_convs(), existing, *gw);
  EXPECT_EQ(prompt.find("- age"), std::string::npos);
  EXPECT_NE(prompt.find("- income"), std::string::npos);
  ASSERT_NE(out.get(DemographicField::age), nullptr);
  EXPECT_EQ(out.get(DemographicField::age)->source, ValueSource::extracted);
  ASSERT_NE(out.get(DemographicField::education), nullptr);
  EXPECT_EQ(out.get(DemographicField::education)->source, ValueSource::inferred);
  EXPECT_EQ(out.get(DemographicField::income), nullptr);
}

TEST(ConsolidateProfile, ExtractedWins) {
  DemographicRecord ex, inf;
  ex.fields[DemographicField::age] = {"18-24", ValueSource::extracted, 2};
  inf.fields[DemographicField::age] = {"25-34", ValueSource::inferred, 0};
  inf.fields[DemographicField::gender] = {"female", ValueSource::inferred, 0};
  PersonaManual m{"u", {command("Write in lowercase", {{"i wanna share a place", "C1"}})}};
  const auto p = consolidate_profile(m, ex, inf, std::nullopt, {"C1", "C2"});
  EXPECT_EQ(p.demographics.get(DemographicField::age)->value, "18-24");
  EXPECT_EQ(p.demographics.get(DemographicField::age)->source, ValueSource::extracted);
  EXPECT_EQ(p.demographics.get(DemographicField::gender)->value, "female");
  EXPECT_EQ(p.demographics.get(DemographicField::income), nullptr);
  EXPECT_NEAR(p.demographics.completeness, 2.0 / 7.0, 1e-12);

  DemographicRecord clash;
  clash.fields[DemographicField::age] = {"25-34", ValueSource::extracted, 1};
  EXPECT_THROW(consolidate_profile(m, ex, clash, std::nullopt, {"C1"}), ConflictError);
}

TEST(UserProfile, ValidateRejectsForeignExampleSource) {
  auto p = profile("u", {command("Write in lowercase", {{"x", "C9"}})}, {"C1"});
  EXPECT_THROW(p.validate(), InvalidRequest);
  p.conversation_ids.push_back("C9");
  EXPECT_NO_THROW(p.validate());
}

TEST(UserProfile, JsonRoundTrip) {
  auto p = profile("u", {command("Write in lowercase", {{"i wanna share a place", "C1"}}, StyleDimension::punctuation)},
                   {"C1"});
  p.demographics.fields[DemographicField::education] = {"master's degree", ValueSource::extracted, 3};
  p.demographics.recompute_completeness();
  p.background = "Plans trips for family.";
  EXPECT_EQ(profile_from_json(to_json(p)), p);
}

TEST(ValidateInference, ReferenceAccuracyArithmetic) {
  const auto gender = make_accuracy_row("gender", 60, 41, 35);
  EXPECT_EQ(format_percent(*gender.accuracy), "85.4");
  const auto overall = make_accuracy_row("overall", 400, 264, 170);
  EXPECT_EQ(format_percent(*overall.accuracy), "64.4");
  EXPECT_FALSE(make_accuracy_row("income", 5, 0, 0).accuracy.has_value());
}

TEST(ValidateInference, StrictMatchingAndColumnSums) {
  std::vector<ProfilePair> pairs;
  auto rec = [](std::vector<std::pair<DemographicField, std::string>> kv, ValueSource src) {
    DemographicRecord r;
    for (auto& [f, v] : kv) r.fields[f] = {v, src, 1};
    return r;
  };
  using F = DemographicField;
  pairs.push_back({rec({{F::gender, "female"}, {F::age, "18-24"}}, ValueSource::inferred),
                   rec({{F::gender, "Female"}, {F::age, "25-34"}}, ValueSource::extracted)});
  pairs.push_back({rec({}, ValueSource::inferred), rec({{F::gender, "male"}}, ValueSource::extracted)});
  const auto t = validate_inference(pairs);
  int tc = 0, inf = 0, cor = 0;
  for (const auto& r : t.rows) {
    EXPECT_LE(r.correct, r.inferred);
    EXPECT_LE(r.inferred, r.test_cases);
    tc += r.test_cases;
    inf += r.inferred;
    cor += r.correct;
    if (r.field == "gender") {
      EXPECT_EQ(r.test_cases, 2);
      EXPECT_EQ(r.inferred, 1);
      EXPECT_EQ(r.correct, 1);
    }
  }
  EXPECT_EQ(t.overall.test_cases, tc);
  EXPECT_EQ(t.overall.inferred, inf);
  EXPECT_EQ(t.overall.correct, cor);
  EXPECT_NE(t.render_text().find("n/a"), std::string::npos);
}
