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

#include "groundsim/corpus.hpp"
#include "groundsim/error.hpp"
#include "groundsim/lang_id.hpp"
#include "groundsim/offline.hpp"
#include "groundsim/text.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace groundsim;
using namespace testing_support;

TEST(ParseConversations, CountsAndSkips) {
  std::istringstream three(
      R"({"conversation_id":"a","user_id":"u","source_model":"gpt-4","turns":[{"role":"user","content":"x"}]}
{"conversation_id":"b","user_id":"u","source_model":"gpt-4","turns":[{"role":"user","content":"y"}]}
{"conversation_id":"c","user_id":"u","source_model":"gpt-4","turns":[{"role":"user","content":"z"}]}
)");
  EXPECT_EQ(parse_conversations(three).conversations.size(), 3u);

  std::istringstream truncated(
      R"({"conversation_id":"a","user_id":"u","turns":[{"role":"user","content":"x"}]}
{"conversation_id":"b","user_id":"u","turns":[{"role":"user","content":"y"}]}
{"conversation_id":"c","user_id":"u","turns":[{"role":"us
)");
  const auto parsed = parse_conversations(truncated);
  EXPECT_EQ(parsed.conversations.size(), 2u);
  EXPECT_EQ(parsed.skipped, 1u);

  std::istringstream empty("");
  EXPECT_THROW(parse_conversations(empty), FormatError);
}

TEST(ParseConversations, NormalizesTurns) {
  std::istringstream in(
      R"({"conversation_id":"a","user_id":"u","turns":[{"role":"assistant","content":"welcome"},{"role":"user","content":"one"},{"role":"user","content":"two"},{"role":"system","content":"s"},{"role":"assistant","content":"  "},{"role":"gpt","content":"reply"}]})");
  const auto c = parse_conversations(in).conversations.at(0);
  ASSERT_EQ(c.turns.size(), 2u);
  EXPECT_EQ(c.turns[0].role, Speaker::user);
  EXPECT_EQ(c.turns[0].content, "one\ntwo");
  EXPECT_EQ(c.turns[1].content, "reply");
  EXPECT_EQ(c.turns[1].index, 1);
}

TEST(ParseConversations, RejectsInconsistentQuality) {
  std::istringstream in(
      R"({"conversation_id":"a","user_id":"u","turns":[{"role":"user","content":"x"}],"tags":{"domain":"D","task_type":"T","complexity":2,"engagement":2,"depth":2,"quality_score":9}}
{"conversation_id":"b","user_id":"u","turns":[{"role":"user","content":"x"}],"tags":{"domain":"D","task_type":"T","complexity":2,"engagement":2,"depth":2,"quality_score":6}}
)");
  const auto parsed = parse_conversations(in);
  ASSERT_EQ(parsed.conversations.size(), 1u);
  EXPECT_EQ(parsed.conversations[0].conversation_id, "b");
  EXPECT_EQ(parsed.skipped, 1u);
}

TEST(TrimTrivialRounds, RemovesGreetingRounds) {
  auto c = make_conv("a", "u", {"how do I sort a list in python by key", "thanks!"});
  const auto t = trim_trivial_rounds(c);
  ASSERT_EQ(t.turns.size(), 2u);
  EXPECT_EQ(t.turns[0].content, "how do I sort a list in python by key");

  auto long_thanks = make_conv("b", "u", {"thanks for nothing, this broke my build completely"});
  EXPECT_EQ(trim_trivial_rounds(long_thanks).turns.size(), 2u);

  auto plain = make_conv("c", "u", {"explain recursion", "show an example in C"});
  EXPECT_EQ(trim_trivial_rounds(plain), plain);
}

TEST(TrimTrivialRounds, NeverGrowsNorDropsLongTurns) {
  std::mt19937 rng(3);
  const std::vector<std::string> pool{"hi", "thanks", "ok cool", "please explain how the scheduler decides priorities here",
                                      "hey there friend", "what does this error mean in my build output today"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> msgs;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) msgs.push_back(pool[rng() % pool.size()]);
    const auto c = make_conv("x", "u", msgs);
    const auto t = trim_trivial_rounds(c);
    EXPECT_LE(t.turns.size(), c.turns.size());
    for (const auto& turn : c.turns) {
      if (turn.role == Speaker::user && text::split_words(turn.content).size() > 5) {
        const bool kept = std::any_of(t.turns.begin(), t.turns.end(), [&](const Turn& k) { return k.content == turn.content; });
        EXPECT_TRUE(kept);
      }
    }
  }
}

TEST(FilterStage1, ThresholdAndTurns) {
  const auto a = make_conv("a", "u", {"english text", "more"});
  const auto b = make_conv("b", "u", {"uncertain text", "more"});
  const auto c = make_conv("c", "u", {"short"});
  auto scorer = [](const Conversation& conv) {
    return conv.conversation_id == "b" ? LanguageTag{"en", 0.6} : LanguageTag{"en", 0.93};
  };
  const auto kept = filter_stage1({c, b, a}, scorer, 4);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].conversation_id, "a");
  EXPECT_DOUBLE_EQ(kept[0].language->confidence, 0.93);
}

TEST(FilterStage1, FixtureOfTenKeepsSix) {
  std::vector<Conversation> convs;
  const std::vector<std::pair<std::string, std::vector<std::string>>> raw{
      {"e1", {"Could you explain how photosynthesis works in plants and why the leaves are green?", "What happens at night?"}},
      {"e2", {"I need help writing a cover letter for a job application at a software company.", "Make it shorter."}},
      {"e3", {"What is the difference between a virus and a bacterium, and how do antibiotics work?", "thanks"}},
      {"e4", {"Please summarize the main causes of the French revolution for my history class.", "More detail"}},
      {"e5", {"How should I prepare for a marathon if I have only been running for six months?", "And diet?"}},
      {"e6", {"Can you recommend some good books about the history of mathematics and science?", "Any others?"}},
      {"s1", {"¿Puedes explicarme cómo funciona la fotosíntesis en las plantas y por qué las hojas son verdes?", "Gracias"}},
      {"f1", {"Pouvez-vous m'expliquer comment fonctionne la photosynthèse chez les plantes et pourquoi?", "Merci"}},
      {"d1", {"Kannst du mir erklären, wie die Photosynthese bei Pflanzen funktioniert und warum Blätter grün sind?", "Danke"}},
      {"x1", {"Write a detailed explanation of how compilers turn source code into machine instructions."}},
  };
  for (const auto& [id, msgs] : raw) {
    auto c = make_conv(id, "u", msgs);
    if (id == "x1") c.turns.resize(1);
    convs.push_back(c);
  }
  const TrigramLanguageScorer scorer;
  const auto kept = filter_stage1(convs, std::cref(scorer));
  std::vector<std::string> ids;
  for (const auto& c : kept) ids.push_back(c.conversation_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"e1", "e2", "e3", "e4", "e5", "e6"}));
}

TEST(FilterStage2, SubstantiveTurnsAndModel) {
  const auto five = make_conv("a", "u", {"explain the observer pattern", "thanks", "now show it in C++ with templates",
                                         "thanks!", "how does it compare with signals and slots"});
  const auto kept = filter_stage2({five}, "gpt-4");
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].user_turn_count(), 3u);
  EXPECT_TRUE(filter_stage2({make_conv("b", "u", {"one question", "two question", "three question"}, "gpt-3.5")}, "gpt-4").empty());
}

TEST(FilterStage2, FixtureOfEightKeepsThree) {
  std::vector<Conversation> convs{
      make_conv("q1", "u", {"first real question here", "second real question here", "third real question here"}),
      make_conv("q2", "u", {"what is a monad", "how is it used in haskell", "show a maybe example", "thanks"}),
      make_conv("q3", "u", {"plan a trip to kyoto", "what about food", "and where to stay"}),
      make_conv("n1", "u", {"first real question here", "thanks", "ok"}),
      make_conv("n2", "u", {"first real question here", "second real question here", "third real question here"}, "gpt-3.5"),
      make_conv("n3", "u", {"hello", "hi", "thanks", "a real question about linear algebra"}),
      make_conv("n4", "u", {"just one long question about kubernetes networking and services"}),
      make_conv("n5", "u", {"two real questions here", "another real question"}),
  };
  const auto kept = filter_stage2(convs, "gpt-4");
  std::vector<std::string> ids;
  for (const auto& c : kept) ids.push_back(c.conversation_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"q1", "q2", "q3"}));
}

TEST(FiltersAreOrderIndependent, Stage2Permutation) {
  std::vector<Conversation> convs;
  for (int i = 0; i < 12; ++i) {
    std::vector<std::string> msgs(static_cast<std::size_t>(1 + i % 4), "a substantive question about topic " + std::to_string(i));
    convs.push_back(make_conv("c" + std::to_string(i), "u", msgs));
  }
  const auto base = filter_stage2(convs, "gpt-4");
  std::mt19937 rng(5);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(convs.begin(), convs.end(), rng);
    EXPECT_EQ(filter_stage2(convs, "gpt-4"), base);
  }
}

TEST(TagConversation, SumRuleAndRepair) {
  const auto conv = make_conv("a", "u", {"what helps with migraines"});
  auto gw = scripted([](const ChatRequest&) {
    return std::string(R"({"domain":"Medical & Health","task_type":"Question Answering","complexity":4,"engagement":4,"depth":4})");
  });
  const auto tags = tag_conversation(conv, *gw);
  EXPECT_EQ(tags.quality_score, 12);
  EXPECT_EQ(tags.domain, "Medical & Health");

  auto max_gw = scripted([](const ChatRequest&) {
    return std::string(R"({"domain":"D","task_type":"T","complexity":5,"engagement":5,"depth":5})");
  });
  EXPECT_EQ(tag_conversation(conv, *max_gw).quality_score, 15);

  int calls = 0;
  auto repair_gw = scripted([&](const ChatRequest&) {
    return ++calls == 1 ? std::string(R"({"domain":"D","task_type":"T","complexity":7,"engagement":1,"depth":1})")
                        : std::string(R"({"domain":"D","task_type":"T","complexity":5,"engagement":1,"depth":1})");
  });
  EXPECT_EQ(tag_conversation(conv, *repair_gw).complexity, 5);
  EXPECT_EQ(calls, 2);

  auto bad_gw = scripted([](const ChatRequest&) {
    return std::string(R"({"domain":"D","task_type":"T","complexity":7,"engagement":1,"depth":1})");
  });
  EXPECT_THROW(tag_conversation(conv, *bad_gw), TagParseError);
}

TEST(Curate, UserCapKeepsTopByQuality) {
  std::vector<Conversation> convs;
  for (int i = 0; i < 5; ++i) {
    convs.push_back(tagged(make_conv("c" + std::to_string(i), "u", {"q"}), "D", 1 + i % 5, 1, 1));
  }
  CurationPolicy p;
  p.per_user_cap = 2;
  const auto kept = curate(convs, p);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].conversation_id, "c4");
  EXPECT_EQ(kept[1].conversation_id, "c3");
}

TEST(Curate, MinDomainCountAndTiebreak) {
  std::vector<Conversation> convs{
      tagged(make_conv("lonely", "u1", {"q"}), "Rare", 2, 2, 2),
      tagged(make_conv("b", "u2", {"q"}), "Common", 4, 4, 4),
      tagged(make_conv("a", "u2", {"q"}), "Common", 4, 4, 4),
      tagged(make_conv("c", "u4", {"q"}), "Common", 2, 2, 2),
  };
  CurationPolicy p;
  p.min_domain_count = 2;
  p.per_user_cap = 1;
  const auto kept = curate(convs, p);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].conversation_id, "a");
  EXPECT_EQ(kept[1].conversation_id, "c");

  // A cap below the minimum count empties the domain: keeping it would make
  // a second pass drop it.
  p.min_domain_count = 3;
  p.per_user_cap = 1000;
  p.per_domain_cap = 1;
  EXPECT_TRUE(curate(convs, p).empty());
}

TEST(Curate, ExclusionsAndIdempotence) {
  std::mt19937 rng(11);
  const std::vector<std::string> domains{"A", "B", "C", "X"};
  const std::vector<std::string> tasks{"Question Answering", "Translation", "Content Creation"};
  std::vector<Conversation> convs;
  for (int i = 0; i < 80; ++i) {
    auto c = make_conv("c" + std::to_string(100 + i), "u" + std::to_string(rng() % 9), {"q"});
    convs.push_back(tagged(c, domains[rng() % domains.size()], 1 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 5),
                           1 + static_cast<int>(rng() % 5), tasks[rng() % tasks.size()]));
  }
  CurationPolicy p;
  p.per_domain_cap = 9;
  p.per_task_cap = 12;
  p.per_user_cap = 3;
  p.min_domain_count = 2;
  p.excluded_domains = {"X"};
  const auto once = curate(convs, p);
  EXPECT_EQ(curate(once, p), once);
  for (const auto& c : once) {
    EXPECT_NE(c.tags->domain, "X");
    EXPECT_NE(c.tags->task_type, "Translation");
  }
  std::shuffle(convs.begin(), convs.end(), rng);
  EXPECT_EQ(curate(convs, p), once);
}

TEST(CurationPolicy, ValidatesCaps) {
  EXPECT_THROW(CurationPolicy::from_json({{"per_user_cap", 0}}), InvalidRequest);
  const auto p = CurationPolicy::from_json({{"per_domain_cap", 7}, {"excluded_domains", {"Z"}}});
  EXPECT_EQ(p.per_domain_cap, 7);
  EXPECT_EQ(p.excluded_domains.count("Z"), 1u);
}

TEST(LanguageScorer, DistinguishesLanguages) {
  const TrigramLanguageScorer s;
  EXPECT_EQ(s.score("The quick brown fox jumps over the lazy dog and then runs away into the forest.").code, "en");
  EXPECT_EQ(s.score("El rápido zorro marrón salta sobre el perro perezoso y luego corre hacia el bosque.").code, "es");
  const auto en = s.score("Could you please tell me how I can improve the performance of my database queries?");
  EXPECT_GE(en.confidence, 0.7);
  EXPECT_LE(en.confidence, 1.0);
}

TEST(MiniCorpus, OfflineTaggingMeetsQualityFloor) {
  std::ifstream in(data_dir() / "mini_corpus.jsonl");
  const auto convs = parse_conversations(in).conversations;
  ASSERT_EQ(convs.size(), 10u);
  Gateway gw(std::make_shared<OfflineResponder>(), ProviderConfig{});
  for (const auto& c : convs) {
    const auto t = tag_conversation(c, gw);
    EXPECT_GE(t.quality_score, 10) << c.conversation_id;
    EXPECT_GE(c.user_turn_count(), 3u);
  }
}
