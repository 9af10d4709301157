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

#include "groundsim/pipeline.hpp"

#include "groundsim/jsonl.hpp"
#include "groundsim/parallel.hpp"

#include <algorithm>

namespace groundsim {

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  if (j.contains("subsets")) {
    c.subsets.clear();
    for (const auto& s : j["subsets"]) c.subsets.push_back(SubsetSpec::from_json(s));
  }
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    c.sim.max_agent_messages = s.value("max_agent_messages", c.sim.max_agent_messages);
    c.sim.sim_temperature = s.value("sim_temperature", c.sim.sim_temperature);
    c.sim.agent_temperature = s.value("agent_temperature", c.sim.agent_temperature);
    c.sim.sim_model = s.value("sim_model", c.sim.sim_model);
    c.sim.agent_model = s.value("agent_model", c.sim.agent_model);
  }
  c.judge.model = j.value("judge_model", c.judge.model);
  c.tagging.model = j.value("tagging_model", c.tagging.model);
  c.profiling.model = j.value("profiling_model", c.profiling.model);
  c.sim.seed = static_cast<std::int64_t>(c.seed);
  return c;
}

std::map<std::string, UserProfile> build_profiles(const std::vector<Conversation>& corpus, Gateway& gateway,
                                                  const ProfilingOptions& options, int workers,
                                                  std::vector<std::string>* notes) {
  std::map<std::string, std::vector<Conversation>> by_user;
  for (const auto& c : corpus) by_user[c.user_id].push_back(c);
  std::vector<std::string> users;
  for (auto& [u, convs] : by_user) {
    std::sort(convs.begin(), convs.end(),
              [](const Conversation& a, const Conversation& b) { return a.conversation_id < b.conversation_id; });
    users.push_back(u);
  }

  auto built = parallel_map<std::optional<UserProfile>>(users.size(), static_cast<std::size_t>(workers), [&](std::size_t i) {
    const auto& convs = by_user.at(users[i]);
    std::optional<UserProfile> out;
    PersonaManual manual;
    try {
      manual = extract_style_profile(convs, gateway, options);
    } catch (const EmptyManual&) {
      return out;
    }
    std::vector<FieldMention> mentions;
    for (const auto& c : convs) {
      auto m = extract_demographic_mentions(c, gateway, options);
      mentions.insert(mentions.end(), m.begin(), m.end());
    }
    const auto extracted = aggregate_demographics(mentions);
    const auto inferred = infer_demographics(convs, extracted, gateway, options);
    std::vector<std::string> ids;
    for (const auto& c : convs) ids.push_back(c.conversation_id);
    out = consolidate_profile(manual, extracted, inferred, std::nullopt, ids);
    return out;
  });

  std::map<std::string, UserProfile> profiles;
  for (std::size_t i = 0; i < users.size(); ++i) {
    if (built[i]) {
      profiles.emplace(users[i], std::move(*built[i]));
    } else if (notes) {
      notes->push_back("no verifiable style commands for user " + users[i] + "; profile skipped");
    }
  }
  return profiles;
}

PipelineArtifacts run_fidelity_pipeline(const std::vector<Conversation>& corpus, const PipelineConfig& cfg,
                                        Gateway& gateway) {
  PipelineArtifacts art;
  const auto workers = static_cast<std::size_t>(cfg.workers);

  art.tagged = corpus;
  std::sort(art.tagged.begin(), art.tagged.end(),
            [](const Conversation& a, const Conversation& b) { return a.conversation_id < b.conversation_id; });
  auto tags = parallel_map<ConversationTags>(art.tagged.size(), workers, [&](std::size_t i) {
    return tag_conversation(art.tagged[i], gateway, cfg.tagging);
  });
  for (std::size_t i = 0; i < art.tagged.size(); ++i) art.tagged[i].tags = tags[i];

  art.profiles = build_profiles(art.tagged, gateway, cfg.profiling, cfg.workers, &art.notes);

  for (const auto& spec : cfg.subsets) {
    auto cases = build_subset(art.tagged, spec, art.profiles);
    art.cases.insert(art.cases.end(), std::make_move_iterator(cases.begin()), std::make_move_iterator(cases.end()));
  }

  SimConfig sim = cfg.sim;
  sim.seed = static_cast<std::int64_t>(cfg.seed);
  const std::size_t n = art.cases.size();
  art.trajectories = parallel_map<SimTrajectory>(2 * n, workers, [&](std::size_t k) {
    const auto& tc = art.cases[k / 2];
    const auto spec = extract_task_spec(tc.real_conversation, gateway, cfg.task_spec);
    std::optional<UserProfile> profile;
    if (k % 2 == 1) profile = tc.cleaned_profile;
    SimTrajectory t;
    try {
      t = run_paired_simulation(spec, profile, sim, gateway, tc.case_id);
    } catch (const SimulationError& e) {
      t = e.partial();
    }
    return strip_termination(t);
  });

  const auto orders = presentation_orders(2 * n, cfg.seed);
  art.verdicts = parallel_map<PT3Verdict>(2 * n, workers, [&](std::size_t k) {
    const auto& tc = art.cases[k / 2];
    JudgeOptions opts = cfg.judge;
    opts.real_first = orders[k];
    auto v = judge_pair(tc.real_conversation, art.trajectories[k], gateway, opts);
    v.case_id = tc.case_id;
    v.subset = tc.subset;
    return v;
  });

  std::vector<PT3Verdict> base, prof;
  for (const auto& v : art.verdicts) (v.condition == SimCondition::baseline ? base : prof).push_back(v);
  art.baseline = aggregate_fidelity(base, kUniformWeights, "Baseline");
  art.with_profile = aggregate_fidelity(prof, kUniformWeights, "With Profile");
  return art;
}

std::vector<std::pair<std::string, std::string>> PipelineArtifacts::files() const {
  auto lines = [](const auto& items, auto conv) {
    std::string out;
    for (const auto& x : items) out += conv(x).dump() + "\n";
    return out;
  };
  std::vector<UserProfile> profile_list;
  for (const auto& [id, p] : profiles) profile_list.push_back(p);
  std::string notes_text;
  for (const auto& n : notes) notes_text += n + "\n";
  return {
      {"tagged.jsonl", lines(tagged, [](const Conversation& c) { return to_json(c); })},
      {"profiles.jsonl", lines(profile_list, [](const UserProfile& p) { return to_json(p); })},
      {"cases.jsonl", lines(cases, [](const TestCase& c) { return to_json(c); })},
      {"trajectories.jsonl", lines(trajectories, [](const SimTrajectory& t) { return to_json(t); })},
      {"verdicts.jsonl", lines(verdicts, [](const PT3Verdict& v) { return to_json(v); })},
      {"fidelity.txt", render_fidelity_table(baseline, with_profile)},
      {"fidelity.tsv", render_fidelity_tsv(baseline, with_profile)},
      {"notes.txt", notes_text},
  };
}

void PipelineArtifacts::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, contents] : files()) write_text_file(dir / name, contents);
}

}  // namespace groundsim
