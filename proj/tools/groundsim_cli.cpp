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
#include "groundsim/gateway.hpp"
#include "groundsim/harness.hpp"
#include "groundsim/http_provider.hpp"
#include "groundsim/jsonl.hpp"
#include "groundsim/lang_id.hpp"
#include "groundsim/metrics.hpp"
#include "groundsim/offline.hpp"
#include "groundsim/parallel.hpp"
#include "groundsim/persona.hpp"
#include "groundsim/pipeline.hpp"
#include "groundsim/profiling.hpp"
#include "groundsim/pt3.hpp"
#include "groundsim/simulation.hpp"
#include "groundsim/text.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>

using namespace groundsim;

namespace {

struct ProviderOptions {
  std::string kind = "offline";
  std::string fixtures;
  std::string fallback = "error";
  std::string config;
  int workers = 4;
};

std::unique_ptr<Gateway> make_gateway(const ProviderOptions& o) {
  ProviderConfig cfg = o.config.empty() ? ProviderConfig{} : ProviderConfig::load(o.config);
  std::shared_ptr<Provider> provider;
  if (o.kind == "offline") {
    provider = std::make_shared<OfflineResponder>();
  } else if (o.kind == "mock") {
    const auto fb = fallback_from_string(o.fallback);
    provider = std::make_shared<MockProvider>(o.fixtures.empty() ? TranscriptFixture(fb) : TranscriptFixture::load(o.fixtures, fb));
  } else if (o.kind == "http") {
    cfg.validate();
    provider = std::make_shared<HttpProvider>(make_httplib_transport());
  } else {
    throw InvalidRequest("unknown provider '" + o.kind + "' (offline, mock or http)");
  }
  return std::make_unique<Gateway>(provider, cfg);
}

std::vector<Conversation> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidRequest("cannot open " + path);
  auto parsed = parse_conversations(in);
  if (parsed.skipped) fmt::print(stderr, "skipped {} malformed records in {}\n", parsed.skipped, path);
  return parsed.conversations;
}

void write_corpus(const std::string& path, const std::vector<Conversation>& convs) {
  std::vector<json> out;
  for (const auto& c : convs) out.push_back(to_json(c));
  write_json_lines(path, out);
}

std::vector<UserProfile> read_profiles(const std::string& path) {
  std::vector<UserProfile> out;
  for (const auto& r : read_json_lines(path).records) out.push_back(profile_from_json(r));
  return out;
}

std::map<std::string, UserProfile> profile_map(const std::vector<UserProfile>& v) {
  std::map<std::string, UserProfile> m;
  for (const auto& p : v) m.emplace(p.user_id, p);
  return m;
}

std::map<std::string, std::vector<Conversation>> by_user(const std::vector<Conversation>& convs) {
  std::map<std::string, std::vector<Conversation>> m;
  for (const auto& c : convs) m[c.user_id].push_back(c);
  for (auto& [u, v] : m) {
    std::sort(v.begin(), v.end(), [](const Conversation& a, const Conversation& b) { return a.conversation_id < b.conversation_id; });
  }
  return m;
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    write_text_file(path, contents);
  }
}

std::vector<TestCase> read_cases(const std::string& path) {
  std::vector<TestCase> out;
  for (const auto& r : read_json_lines(path).records) out.push_back(test_case_from_json(r));
  return out;
}

std::vector<std::vector<std::string>> conversations_from_turn_records(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : read_json_lines(path).records) {
    std::vector<std::string> msgs;
    for (const auto& t : r.at("turns")) {
      if (t.value("role", std::string()) != "user") continue;
      std::string m = t.value("content", std::string());
      const auto pos = m.rfind(kTerminationToken);
      if (pos != std::string::npos) m.erase(pos, kTerminationToken.size());
      m = text::trim(m);
      if (!m.empty()) msgs.push_back(m);
    }
    out.push_back(std::move(msgs));
  }
  return out;
}

json cluster_to_json(const ClusterModel& m) {
  json j{{"k", m.k},
         {"seed", m.seed},
         {"iterations", m.iterations},
         {"inertia", m.inertia},
         {"inertia_history", m.inertia_history},
         {"centroids", m.centroids},
         {"assignments", m.assignments},
         {"labels", m.labels}};
  if (m.warning) j["warning"] = *m.warning;
  return j;
}

ClusterModel cluster_from_json(const json& j) {
  ClusterModel m;
  m.k = j.at("k").get<int>();
  m.seed = j.value("seed", std::uint64_t{0});
  m.iterations = j.value("iterations", 0);
  m.inertia = j.value("inertia", 0.0);
  m.inertia_history = j.value("inertia_history", std::vector<double>{});
  m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
  m.assignments = j.at("assignments").get<std::map<std::string, int>>();
  m.labels = j.value("labels", std::vector<int>{});
  if (j.contains("warning")) m.warning = j["warning"].get<std::string>();
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"groundsim: conversation-grounded user simulation toolkit"};
  app.require_subcommand(1);
  ProviderOptions po;
  app.add_option("--provider", po.kind, "offline | mock | http")->capture_default_str();
  app.add_option("--fixtures", po.fixtures, "transcript fixture file for --provider mock");
  app.add_option("--fallback", po.fallback, "fixture miss policy: error | echo | canned")->capture_default_str();
  app.add_option("--config", po.config, "provider config JSON");
  app.add_option("--workers", po.workers, "parallel requests")->capture_default_str();

  std::string in, out, out_txt, policy, profiles_path, tasks_path, cases_path, traj_path, spec_path;
  std::uint64_t seed = 7;

  // corpus ----------------------------------------------------------------
  auto* corpus = app.add_subcommand("corpus", "ingest, trim, filter, tag and curate conversations");
  corpus->require_subcommand(1);
  auto* c_ingest = corpus->add_subcommand("ingest", "parse and normalize records");
  auto* c_trim = corpus->add_subcommand("trim", "drop trivial greeting/thanks rounds");
  auto* c_filter = corpus->add_subcommand("filter", "stage 1 (language, length) or stage 2 (model, substance)");
  auto* c_tag = corpus->add_subcommand("tag", "attach domain, task type and quality scores");
  auto* c_curate = corpus->add_subcommand("curate", "apply caps and exclusions");
  for (auto* s : {c_ingest, c_trim, c_filter, c_tag, c_curate}) {
    s->add_option("--in", in)->required();
    s->add_option("--out", out)->required();
  }
  int stage = 1, min_turns = 2, min_substantive = 3;
  std::string lang = "en", required_model = "gpt-4";
  double min_conf = 0.7;
  c_filter->add_option("--stage", stage)->check(CLI::IsMember({1, 2}));
  c_filter->add_option("--min-turns", min_turns);
  c_filter->add_option("--lang", lang);
  c_filter->add_option("--min-confidence", min_conf);
  c_filter->add_option("--model", required_model);
  c_filter->add_option("--min-substantive", min_substantive);
  c_curate->add_option("--policy", policy, "curation policy JSON");

  // profile ---------------------------------------------------------------
  auto* profile = app.add_subcommand("profile", "build user profiles");
  profile->require_subcommand(1);
  auto* p_style = profile->add_subcommand("style", "extract executable persona manuals");
  auto* p_extract = profile->add_subcommand("demo-extract", "extract explicit demographic mentions");
  auto* p_infer = profile->add_subcommand("demo-infer", "infer missing demographic fields");
  auto* p_consolidate = profile->add_subcommand("consolidate", "merge manuals and demographics into profiles");
  auto* p_validate = profile->add_subcommand("validate", "check profiles, or score inference against golden values");
  std::string manuals_path, mentions_path, inferred_path, backgrounds_path, pairs_path;
  for (auto* s : {p_style, p_extract}) {
    s->add_option("--in", in, "corpus file")->required();
    s->add_option("--out", out)->required();
  }
  p_infer->add_option("--in", in, "corpus file")->required();
  p_infer->add_option("--mentions", mentions_path)->required();
  p_infer->add_option("--out", out)->required();
  p_consolidate->add_option("--manuals", manuals_path)->required();
  p_consolidate->add_option("--mentions", mentions_path)->required();
  p_consolidate->add_option("--inferred", inferred_path);
  p_consolidate->add_option("--backgrounds", backgrounds_path, "records {user_id, background}");
  p_consolidate->add_option("--out", out)->required();
  p_validate->add_option("--profiles", profiles_path);
  p_validate->add_option("--pairs", pairs_path, "records {inferred, golden}");
  p_validate->add_option("--out", out);

  // persona ---------------------------------------------------------------
  auto* persona = app.add_subcommand("persona", "persona blocks and directive separation");
  persona->require_subcommand(1);
  auto* pe_render = persona->add_subcommand("render", "render a profile as a persona block");
  auto* pe_separate = persona->add_subcommand("separate", "split task scenarios into task_only and directives");
  std::string profile_id;
  bool wrap = false;
  pe_render->add_option("--profiles", profiles_path)->required();
  pe_render->add_option("--profile", profile_id)->required();
  pe_render->add_flag("--override", wrap, "wrap in the persona_override block");
  pe_render->add_option("--out", out);
  pe_separate->add_option("--tasks", tasks_path)->required();
  pe_separate->add_option("--out", out)->required();

  // simulate --------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "run paired simulations for a subset");
  std::string condition = "baseline";
  SimConfig sim_cfg;
  simulate->add_option("--subset", cases_path, "test cases file")->required();
  simulate->add_option("--condition", condition, "baseline | profile")->required();
  simulate->add_option("--seed", seed);
  simulate->add_option("--max-agent-messages", sim_cfg.max_agent_messages);
  simulate->add_option("--sim-model", sim_cfg.sim_model);
  simulate->add_option("--agent-model", sim_cfg.agent_model);
  simulate->add_option("--out", out)->required();

  // pt3 -------------------------------------------------------------------
  auto* pt3 = app.add_subcommand("pt3", "paired trajectory judging");
  pt3->require_subcommand(1);
  auto* t_build = pt3->add_subcommand("build", "select test cases");
  auto* t_clean = pt3->add_subcommand("clean", "re-run anti-leakage cleaning and report class counts");
  auto* t_judge = pt3->add_subcommand("judge", "judge real vs synthetic trajectories");
  auto* t_report = pt3->add_subcommand("report", "aggregate verdicts into the fidelity table");
  std::string tsv_out;
  std::vector<std::string> verdict_paths;
  t_build->add_option("--corpus", in, "tagged corpus")->required();
  t_build->add_option("--profiles", profiles_path)->required();
  t_build->add_option("--spec", spec_path, "subset spec JSON");
  t_build->add_option("--out", out)->required();
  t_clean->add_option("--cases", cases_path)->required();
  t_clean->add_option("--out", out);
  t_judge->add_option("--cases", cases_path)->required();
  t_judge->add_option("--trajectories", traj_path)->required();
  t_judge->add_option("--seed", seed);
  t_judge->add_option("--out", out)->required();
  std::vector<double> weights;
  t_report->add_option("--verdicts", verdict_paths, "one or more verdict files")->required();
  t_report->add_option("--weights", weights, "five weights summing to 1")->expected(5)->delimiter(',');
  t_report->add_option("--tsv", tsv_out);
  t_report->add_option("--out", out_txt);

  // metrics ---------------------------------------------------------------
  auto* metrics = app.add_subcommand("metrics", "behavioral metrics and trait clustering");
  metrics->require_subcommand(1);
  auto* m_compute = metrics->add_subcommand("compute", "metric bundle per labelled trajectory file");
  auto* m_vectors = metrics->add_subcommand("vectors", "export trait vectors");
  auto* m_cluster = metrics->add_subcommand("cluster", "k-means over trait vectors");
  auto* m_comp = metrics->add_subcommand("composition", "demographic composition of clusters");
  std::vector<std::string> labelled;
  std::string lexicon, model_path;
  int k = 4;
  m_compute->add_option("--in", labelled, "label=path, repeatable")->required();
  m_compute->add_option("--lexicon", lexicon, "frustration word list");
  m_compute->add_option("--out", out);
  m_vectors->add_option("--profiles", profiles_path)->required();
  m_vectors->add_option("--out", out);
  m_cluster->add_option("--profiles", profiles_path)->required();
  m_cluster->add_option("--k", k);
  m_cluster->add_option("--seed", seed);
  m_cluster->add_option("--out", out)->required();
  m_comp->add_option("--profiles", profiles_path)->required();
  m_comp->add_option("--model", model_path)->required();
  m_comp->add_option("--out", out);

  // harness ---------------------------------------------------------------
  auto* harness = app.add_subcommand("harness", "agent evaluation under Original / NP / Persona");
  harness->require_subcommand(1);
  auto* h_separate = harness->add_subcommand("separate", "attach directive splits to tasks");
  auto* h_assign = harness->add_subcommand("assign", "sample personas for tasks");
  auto* h_run = harness->add_subcommand("run", "run one condition against an environment");
  auto* h_aggregate = harness->add_subcommand("aggregate", "success-rate tables from run results");
  auto* h_sens = harness->add_subcommand("sensitivity", "behavioral metrics with vs without directives");
  std::string pool = "all", env_spec = "mock", assignment_path, transcripts_out, rules_path;
  std::vector<std::string> results_paths;
  HarnessConfig hcfg;
  h_separate->add_option("--tasks", tasks_path)->required();
  h_separate->add_option("--out", out)->required();
  h_assign->add_option("--tasks", tasks_path)->required();
  h_assign->add_option("--profiles", profiles_path)->required();
  h_assign->add_option("--pool", pool, "all | high_edu | low_edu | young | oldest");
  h_assign->add_option("--pool-rules", rules_path);
  h_assign->add_option("--seed", seed);
  h_assign->add_option("--out", out)->required();
  std::string run_condition_name = "np";
  h_run->add_option("--tasks", tasks_path, "task file; defaults to the built-in mock airline tasks");
  h_run->add_option("--condition", run_condition_name, "original | np | persona | perfect")->required();
  h_run->add_option("--assignment", assignment_path);
  h_run->add_option("--profiles", profiles_path);
  h_run->add_option("--seed", seed);
  h_run->add_option("--env", env_spec, "mock | adapter:<path>");
  h_run->add_option("--sim-model", hcfg.sim_model);
  h_run->add_option("--agent-model", hcfg.agent_model);
  h_run->add_option("--out", out)->required();
  h_run->add_option("--transcripts", transcripts_out);
  h_aggregate->add_option("--results", results_paths, "one or more result files")->required();
  h_aggregate->add_option("--tsv", tsv_out);
  h_aggregate->add_option("--out", out_txt);
  std::string orig_path, np_path, label;
  h_sens->add_option("--orig", orig_path, "Original-condition transcripts")->required();
  h_sens->add_option("--np", np_path, "NP-condition transcripts")->required();
  h_sens->add_option("--label", label);
  h_sens->add_option("--lexicon", lexicon);
  h_sens->add_option("--tsv", tsv_out);
  h_sens->add_option("--out", out_txt);

  // pipeline --------------------------------------------------------------
  auto* pipeline = app.add_subcommand("pipeline", "end-to-end fidelity evaluation on a corpus");
  std::string out_dir;
  pipeline->add_option("--corpus", in)->required();
  pipeline->add_option("--spec", spec_path, "pipeline config JSON");
  pipeline->add_option("--seed", seed);
  pipeline->add_option("--out-dir", out_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    // corpus
    if (c_ingest->parsed()) {
      auto convs = read_corpus(in);
      write_corpus(out, convs);
      fmt::print("{} conversations\n", convs.size());
    } else if (c_trim->parsed()) {
      std::vector<Conversation> outv;
      for (const auto& c : read_corpus(in)) outv.push_back(trim_trivial_rounds(c));
      write_corpus(out, outv);
    } else if (c_filter->parsed()) {
      auto convs = read_corpus(in);
      std::vector<Conversation> kept;
      if (stage == 1) {
        TrigramLanguageScorer scorer;
        kept = filter_stage1(convs, std::cref(scorer), min_turns, lang, min_conf);
      } else {
        kept = filter_stage2(convs, required_model, min_substantive);
      }
      write_corpus(out, kept);
      fmt::print("kept {} of {}\n", kept.size(), convs.size());
    } else if (c_tag->parsed()) {
      auto gw = make_gateway(po);
      auto convs = read_corpus(in);
      auto tags = parallel_map<ConversationTags>(convs.size(), static_cast<std::size_t>(po.workers),
                                                 [&](std::size_t i) { return tag_conversation(convs[i], *gw); });
      for (std::size_t i = 0; i < convs.size(); ++i) convs[i].tags = tags[i];
      write_corpus(out, convs);
    } else if (c_curate->parsed()) {
      CurationPolicy pol = policy.empty() ? CurationPolicy{} : CurationPolicy::from_json(json::parse(read_text_file(policy)));
      pol.validate();
      auto kept = curate(read_corpus(in), pol);
      write_corpus(out, kept);
      fmt::print("{} conversations after curation\n", kept.size());
    }
    // profile
    else if (p_style->parsed()) {
      auto gw = make_gateway(po);
      std::vector<json> recs;
      for (const auto& [uid, convs] : by_user(read_corpus(in))) {
        UserProfile p;
        p.user_id = uid;
        for (const auto& c : convs) p.conversation_ids.push_back(c.conversation_id);
        try {
          p.manual = extract_style_profile(convs, *gw);
        } catch (const EmptyManual& e) {
          fmt::print(stderr, "{}: {}\n", uid, e.what());
          continue;
        }
        recs.push_back(to_json(p));
      }
      write_json_lines(out, recs);
    } else if (p_extract->parsed()) {
      auto gw = make_gateway(po);
      std::vector<json> recs;
      for (const auto& c : read_corpus(in)) {
        for (const auto& m : extract_demographic_mentions(c, *gw)) {
          auto j = to_json(m);
          j["user_id"] = c.user_id;
          recs.push_back(j);
        }
      }
      write_json_lines(out, recs);
    } else if (p_infer->parsed()) {
      auto gw = make_gateway(po);
      std::map<std::string, std::vector<FieldMention>> mentions;
      for (const auto& r : read_json_lines(mentions_path).records) mentions[r.value("user_id", std::string())].push_back(mention_from_json(r));
      std::vector<json> recs;
      for (const auto& [uid, convs] : by_user(read_corpus(in))) {
        const auto extracted = aggregate_demographics(mentions[uid]);
        auto inferred = infer_demographics(convs, extracted, *gw);
        DemographicRecord only_new;
        for (const auto& [f, v] : inferred.fields) {
          if (v.source == ValueSource::inferred) only_new.fields[f] = v;
        }
        recs.push_back({{"user_id", uid}, {"demographics", to_json(only_new)}});
      }
      write_json_lines(out, recs);
    } else if (p_consolidate->parsed()) {
      std::map<std::string, std::vector<FieldMention>> mentions;
      for (const auto& r : read_json_lines(mentions_path).records) mentions[r.value("user_id", std::string())].push_back(mention_from_json(r));
      std::map<std::string, DemographicRecord> inferred;
      if (!inferred_path.empty()) {
        for (const auto& r : read_json_lines(inferred_path).records) {
          inferred[r.at("user_id").get<std::string>()] = demographics_from_json(r.at("demographics"));
        }
      }
      std::map<std::string, std::string> backgrounds;
      if (!backgrounds_path.empty()) {
        for (const auto& r : read_json_lines(backgrounds_path).records) backgrounds[r.at("user_id")] = r.at("background");
      }
      std::vector<json> recs;
      for (const auto& m : read_profiles(manuals_path)) {
        std::optional<std::string> bg;
        if (auto it = backgrounds.find(m.user_id); it != backgrounds.end()) bg = it->second;
        auto p = consolidate_profile(m.manual, aggregate_demographics(mentions[m.user_id]), inferred[m.user_id], bg,
                                     m.conversation_ids);
        recs.push_back(to_json(p));
      }
      write_json_lines(out, recs);
    } else if (p_validate->parsed()) {
      if (!profiles_path.empty()) {
        std::size_t n = 0;
        for (const auto& p : read_profiles(profiles_path)) {
          p.validate();
          ++n;
        }
        fmt::print("{} profiles valid\n", n);
      }
      if (!pairs_path.empty()) {
        std::vector<ProfilePair> pairs;
        for (const auto& r : read_json_lines(pairs_path).records) {
          pairs.push_back({demographics_from_json(r.at("inferred")), demographics_from_json(r.at("golden"))});
        }
        const auto table = validate_inference(pairs);
        std::cout << table.render_text();
        if (!out.empty()) write_text_file(out, table.render_tsv());
      }
    }
    // persona
    else if (pe_render->parsed()) {
      const auto profiles = profile_map(read_profiles(profiles_path));
      auto it = profiles.find(profile_id);
      if (it == profiles.end()) throw InvalidRequest("no profile " + profile_id);
      const auto block = format_persona(it->second);
      emit(out, (wrap ? persona_override_block(block) : block.rendered) + "\n");
    } else if (pe_separate->parsed() || h_separate->parsed()) {
      auto gw = make_gateway(po);
      auto tasks = load_tasks(tasks_path);
      separate_tasks(tasks, *gw);
      std::vector<json> recs;
      for (const auto& t : tasks) recs.push_back(to_json(t));
      write_json_lines(out, recs);
    }
    // simulate
    else if (simulate->parsed()) {
      auto gw = make_gateway(po);
      const auto cond = sim_condition_from_string(condition);
      sim_cfg.seed = static_cast<std::int64_t>(seed);
      const auto cases = read_cases(cases_path);
      auto trajs = parallel_map<SimTrajectory>(cases.size(), static_cast<std::size_t>(po.workers), [&](std::size_t i) {
        const auto spec = extract_task_spec(cases[i].real_conversation, *gw);
        std::optional<UserProfile> prof;
        if (cond == SimCondition::with_profile) prof = cases[i].cleaned_profile;
        try {
          return run_paired_simulation(spec, prof, sim_cfg, *gw, cases[i].case_id);
        } catch (const SimulationError& e) {
          fmt::print(stderr, "{}: {}\n", cases[i].case_id, e.what());
          return e.partial();
        }
      });
      std::vector<json> recs;
      for (const auto& t : trajs) recs.push_back(to_json(t));
      write_json_lines(out, recs);
    }
    // pt3
    else if (t_build->parsed()) {
      // Either one subset spec or a pipeline config with a "subsets" list.
      std::vector<SubsetSpec> specs{SubsetSpec{}};
      if (!spec_path.empty()) {
        const auto j = json::parse(read_text_file(spec_path));
        specs.clear();
        if (j.contains("subsets")) {
          for (const auto& s : j["subsets"]) specs.push_back(SubsetSpec::from_json(s));
        } else {
          specs.push_back(SubsetSpec::from_json(j));
        }
      }
      const auto corpus = read_corpus(in);
      const auto profiles = profile_map(read_profiles(profiles_path));
      std::vector<TestCase> cases;
      for (const auto& spec : specs) {
        for (auto& c : build_subset(corpus, spec, profiles)) cases.push_back(std::move(c));
      }
      std::vector<json> recs;
      for (const auto& c : cases) recs.push_back(to_json(c));
      write_json_lines(out, recs);
      fmt::print("{} cases\n", cases.size());
    } else if (t_clean->parsed()) {
      auto cases = read_cases(cases_path);
      std::map<std::string, int> counts;
      for (auto& c : cases) {
        auto r = clean_profile(c.profile, c.real_conversation.conversation_id);
        c.cleaned_profile = r.profile;
        c.cleaning_class = r.cleaning_class;
        ++counts[to_string(r.cleaning_class)];
      }
      for (const char* cls : {"stripped_all", "removed_tagged", "unchanged"}) fmt::print("{}\t{}\n", cls, counts[cls]);
      if (!out.empty()) {
        std::vector<json> recs;
        for (const auto& c : cases) recs.push_back(to_json(c));
        write_json_lines(out, recs);
      }
    } else if (t_judge->parsed()) {
      auto gw = make_gateway(po);
      const auto cases = read_cases(cases_path);
      std::map<std::string, const TestCase*> by_id;
      for (const auto& c : cases) by_id[c.case_id] = &c;
      std::vector<SimTrajectory> trajs;
      for (const auto& r : read_json_lines(traj_path).records) trajs.push_back(strip_termination(trajectory_from_json(r)));
      const auto orders = presentation_orders(trajs.size(), seed);
      auto verdicts = parallel_map<PT3Verdict>(trajs.size(), static_cast<std::size_t>(po.workers), [&](std::size_t i) {
        auto it = by_id.find(trajs[i].case_id);
        if (it == by_id.end()) throw InvalidRequest("trajectory for unknown case " + trajs[i].case_id);
        JudgeOptions opts;
        opts.real_first = orders[i];
        auto v = judge_pair(it->second->real_conversation, trajs[i], *gw, opts);
        v.subset = it->second->subset;
        return v;
      });
      std::vector<json> recs;
      for (const auto& v : verdicts) recs.push_back(to_json(v));
      write_json_lines(out, recs);
    } else if (t_report->parsed()) {
      std::vector<PT3Verdict> base, prof;
      for (const auto& path : verdict_paths) {
        for (const auto& r : read_json_lines(path).records) {
          auto v = verdict_from_json(r);
          (v.condition == SimCondition::baseline ? base : prof).push_back(v);
        }
      }
      DimensionWeights w = kUniformWeights;
      if (!weights.empty()) std::copy(weights.begin(), weights.end(), w.begin());
      const auto b = aggregate_fidelity(base, w, "Baseline");
      const auto p = aggregate_fidelity(prof, w, "With Profile");
      emit(out_txt, render_fidelity_table(b, p));
      if (!tsv_out.empty()) write_text_file(tsv_out, render_fidelity_tsv(b, p));
    }
    // metrics
    else if (m_compute->parsed()) {
      const auto lex = lexicon.empty() ? MetricLexicons{} : MetricLexicons::load(lexicon);
      std::vector<std::pair<std::string, MetricBundle>> rows;
      for (const auto& spec : labelled) {
        const auto eq = spec.find('=');
        const auto name = eq == std::string::npos ? spec : spec.substr(0, eq);
        const auto path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        rows.emplace_back(name, compute_metrics(conversations_from_turn_records(path), lex));
      }
      emit(out, render_metrics_tsv(rows));
    } else if (m_vectors->parsed()) {
      const auto& vocab = TraitVocabulary::default_vocabulary();
      std::vector<TraitVector> vs;
      for (const auto& p : read_profiles(profiles_path)) vs.push_back(trait_vector(p, vocab));
      emit(out, export_trait_matrix(vs, vocab));
    } else if (m_cluster->parsed()) {
      std::vector<TraitVector> vs;
      for (const auto& p : read_profiles(profiles_path)) vs.push_back(trait_vector(p));
      const auto model = kmeans(vs, k, seed);
      if (model.warning) fmt::print(stderr, "warning: {}\n", *model.warning);
      write_text_file(out, cluster_to_json(model).dump(2) + "\n");
      fmt::print("k={} inertia={:.4f} iterations={}\n", model.k, model.inertia, model.iterations);
    } else if (m_comp->parsed()) {
      const auto model = cluster_from_json(json::parse(read_text_file(model_path)));
      const auto table = cluster_demographics(model, read_profiles(profiles_path));
      for (const auto& w : table.warnings) fmt::print(stderr, "warning: {}\n", w);
      emit(out, table.render_tsv());
    }
    // harness
    else if (h_assign->parsed()) {
      const auto tasks = load_tasks(tasks_path);
      const PoolRules rules = rules_path.empty() ? PoolRules{} : PoolRules::from_json(json::parse(read_text_file(rules_path)));
      const auto pool_profiles = select_pool(read_profiles(profiles_path), pool_criterion_from_string(pool), rules);
      const auto a = assign_personas(tasks, pool_profiles, seed, pool);
      write_text_file(out, to_json(a).dump(2) + "\n");
      fmt::print("{} tasks assigned from a pool of {}\n", a.task_to_profile.size(), pool_profiles.size());
    } else if (h_run->parsed()) {
      auto gw = make_gateway(po);
      auto tasks = tasks_path.empty() ? mock_airline_tasks() : load_tasks(tasks_path);
      const auto cond = run_condition_from_string(run_condition_name);
      if (cond != RunCondition::original) separate_tasks(tasks, *gw);
      std::optional<PersonaAssignment> assignment;
      std::map<std::string, UserProfile> profiles;
      if (!profiles_path.empty()) profiles = profile_map(read_profiles(profiles_path));
      if (!assignment_path.empty()) assignment = assignment_from_json(json::parse(read_text_file(assignment_path)));
      hcfg.workers = po.workers;
      const auto result = run_condition(tasks, cond, assignment, profiles, hcfg, environment_factory(env_spec), *gw, seed);
      std::ofstream(out, std::ios::app) << to_json(result).dump() << "\n";
      if (!transcripts_out.empty()) {
        std::vector<json> recs;
        for (const auto& o : result.outcomes) {
          json turns = json::array();
          for (const auto& t : o.transcript) turns.push_back({{"role", to_string(t.role)}, {"content", t.content}});
          recs.push_back({{"task_id", o.task_id},
                          {"condition", to_string(cond)},
                          {"seed", seed},
                          {"sim_model", hcfg.sim_model},
                          {"success", o.success},
                          {"turns", turns}});
        }
        write_json_lines(transcripts_out, recs);
      }
      fmt::print("{} success rate {:.1f}%\n", to_string(cond), 100.0 * result.success_rate);
      for (const auto& o : result.outcomes) {
        if (!o.diagnostic.empty()) fmt::print(stderr, "task {}: {}\n", o.task_id, o.diagnostic);
      }
    } else if (h_aggregate->parsed()) {
      std::vector<RunResult> results;
      for (const auto& p : results_paths) {
        for (const auto& r : read_json_lines(p).records) results.push_back(run_result_from_json(r));
      }
      const auto report = aggregate_runs(results);
      emit(out_txt, report.render_text());
      if (!tsv_out.empty()) write_text_file(tsv_out, report.render_tsv());
    } else if (h_sens->parsed()) {
      const auto lex = lexicon.empty() ? MetricLexicons{} : MetricLexicons::load(lexicon);
      const auto r = directive_sensitivity_report(conversations_from_turn_records(orig_path),
                                                  conversations_from_turn_records(np_path), label, lex);
      emit(out_txt, r.render_text());
      if (!tsv_out.empty()) write_text_file(tsv_out, r.render_tsv());
    }
    // pipeline
    else if (pipeline->parsed()) {
      auto gw = make_gateway(po);
      PipelineConfig cfg = spec_path.empty() ? PipelineConfig{} : PipelineConfig::from_json(json::parse(read_text_file(spec_path)));
      if (app.get_subcommand("pipeline")->count("--seed")) cfg.seed = seed;
      cfg.workers = po.workers;
      const auto art = run_fidelity_pipeline(read_corpus(in), cfg, *gw);
      art.write(out_dir);
      std::cout << render_fidelity_table(art.baseline, art.with_profile);
      for (const auto& n : art.notes) fmt::print(stderr, "note: {}\n", n);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
