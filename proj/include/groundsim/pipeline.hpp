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
#include "groundsim/profiling.hpp"
#include "groundsim/pt3.hpp"
#include "groundsim/simulation.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace groundsim {

struct PipelineConfig {
  std::vector<SubsetSpec> subsets{SubsetSpec{}};
  TaggingOptions tagging;
  ProfilingOptions profiling;
  TaskSpecOptions task_spec;
  SimConfig sim;
  JudgeOptions judge;
  std::uint64_t seed = 7;
  int workers = 4;

  static PipelineConfig from_json(const nlohmann::json& j);
};

struct PipelineArtifacts {
  std::vector<Conversation> tagged;
  std::map<std::string, UserProfile> profiles;
  std::vector<TestCase> cases;
  std::vector<SimTrajectory> trajectories;  // baseline then with_profile per case
  std::vector<PT3Verdict> verdicts;
  FidelityReport baseline;
  FidelityReport with_profile;
  std::vector<std::string> notes;

  // File name -> contents, in a fixed order.
  std::vector<std::pair<std::string, std::string>> files() const;
  void write(const std::filesystem::path& dir) const;
};

// Builds one profile per user from all of that user's conversations.
std::map<std::string, UserProfile> build_profiles(const std::vector<Conversation>& corpus, Gateway& gateway,
                                                  const ProfilingOptions& options, int workers,
                                                  std::vector<std::string>* notes = nullptr);

// ingest (already parsed) -> tag -> profile -> consolidate -> build subsets
// -> clean -> simulate both arms -> judge -> aggregate.
PipelineArtifacts run_fidelity_pipeline(const std::vector<Conversation>& corpus, const PipelineConfig& cfg,
                                        Gateway& gateway);

}  // namespace groundsim
