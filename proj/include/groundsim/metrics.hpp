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

#include "groundsim/profiling.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace groundsim {

struct MarkerSpan {
  std::size_t begin = 0;  // byte offset of the opening '*'
  std::size_t end = 0;    // one past the closing '*'
  std::string text;

  bool operator==(const MarkerSpan&) const = default;
  auto operator<=>(const MarkerSpan&) const = default;
};

inline constexpr std::size_t kMaxMarkerInterior = 60;  // code points

// Asterisk-bracketed action spans such as "*sobbing*". A span is '*', an
// interior of 1-60 characters with no '*' or newline, then '*', where
//  - the interior has at least one letter (so "2*3*4" is arithmetic),
//  - the interior neither starts nor ends with whitespace,
//  - the characters just outside the asterisks are not alphanumeric.
std::vector<MarkerSpan> detect_roleplay_markers(std::string_view message);

struct MetricLexicons {
  std::vector<std::string> frustration{"upset",    "angry",        "frustrated", "furious",   "annoyed",
                                       "unacceptable", "ridiculous", "terrible",   "outrageous"};

  static MetricLexicons load(const std::string& path);  // one word per line
};

struct MetricBundle {
  double roleplay_marker_rate = 0.0;
  double stage_direction_rate = 0.0;
  double frustration_rate = 0.0;
  double please_rate = 0.0;
  double list_rate = 0.0;
  double multiline_rate = 0.0;
  double avg_message_chars = 0.0;
  double avg_messages_per_conversation = 0.0;
  std::size_t message_count = 0;
  std::size_t conversation_count = 0;
  bool empty = true;
};

struct MessageFlags {
  bool roleplay = false;
  bool stage_direction = false;
  bool frustration = false;
  bool please = false;
  bool list = false;
  bool multiline = false;
};

MessageFlags message_flags(std::string_view message, const MetricLexicons& lexicons);

// Each inner vector is the user messages of one conversation.
MetricBundle compute_metrics(const std::vector<std::vector<std::string>>& conversations,
                             const MetricLexicons& lexicons = {});

std::string render_metrics_tsv(const std::vector<std::pair<std::string, MetricBundle>>& labelled);

// --- trait vectors --------------------------------------------------------

struct TraitRule {
  std::string name;
  StyleDimension dimension;
  std::vector<std::string> keywords;  // any case-insensitive substring hit sets the bit
};

struct TraitVocabulary {
  std::string version;
  std::vector<TraitRule> traits;

  // Throws VocabularyMismatch when names repeat or the table is empty.
  void validate() const;
  // Shipped 48-trait table: six traits per style dimension.
  static const TraitVocabulary& default_vocabulary();
};

struct TraitVector {
  std::string user_id;
  std::vector<std::uint8_t> bits;
  std::string vocabulary_version;

  bool operator==(const TraitVector&) const = default;
};

TraitVector trait_vector(const UserProfile& profile, const TraitVocabulary& vocabulary = TraitVocabulary::default_vocabulary());

// Whitespace-separated 0/1 matrix, one row per vector, preceded by a header
// line `user_id <trait names...>`.
std::string export_trait_matrix(const std::vector<TraitVector>& vectors, const TraitVocabulary& vocabulary);

struct ClusterModel {
  int k = 0;
  std::vector<std::vector<double>> centroids;
  std::map<std::string, int> assignments;
  std::vector<int> labels;  // in input order
  double inertia = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::vector<double> inertia_history;  // after each assignment step
  std::optional<std::string> warning;
};

// Seeded farthest-point initialization, then Lloyd iterations until the
// assignment is stable or 300 rounds pass.
ClusterModel kmeans(const std::vector<TraitVector>& vectors, int k, std::uint64_t seed, int max_iterations = 300);

// Same routine over real-valued points (used by tests and trait vectors).
ClusterModel kmeans_points(const std::vector<std::vector<double>>& points, const std::vector<std::string>& ids, int k,
                           std::uint64_t seed, int max_iterations = 300);

double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

struct CompositionRow {
  int cluster = 0;
  std::size_t members = 0;
  std::map<std::string, double> age_share;        // includes "unknown"
  std::map<std::string, double> education_share;  // includes "unknown"
};

struct CompositionTable {
  std::vector<CompositionRow> rows;
  std::vector<std::string> warnings;

  std::string render_tsv() const;
};

CompositionTable cluster_demographics(const ClusterModel& model, const std::vector<UserProfile>& profiles);

}  // namespace groundsim
