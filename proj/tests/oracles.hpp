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

// Reference implementations used only by tests. They favour obviousness over
// speed and share no code with the library.

#include "groundsim/profiling.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

struct Span {
  std::size_t begin;
  std::size_t end;
  bool operator==(const Span&) const = default;
};

inline bool alnum_at(std::string_view s, std::size_t i) {
  return std::isalnum(static_cast<unsigned char>(s[i])) != 0;
}

inline std::size_t code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

// s[i..j] is a marker when both ends are '*' and the interior satisfies the
// predicate documented for detect_roleplay_markers.
inline bool is_marker(std::string_view s, std::size_t i, std::size_t j) {
  if (s[i] != '*' || s[j] != '*' || j <= i + 1) return false;
  const auto interior = s.substr(i + 1, j - i - 1);
  if (code_points(interior) > 60) return false;
  if (interior.find('*') != std::string_view::npos || interior.find('\n') != std::string_view::npos) return false;
  if (std::isspace(static_cast<unsigned char>(interior.front())) || std::isspace(static_cast<unsigned char>(interior.back()))) {
    return false;
  }
  const bool letter = std::any_of(interior.begin(), interior.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || u >= 0x80;
  });
  if (!letter) return false;
  if (i > 0 && alnum_at(s, i - 1)) return false;
  if (j + 1 < s.size() && alnum_at(s, j + 1)) return false;
  return true;
}

// Every substring tested against the predicate.
inline std::vector<Span> markers(std::string_view s) {
  std::vector<Span> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (is_marker(s, i, j)) out.push_back({i, j + 1});
    }
  }
  return out;
}

// Exhaustive search over all 2-partitions (element 0 fixed in group A).
// Returns group labels minimizing within-group sum of squares.
inline std::pair<std::vector<int>, double> best_two_partition(const std::vector<std::vector<double>>& pts) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts.front().size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_labels;
  for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<int> labels(n, 0);
    for (std::size_t i = 1; i < n; ++i) labels[i] = (mask >> (i - 1)) & 1u;
    double cost = 0;
    bool both = false;
    for (int g = 0; g < 2; ++g) {
      std::vector<double> mean(dim, 0.0);
      int count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != g) continue;
        ++count;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += pts[i][d];
      }
      if (count == 0) break;
      if (g == 1) both = true;
      for (auto& m : mean) m /= count;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != g) continue;
        for (std::size_t d = 0; d < dim; ++d) cost += (pts[i][d] - mean[d]) * (pts[i][d] - mean[d]);
      }
    }
    if (both && cost < best - 1e-12) {
      best = cost;
      best_labels = labels;
    }
  }
  return {best_labels, best};
}

// Value with more than half of the votes, if any.
inline std::optional<std::string> strict_majority(const std::vector<std::string>& votes) {
  std::map<std::string, int> tally;
  for (const auto& v : votes) ++tally[v];
  for (const auto& [v, c] : tally) {
    if (2 * c > static_cast<int>(votes.size())) return v;
  }
  return std::nullopt;
}

// True when the top vote count is shared by two or more values.
inline bool top_tie(const std::vector<std::string>& votes) {
  std::map<std::string, int> tally;
  for (const auto& v : votes) ++tally[v];
  int top = 0, holders = 0;
  for (const auto& [v, c] : tally) {
    if (c > top) {
      top = c;
      holders = 1;
    } else if (c == top) {
      ++holders;
    }
  }
  return holders > 1;
}

}  // namespace oracle
