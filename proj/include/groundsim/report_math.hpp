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

#include <string>
#include <vector>

namespace groundsim {

// Half-up (away from zero) rounding to `decimals` places. A relative nudge
// absorbs binary representation error so 24.25 rounds to 24.3.
double round_half_up(double value, int decimals = 1);

// Percent string with one decimal, e.g. 0.2418 -> "24.2".
std::string format_percent(double fraction);
// Signed one-decimal string, e.g. -3.2333 -> "-3.2", 5.7 -> "+5.7".
std::string format_signed(double value);
std::string format_fixed1(double value);

double mean(const std::vector<double>& values);

// Fixed-width text table; first row is the header.
std::string render_text_table(const std::vector<std::vector<std::string>>& rows);
// Tab-separated table; first row is the header.
std::string render_tsv(const std::vector<std::vector<std::string>>& rows);

}  // namespace groundsim
