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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace groundsim::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);  // ASCII only
bool is_blank(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split_words(std::string_view s);  // on whitespace
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lower-cased alphanumeric word tokens; apostrophes stay inside words.
std::vector<std::string> word_tokens(std::string_view s);

// Number of Unicode code points in a UTF-8 string (invalid bytes count as one).
std::size_t utf8_length(std::string_view s);

// Unicode NFC normalization. Input that is not valid UTF-8 is returned as is.
std::string nfc(std::string_view s);

// Runs of whitespace become a single space; leading/trailing space removed.
std::string collapse_whitespace(std::string_view s);

// Canonical form used for verbatim quote checks: NFC, then whitespace collapse.
std::string match_form(std::string_view s);

bool contains_ci(std::string_view haystack, std::string_view needle);
bool starts_with(std::string_view s, std::string_view prefix);

// Case-insensitive whole-word hit against a single lexicon entry. Entries may
// span several words ("thank you").
bool has_word(std::string_view message, std::string_view word);

}  // namespace groundsim::text
