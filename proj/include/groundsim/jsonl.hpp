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

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <string>
#include <vector>

namespace groundsim {

using json = nlohmann::json;

struct JsonLines {
  std::vector<json> records;
  std::size_t skipped = 0;  // blank lines are neither records nor skips
};

// Reads one JSON value per line. Lines that fail to parse are counted in
// `skipped` rather than raising.
JsonLines read_json_lines(std::istream& in);
JsonLines read_json_lines(const std::filesystem::path& path);

void write_json_lines(std::ostream& out, const std::vector<json>& records);
void write_json_lines(const std::filesystem::path& path, const std::vector<json>& records);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace groundsim
