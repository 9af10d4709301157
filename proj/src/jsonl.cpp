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

#include "groundsim/jsonl.hpp"

#include "groundsim/error.hpp"
#include "groundsim/text.hpp"

#include <fstream>
#include <sstream>

namespace groundsim {

JsonLines read_json_lines(std::istream& in) {
  JsonLines out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::is_blank(line)) continue;
    auto value = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) {
      ++out.skipped;
      continue;
    }
    out.records.push_back(std::move(value));
  }
  return out;
}

JsonLines read_json_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_json_lines(in);
}

void write_json_lines(std::ostream& out, const std::vector<json>& records) {
  for (const auto& r : records) out << r.dump() << '\n';
}

void write_json_lines(const std::filesystem::path& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_json_lines(out, records);
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << contents;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace groundsim
