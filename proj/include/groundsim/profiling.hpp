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

#include <nlohmann/json.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace groundsim {

enum class StyleDimension {
  capitalization,
  punctuation,
  message_length,
  formality,
  technical_register,
  greeting,
  emoticon,
  intent_density,
};

inline constexpr std::array<StyleDimension, 8> kStyleDimensions{
    StyleDimension::capitalization, StyleDimension::punctuation,        StyleDimension::message_length,
    StyleDimension::formality,      StyleDimension::technical_register, StyleDimension::greeting,
    StyleDimension::emoticon,       StyleDimension::intent_density};

std::string to_string(StyleDimension d);
// Accepts the canonical names plus a few common spellings ("emoji",
// "greetings"). Throws ParseError.
StyleDimension style_dimension_from_string(const std::string& s);

struct StyleExample {
  std::string quote;
  std::string source_conversation_id;

  bool operator==(const StyleExample&) const = default;
};

struct StyleCommand {
  std::string command;
  std::vector<StyleExample> examples;
  StyleDimension dimension = StyleDimension::formality;

  bool operator==(const StyleCommand&) const = default;
};

inline constexpr std::size_t kMaxCommands = 15;

struct PersonaManual {
  std::string user_id;
  std::vector<StyleCommand> commands;

  bool operator==(const PersonaManual&) const = default;
};

enum class DemographicField { age, education, gender, occupation, marital_status, income, location };

inline constexpr std::array<DemographicField, 7> kDemographicFields{
    DemographicField::age,        DemographicField::education,      DemographicField::gender,
    DemographicField::occupation, DemographicField::marital_status, DemographicField::income,
    DemographicField::location};

std::string to_string(DemographicField f);
DemographicField demographic_field_from_string(const std::string& s);  // throws ParseError
std::string display_label(DemographicField f);                        // "Marital Status"

// Category whitelists for the enumerated fields. Free-text fields have none.
struct CategoryLists {
  std::vector<std::string> age{"under 18", "18-24", "25-34", "35-44", "45-54", "55-64", "65+"};
  std::vector<std::string> education{"no formal education", "primary education", "high school",
                                     "some college",        "associate degree",  "bachelor's degree",
                                     "master's degree",     "doctoral degree"};
  std::vector<std::string> income{"under $25k",  "$25k-$50k",   "$50k-$75k",
                                  "$75k-$100k", "$100k-$200k", "over $200k"};

  bool is_categorical(DemographicField f) const;
  // Canonical category for a reply value, or nullopt when not whitelisted.
  // Free-text fields are trimmed and returned as is.
  std::optional<std::string> canonicalize(DemographicField f, const std::string& value) const;

  static const CategoryLists& defaults();
};

struct FieldMention {
  DemographicField field;
  std::string value;
  std::string conversation_id;
  std::string evidence;

  bool operator==(const FieldMention&) const = default;
};

enum class ValueSource { extracted, inferred };

std::string to_string(ValueSource s);

struct FieldValue {
  std::string value;
  ValueSource source = ValueSource::extracted;
  int supporting_count = 0;

  bool operator==(const FieldValue&) const = default;
};

struct DemographicRecord {
  std::map<DemographicField, FieldValue> fields;
  double consistency = 1.0;
  double completeness = 0.0;

  const FieldValue* get(DemographicField f) const;
  void recompute_completeness();
  bool operator==(const DemographicRecord&) const = default;
};

struct UserProfile {
  std::string user_id;
  PersonaManual manual;
  DemographicRecord demographics;
  std::optional<std::string> background;
  std::vector<std::string> conversation_ids;

  // Throws InvalidRequest when an example references a conversation outside
  // conversation_ids or the manual is out of bounds.
  void validate() const;
  bool operator==(const UserProfile&) const = default;
};

nlohmann::json to_json(const UserProfile& p);
UserProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DemographicRecord& r);
DemographicRecord demographics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FieldMention& m);
FieldMention mention_from_json(const nlohmann::json& j);

struct ProfilingOptions {
  std::string model = "gpt-4o";
  double temperature = 0.0;
  CategoryLists categories = CategoryLists::defaults();
};

std::string style_prompt(const std::vector<Conversation>& user_convs);
PersonaManual extract_style_profile(const std::vector<Conversation>& user_convs, Gateway& gateway,
                                    const ProfilingOptions& options = {});

// Verifies and tags the parsed commands against the user's turns. Exposed
// for tests; extract_style_profile calls it.
PersonaManual verify_manual(const std::string& user_id, std::vector<StyleCommand> parsed,
                            const std::vector<Conversation>& user_convs);

std::vector<FieldMention> extract_demographic_mentions(const Conversation& conv, Gateway& gateway,
                                                       const ProfilingOptions& options = {});
std::string demographic_extraction_prompt(const Conversation& conv);

DemographicRecord aggregate_demographics(const std::vector<FieldMention>& mentions);

std::string demographic_inference_prompt(const std::vector<Conversation>& user_convs,
                                         const std::vector<DemographicField>& fields,
                                         const CategoryLists& categories);
DemographicRecord infer_demographics(const std::vector<Conversation>& user_convs,
                                     const DemographicRecord& existing, Gateway& gateway,
                                     const ProfilingOptions& options = {});

UserProfile consolidate_profile(const PersonaManual& manual, const DemographicRecord& extracted,
                                const DemographicRecord& inferred, std::optional<std::string> background,
                                std::vector<std::string> conversation_ids);

struct AccuracyRow {
  std::string field;
  int test_cases = 0;
  int inferred = 0;
  int correct = 0;
  std::optional<double> accuracy;  // correct / inferred; nullopt when inferred == 0
};

struct AccuracyTable {
  std::vector<AccuracyRow> rows;  // one per field, in kDemographicFields order
  AccuracyRow overall;

  std::string render_text() const;
  std::string render_tsv() const;
};

struct ProfilePair {
  DemographicRecord inferred;  // produced with the golden fields hidden
  DemographicRecord golden;
};

// Strict categorical (case-insensitive) comparison of inferred values against
// extracted golden values.
AccuracyTable validate_inference(const std::vector<ProfilePair>& pairs);
AccuracyRow make_accuracy_row(std::string field, int test_cases, int inferred, int correct);

}  // namespace groundsim
