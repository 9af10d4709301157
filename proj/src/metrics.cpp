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

#include "groundsim/metrics.hpp"

#include "groundsim/error.hpp"
#include "groundsim/jsonl.hpp"
#include "groundsim/report_math.hpp"
#include "groundsim/rng.hpp"
#include "groundsim/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <limits>
#include <regex>

namespace groundsim {

namespace {

bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }
bool is_ws(unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

bool interior_ok(std::string_view interior) {
  if (interior.empty()) return false;
  if (text::utf8_length(interior) > kMaxMarkerInterior) return false;
  if (is_ws(static_cast<unsigned char>(interior.front())) || is_ws(static_cast<unsigned char>(interior.back()))) {
    return false;
  }
  bool letter = false;
  for (char ch : interior) {
    auto c = static_cast<unsigned char>(ch);
    if (c == '*' || c == '\n') return false;
    if (std::isalpha(c) || c >= 0x80) letter = true;
  }
  return letter;
}

}  // namespace

std::vector<MarkerSpan> detect_roleplay_markers(std::string_view message) {
  std::vector<MarkerSpan> spans;
  std::size_t open = message.find('*');
  while (open != std::string_view::npos) {
    const std::size_t close = message.find('*', open + 1);
    if (close == std::string_view::npos) break;
    const auto interior = message.substr(open + 1, close - open - 1);
    const bool left_ok = open == 0 || !is_alnum(static_cast<unsigned char>(message[open - 1]));
    const bool right_ok = close + 1 >= message.size() || !is_alnum(static_cast<unsigned char>(message[close + 1]));
    if (left_ok && right_ok && interior_ok(interior)) {
      spans.push_back({open, close + 1, std::string(message.substr(open, close - open + 1))});
    }
    // The closing asterisk may open the next span.
    open = close;
  }
  return spans;
}

MetricLexicons MetricLexicons::load(const std::string& path) {
  MetricLexicons lex;
  lex.frustration.clear();
  for (const auto& line : text::split_lines(read_text_file(path))) {
    auto w = text::trim(line);
    if (!w.empty() && w[0] != '#') lex.frustration.push_back(text::to_lower(w));
  }
  return lex;
}

MessageFlags message_flags(std::string_view message, const MetricLexicons& lexicons) {
  static const std::regex list_item(R"(^\s*(?:[-*+]|\xE2\x80\xA2|\d+[.)])\s+\S)");
  MessageFlags f;
  const auto spans = detect_roleplay_markers(message);
  f.roleplay = !spans.empty();
  f.stage_direction = !spans.empty() && spans.front().begin == 0;
  f.frustration = std::any_of(lexicons.frustration.begin(), lexicons.frustration.end(),
                              [&](const std::string& w) { return text::has_word(message, w); });
  f.please = text::contains_ci(message, "please");
  int list_lines = 0;
  int nonempty = 0;
  for (const auto& line : text::split_lines(message)) {
    if (!text::is_blank(line)) ++nonempty;
    if (std::regex_search(line, list_item)) ++list_lines;
  }
  f.list = list_lines >= 2;
  f.multiline = nonempty >= 3;
  return f;
}

MetricBundle compute_metrics(const std::vector<std::vector<std::string>>& conversations, const MetricLexicons& lexicons) {
  MetricBundle b;
  b.conversation_count = conversations.size();
  std::size_t roleplay = 0, stage = 0, frustration = 0, please = 0, lists = 0, multiline = 0, chars = 0;
  for (const auto& conv : conversations) {
    for (const auto& msg : conv) {
      ++b.message_count;
      chars += text::utf8_length(msg);
      const auto f = message_flags(msg, lexicons);
      roleplay += f.roleplay;
      stage += f.stage_direction;
      frustration += f.frustration;
      please += f.please;
      lists += f.list;
      multiline += f.multiline;
    }
  }
  b.empty = b.message_count == 0;
  if (b.empty) return b;
  const double n = static_cast<double>(b.message_count);
  b.roleplay_marker_rate = static_cast<double>(roleplay) / n;
  b.stage_direction_rate = static_cast<double>(stage) / n;
  b.frustration_rate = static_cast<double>(frustration) / n;
  b.please_rate = static_cast<double>(please) / n;
  b.list_rate = static_cast<double>(lists) / n;
  b.multiline_rate = static_cast<double>(multiline) / n;
  b.avg_message_chars = static_cast<double>(chars) / n;
  b.avg_messages_per_conversation = n / static_cast<double>(b.conversation_count);
  return b;
}

std::string render_metrics_tsv(const std::vector<std::pair<std::string, MetricBundle>>& labelled) {
  std::vector<std::vector<std::string>> rows{{"label", "messages", "conversations", "avg_msg_chars", "avg_msgs_per_conv",
                                              "please", "lists", "multiline", "roleplay_markers", "stage_directions",
                                              "frustration"}};
  for (const auto& [label, m] : labelled) {
    rows.push_back({label, std::to_string(m.message_count), std::to_string(m.conversation_count),
                    format_fixed1(m.avg_message_chars), format_fixed1(m.avg_messages_per_conversation),
                    format_percent(m.please_rate), format_percent(m.list_rate), format_percent(m.multiline_rate),
                    format_percent(m.roleplay_marker_rate), format_percent(m.stage_direction_rate),
                    format_percent(m.frustration_rate)});
  }
  return render_tsv(rows);
}

// --- trait vocabulary -----------------------------------------------------

namespace {

struct RuleSpec {
  const char* name;
  StyleDimension dim;
  std::vector<std::string> keywords;
  bool negatable;  // rule is suppressed by negation words in the command
};

const std::vector<std::string>& negations() {
  static const std::vector<std::string> words{"never", "no ", "not ", "avoid", "without", "omit", "skip", "don't", "rarely"};
  return words;
}

}  // namespace

void TraitVocabulary::validate() const {
  if (traits.empty() || version.empty()) throw VocabularyMismatch("trait vocabulary is empty or unversioned");
  std::set<std::string> names;
  for (const auto& t : traits) {
    if (!names.insert(t.name).second) throw VocabularyMismatch("duplicate trait " + t.name);
  }
}

const TraitVocabulary& TraitVocabulary::default_vocabulary() {
  static const TraitVocabulary vocab = [] {
    using D = StyleDimension;
    const std::vector<RuleSpec> specs{
        {"all_lowercase", D::capitalization, {"lowercase", "lower case", "lower-case"}, false},
        {"all_caps", D::capitalization, {"all caps", "all-caps", "all capital", "uppercase"}, true},
        {"standard_capitalization", D::capitalization, {"capitalize normally", "standard capitalization", "proper capitalization", "capitalize the first"}, false},
        {"mixed_casing", D::capitalization, {"mixed casing", "mixed case", "inconsistent capitalization"}, false},
        {"lowercase_pronoun_i", D::capitalization, {"lowercase \"i\"", "lowercase 'i'", "pronoun i", "lowercase i "}, false},
        {"caps_for_emphasis", D::capitalization, {"caps for emphasis", "capital letters for emphasis", "capitalize for emphasis"}, false},
        {"no_terminal_punctuation", D::punctuation, {"terminal punctuation", "omit punctuation", "without punctuation", "avoid punctuation", "minimal punctuation"}, false},
        {"ellipses", D::punctuation, {"ellipses", "ellipsis", "..."}, true},
        {"exclamation_marks", D::punctuation, {"exclamation"}, true},
        {"repeated_question_marks", D::punctuation, {"multiple question marks", "??", "repeated question"}, false},
        {"standard_punctuation", D::punctuation, {"standard punctuation", "proper punctuation", "correct punctuation"}, true},
        {"dropped_apostrophes", D::punctuation, {"apostrophe"}, false},
        {"terse_messages", D::message_length, {"short", "terse", "brief", "concise", "1-2 sentences"}, false},
        {"long_messages", D::message_length, {"long", "lengthy", "detailed", "verbose", "multi-paragraph"}, true},
        {"single_line", D::message_length, {"single line", "one line", "one-line"}, false},
        {"sentence_fragments", D::message_length, {"fragment", "incomplete sentence"}, false},
        {"pasted_content", D::message_length, {"paste", "pasted"}, false},
        {"structured_formatting", D::message_length, {"bullet", "numbered", "list", "formatting"}, true},
        {"casual_tone", D::formality, {"casual", "informal", "relaxed"}, false},
        {"internet_speak", D::formality, {"internet-speak", "internet speak", "slang", "abbreviation", "pls", "\"u\""}, false},
        {"formal_tone", D::formality, {"formal", "professional", "polite"}, true},
        {"typos", D::formality, {"typo", "misspell", "spelling error", "grammatical error", "grammar mistake", "poor grammar"}, false},
        {"filler_words", D::formality, {"filler", "hmm", "ahh", "um,"}, false},
        {"imperative_requests", D::formality, {"imperative", "command form", "direct request", "directly"}, false},
        {"jargon", D::technical_register, {"jargon", "technical term", "terminology"}, true},
        {"code_heavy", D::technical_register, {"code", "snippet", "programming"}, false},
        {"plain_language", D::technical_register, {"plain language", "simple language", "simple words", "everyday language", "layman", "easy words"}, false},
        {"domain_specific", D::technical_register, {"domain-specific", "domain specific", "specialized"}, false},
        {"academic_register", D::technical_register, {"academic", "scholarly", "essay"}, false},
        {"multiple_choice", D::technical_register, {"multiple-choice", "multiple choice", "options"}, false},
        {"no_greetings", D::greeting, {"no greeting", "never use greeting", "without greeting", "skip greeting", "avoid greeting", "omit greeting", "never greet", "no sign-off"}, false},
        {"greets", D::greeting, {"greet", "hello", "start with hi"}, true},
        {"thanks", D::greeting, {"thank", "gratitude", "appreciation"}, true},
        {"sign_off", D::greeting, {"sign-off", "sign off", "closing"}, true},
        {"addresses_assistant", D::greeting, {"address the assistant", "chatgpt", "you guys"}, false},
        {"apologizes", D::greeting, {"apolog", "sorry"}, true},
        {"no_emoji", D::emoticon, {"no emoji", "avoid emoji", "never use emoji", "without emoji", "no emoticon", "avoid emoticon"}, false},
        {"emoji", D::emoticon, {"emoji"}, true},
        {"kaomoji", D::emoticon, {"kaomoji"}, true},
        {"text_emoticons", D::emoticon, {"emoticon", ":)", ":("}, true},
        {"laughter", D::emoticon, {"lol", "haha", "lmao"}, true},
        {"letter_elongation", D::emoticon, {"repeated letter", "elongat", "stretch"}, false},
        {"front_loader", D::intent_density, {"front-load", "front load", "all at once", "multiple requests", "several requests", "bundle"}, false},
        {"drip_feeder", D::intent_density, {"drip", "one request at a time", "one question at a time", "incremental", "step by step", "gradually"}, false},
        {"follow_ups", D::intent_density, {"follow-up", "follow up"}, false},
        {"single_intent", D::intent_density, {"single request", "one request per", "one task per"}, false},
        {"clarifications", D::intent_density, {"clarif", "rephras", "correct the assistant"}, false},
        {"repeats_requests", D::intent_density, {"repeat the request", "repeats", "reiterat"}, false},
    };
    TraitVocabulary v;
    v.version = "traits-v1";
    for (const auto& s : specs) {
      TraitRule r{s.name, s.dim, s.keywords};
      if (s.negatable) r.keywords.insert(r.keywords.begin(), "!negatable");
      v.traits.push_back(std::move(r));
    }
    return v;
  }();
  return vocab;
}

TraitVector trait_vector(const UserProfile& profile, const TraitVocabulary& vocabulary) {
  vocabulary.validate();
  if (profile.manual.commands.empty()) throw InvalidRequest("profile " + profile.user_id + " has no commands");
  TraitVector v{profile.user_id, std::vector<std::uint8_t>(vocabulary.traits.size(), 0), vocabulary.version};
  for (const auto& cmd : profile.manual.commands) {
    const std::string lc = text::to_lower(cmd.command) + " ";
    const bool negated = std::any_of(negations().begin(), negations().end(),
                                     [&](const std::string& n) { return lc.find(n) != std::string::npos; });
    for (std::size_t i = 0; i < vocabulary.traits.size(); ++i) {
      const auto& rule = vocabulary.traits[i];
      bool negatable = false;
      bool hit = false;
      for (const auto& kw : rule.keywords) {
        if (kw == "!negatable") {
          negatable = true;
          continue;
        }
        if (lc.find(text::to_lower(kw)) != std::string::npos) hit = true;
      }
      if (hit && !(negatable && negated)) v.bits[i] = 1;
    }
  }
  return v;
}

std::string export_trait_matrix(const std::vector<TraitVector>& vectors, const TraitVocabulary& vocabulary) {
  std::string out = "user_id";
  for (const auto& t : vocabulary.traits) out += " " + t.name;
  out += "\n";
  for (const auto& v : vectors) {
    if (v.vocabulary_version != vocabulary.version || v.bits.size() != vocabulary.traits.size()) {
      throw VocabularyMismatch("vector for " + v.user_id + " was built with another vocabulary");
    }
    out += v.user_id;
    for (auto b : v.bits) out += b ? " 1" : " 0";
    out += "\n";
  }
  return out;
}

// --- k-means --------------------------------------------------------------

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    d += x * x;
  }
  return d;
}

ClusterModel kmeans_points(const std::vector<std::vector<double>>& points, const std::vector<std::string>& ids, int k,
                           std::uint64_t seed, int max_iterations) {
  const std::size_t n = points.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) throw InvalidRequest("k must be in [1, number of vectors]");
  if (ids.size() != n) throw InvalidRequest("ids and points differ in length");
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw VocabularyMismatch("vectors differ in length");
  }

  ClusterModel m;
  m.seed = seed;
  const bool all_same = std::all_of(points.begin(), points.end(), [&](const auto& p) { return p == points.front(); });
  if (all_same && k > 1) {
    m.warning = "all vectors identical; fitted a single cluster instead of k=" + std::to_string(k);
    k = 1;
  }
  m.k = k;

  SeededRng rng(seed);
  std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.below(n))};
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < static_cast<std::size_t>(k)) {
    const auto& last = points[chosen.back()];
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], last));
      if (nearest[i] > best_d) {
        best_d = nearest[i];
        best = i;
      }
    }
    chosen.push_back(best);
  }
  for (auto idx : chosen) m.centroids.push_back(points[idx]);

  std::vector<int> labels(n, -1);
  auto assign = [&] {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points[i], m.centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points[i], m.centroids[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[i] != best) changed = true;
      labels[i] = best;
      inertia += best_d;
    }
    m.inertia_history.push_back(inertia);
    return changed;
  };

  assign();
  for (m.iterations = 1; m.iterations < max_iterations; ++m.iterations) {
    const std::size_t dim = points.front().size();
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t d = 0; d < dim; ++d) m.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
    if (!assign()) break;
  }

  m.labels = labels;
  m.inertia = m.inertia_history.back();
  for (std::size_t i = 0; i < n; ++i) m.assignments[ids[i]] = labels[i];
  return m;
}

ClusterModel kmeans(const std::vector<TraitVector>& vectors, int k, std::uint64_t seed, int max_iterations) {
  std::vector<std::vector<double>> points;
  std::vector<std::string> ids;
  for (const auto& v : vectors) {
    if (v.vocabulary_version != vectors.front().vocabulary_version) {
      throw VocabularyMismatch("trait vectors come from different vocabularies");
    }
    points.emplace_back(v.bits.begin(), v.bits.end());
    ids.push_back(v.user_id);
  }
  return kmeans_points(points, ids, k, seed, max_iterations);
}

CompositionTable cluster_demographics(const ClusterModel& model, const std::vector<UserProfile>& profiles) {
  CompositionTable table;
  std::map<std::string, const UserProfile*> by_id;
  for (const auto& p : profiles) by_id[p.user_id] = &p;
  std::vector<std::vector<const UserProfile*>> members(static_cast<std::size_t>(model.k));
  for (const auto& [uid, c] : model.assignments) {
    auto it = by_id.find(uid);
    if (it == by_id.end()) {
      table.warnings.push_back("no profile for assigned user " + uid);
      continue;
    }
    members[static_cast<std::size_t>(c)].push_back(it->second);
  }
  for (int c = 0; c < model.k; ++c) {
    const auto& ms = members[static_cast<std::size_t>(c)];
    if (ms.empty()) {
      table.warnings.push_back("cluster " + std::to_string(c) + " is empty");
      continue;
    }
    CompositionRow row;
    row.cluster = c;
    row.members = ms.size();
    const double share = 1.0 / static_cast<double>(ms.size());
    for (const auto* p : ms) {
      const auto* age = p->demographics.get(DemographicField::age);
      const auto* edu = p->demographics.get(DemographicField::education);
      row.age_share[age ? age->value : "unknown"] += share;
      row.education_share[edu ? edu->value : "unknown"] += share;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string CompositionTable::render_tsv() const {
  std::vector<std::vector<std::string>> rows{{"cluster", "members", "attribute", "category", "share_pct"}};
  for (const auto& r : this->rows) {
    for (const auto& [cat, s] : r.age_share) {
      rows.push_back({std::to_string(r.cluster), std::to_string(r.members), "age", cat, format_percent(s)});
    }
    for (const auto& [cat, s] : r.education_share) {
      rows.push_back({std::to_string(r.cluster), std::to_string(r.members), "education", cat, format_percent(s)});
    }
  }
  return groundsim::render_tsv(rows);
}

}  // namespace groundsim
