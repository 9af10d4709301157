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

#include "groundsim/lang_id.hpp"

#include <cctype>
#include <cmath>

namespace groundsim {

namespace {

constexpr double kSharpness = 25.0;

constexpr std::string_view kEnglish =
    "the quick brown fox jumps over the lazy dog. i want to know how this works and what i should "
    "do next. can you help me write a short story about a small town where people live together? "
    "please explain the difference between these two options and tell me which one is better for "
    "my project. we have been thinking about this for a long time and there is no easy answer. it "
    "would be great if you could check my code because something is wrong with the function that "
    "returns the value. they said that the meeting will be held on thursday at the office, and "
    "everyone should bring their notes. what is the best way to learn a new language quickly? "
    "thank you for your answer, that was really helpful. could you make it shorter and more clear?";
constexpr std::string_view kSpanish =
    "el rápido zorro marrón salta sobre el perro perezoso. quiero saber cómo funciona esto y qué "
    "debo hacer después. ¿puedes ayudarme a escribir una historia corta sobre un pueblo pequeño "
    "donde la gente vive junta? por favor explica la diferencia entre estas dos opciones y dime "
    "cuál es mejor para mi proyecto. hemos estado pensando en esto durante mucho tiempo y no hay "
    "una respuesta fácil. sería genial si pudieras revisar mi código porque algo está mal con la "
    "función que devuelve el valor. gracias por tu respuesta, fue muy útil.";
constexpr std::string_view kFrench =
    "le renard brun rapide saute par-dessus le chien paresseux. je veux savoir comment cela "
    "fonctionne et ce que je dois faire ensuite. peux-tu m'aider à écrire une courte histoire sur "
    "une petite ville où les gens vivent ensemble? s'il te plaît explique la différence entre ces "
    "deux options et dis-moi laquelle est la meilleure pour mon projet. nous y pensons depuis "
    "longtemps et il n'y a pas de réponse facile. merci pour ta réponse, c'était très utile.";
constexpr std::string_view kGerman =
    "der schnelle braune fuchs springt über den faulen hund. ich möchte wissen, wie das "
    "funktioniert und was ich als nächstes tun soll. kannst du mir helfen, eine kurze geschichte "
    "über eine kleine stadt zu schreiben, in der die menschen zusammen leben? bitte erkläre den "
    "unterschied zwischen diesen beiden optionen und sag mir, welche für mein projekt besser ist. "
    "wir denken schon lange darüber nach und es gibt keine einfache antwort. danke für deine "
    "antwort, das war wirklich hilfreich.";
constexpr std::string_view kItalian =
    "la veloce volpe marrone salta sopra il cane pigro. voglio sapere come funziona e cosa devo "
    "fare dopo. puoi aiutarmi a scrivere una breve storia su una piccola città dove le persone "
    "vivono insieme? per favore spiega la differenza tra queste due opzioni e dimmi quale è "
    "migliore per il mio progetto. ci pensiamo da molto tempo e non c'è una risposta facile. "
    "grazie per la tua risposta, è stata davvero utile.";
constexpr std::string_view kPortuguese =
    "a rápida raposa marrom salta sobre o cão preguiçoso. eu quero saber como isso funciona e o "
    "que devo fazer depois. você pode me ajudar a escrever uma história curta sobre uma pequena "
    "cidade onde as pessoas vivem juntas? por favor explique a diferença entre essas duas opções "
    "e me diga qual é melhor para o meu projeto. estamos pensando nisso há muito tempo e não há "
    "uma resposta fácil. obrigado pela sua resposta, foi muito útil.";

}  // namespace

TrigramLanguageScorer::TrigramLanguageScorer() {
  add_profile("en", kEnglish);
  add_profile("es", kSpanish);
  add_profile("fr", kFrench);
  add_profile("de", kGerman);
  add_profile("it", kItalian);
  add_profile("pt", kPortuguese);
}

TrigramLanguageScorer::Profile TrigramLanguageScorer::build(std::string_view text) {
  // Letters lower-cased, everything else folded to a single space; bytes
  // >= 0x80 are kept so accented letters contribute.
  std::string norm = " ";
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalpha(c) || c >= 0x80) {
      norm += static_cast<char>(std::tolower(c));
    } else if (norm.back() != ' ') {
      norm += ' ';
    }
  }
  if (norm.back() != ' ') norm += ' ';
  Profile p;
  for (std::size_t i = 0; i + 3 <= norm.size(); ++i) p[norm.substr(i, 3)] += 1.0;
  double sq = 0.0;
  for (const auto& [_, v] : p) sq += v * v;
  const double n = std::sqrt(sq);
  if (n > 0) {
    for (auto& [_, v] : p) v /= n;
  }
  return p;
}

void TrigramLanguageScorer::add_profile(const std::string& code, std::string_view sample) {
  profiles_[code] = build(sample);
}

std::vector<std::string> TrigramLanguageScorer::languages() const {
  std::vector<std::string> out;
  for (const auto& [code, _] : profiles_) out.push_back(code);
  return out;
}

LanguageTag TrigramLanguageScorer::score(std::string_view text) const {
  const auto doc = build(text);
  if (doc.empty() || profiles_.empty()) return {"und", 0.0};
  std::map<std::string, double> sims;
  double best = -1.0;
  std::string best_code;
  for (const auto& [code, prof] : profiles_) {
    double dot = 0.0;
    for (const auto& [tri, w] : doc) {
      if (auto it = prof.find(tri); it != prof.end()) dot += w * it->second;
    }
    sims[code] = dot;
    if (dot > best) {
      best = dot;
      best_code = code;
    }
  }
  double z = 0.0;
  for (const auto& [_, s] : sims) z += std::exp(kSharpness * (s - best));
  return {best_code, 1.0 / z};
}

LanguageTag TrigramLanguageScorer::operator()(const Conversation& conv) const {
  std::string all;
  for (const auto& t : conv.turns) {
    if (t.role == Speaker::user) all += t.content + "\n";
  }
  return score(all);
}

}  // namespace groundsim
