// Copyright 2026 The maskeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Immutable word tables backing the bundled rule tagger and the offline
// meta-information generator.

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace maskeval {

enum class Pos;

namespace lexicon {

/// Articles, prepositions, conjunctions, auxiliaries, pronouns and other
/// closed-class words. Lowercase lookup.
bool is_function_word(std::string_view lower);
/// Spelled-out cardinals and ordinals ("four", "fifth").
bool is_number_word(std::string_view lower);
/// Part of speech for a known open-class base form.
std::optional<Pos> open_class_pos(std::string_view lower);
/// Lemma for irregular inflections ("children" -> "child"), if listed.
std::optional<std::string> irregular_lemma(std::string_view lower);

struct Hypernym {
  std::string_view category;
  std::string_view meaning;
};

/// Category and abstract meaning for a lemma, if the bundled table has one.
std::optional<Hypernym> hypernym(std::string_view lemma);

}  // namespace lexicon
}  // namespace maskeval
