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

#include "maskeval/lexicon.hpp"

#include <initializer_list>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "maskeval/annotation.hpp"

namespace maskeval::lexicon {
namespace {

using WordSet = std::unordered_set<std::string_view>;

const WordSet& function_words() {
  static const WordSet kWords = {
      // articles and determiners
      "a", "an", "the", "this", "that", "these", "those", "each", "every",
      "either", "neither", "some", "any", "no", "all", "both", "few", "many",
      "much", "more", "most", "less", "least", "several", "such", "own",
      "other", "another", "same", "enough",
      // politeness marker, never content
      "please",
      // pronouns
      "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself",
      "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
      "herself", "it", "its", "itself", "we", "us", "our", "ours",
      "ourselves", "they", "them", "their", "theirs", "themselves", "one's",
      "who", "whom", "whose", "which", "what", "whatever", "whoever",
      "whichever", "someone", "something", "anyone", "anything", "everyone",
      "everything", "nobody", "nothing", "none", "somebody", "anybody",
      "everybody",
      // prepositions
      "of", "in", "on", "at", "by", "for", "with", "about", "against",
      "between", "into", "through", "during", "before", "after", "above",
      "below", "to", "from", "up", "down", "out", "off", "over", "under",
      "among", "amongst", "around", "across", "along", "behind", "beside",
      "besides", "beyond", "despite", "except", "inside", "outside", "per",
      "since", "toward", "towards", "upon", "via", "within", "without",
      "throughout", "onto", "than", "like", "unlike", "versus",
      // conjunctions
      "and", "or", "but", "nor", "so", "yet", "if", "because", "although",
      "though", "while", "whereas", "unless", "until", "whether", "as",
      "once", "when", "whenever", "where", "wherever", "why", "how",
      "then", "thus", "therefore", "hence", "also",
      // auxiliaries and modals
      "be", "am", "is", "are", "was", "were", "been", "being", "have",
      "has", "had", "having", "do", "does", "did", "doing", "will", "would",
      "shall", "should", "can", "could", "may", "might", "must", "ought",
      // particles and the like
      "not", "never", "there", "here", "very", "just", "only", "too",
      "i.e", "e.g", "etc", "'s", "\xE2\x80\x99s", "n't", "let"};
  return kWords;
}

const WordSet& number_words() {
  static const WordSet kWords = {
      "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
      "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
      "sixteen", "seventeen", "eighteen", "nineteen", "twenty", "thirty",
      "forty", "fifty", "sixty", "seventy", "eighty", "ninety", "hundred",
      "thousand", "million", "billion", "first", "second", "third", "fourth",
      "fifth", "sixth", "seventh", "eighth", "ninth", "tenth", "half",
      "twice", "dozen"};
  return kWords;
}

void add_all(std::unordered_map<std::string_view, Pos>& map, Pos pos,
             std::initializer_list<std::string_view> words) {
  for (auto w : words) map.emplace(w, pos);
}

const std::unordered_map<std::string_view, Pos>& open_class() {
  static const auto kTable = [] {
    std::unordered_map<std::string_view, Pos> t;
    add_all(t, Pos::kNoun,
            {"cat", "dog", "weight", "pound", "average", "value", "mean",
             "equation", "question", "total", "sales", "sale", "plan",
             "recall", "model", "production", "volume", "unit", "inventory",
             "revenue", "year", "condition", "simulation", "cost", "repair",
             "transportation", "expense", "reduction", "rate", "number",
             "price", "amount", "loss", "decrease", "document", "scooter",
             "course", "event", "people", "band", "power", "earth", "station",
             "purpose", "declaration", "independence", "text", "government",
             "president", "separation", "war", "country", "duo", "battle",
             "order", "partner", "part", "lawsuit", "case", "history",
             "music", "pop", "answer", "option", "item", "company", "city",
             "market", "student", "school", "teacher", "book", "house",
             "water", "food", "child", "right", "law", "freedom", "nation",
             "state", "member", "family", "work", "time", "day", "world",
             "life", "hand", "eye", "place", "word", "fact", "group",
             "problem", "money", "business", "service", "product", "system",
             "program", "story", "idea", "result", "report", "area", "team",
             "player", "game", "car", "road", "river", "tree", "animal",
             "bird", "fish", "horse", "mountain", "ocean", "sun", "moon",
             "star", "song", "art", "science", "data", "information",
             "health", "doctor", "hospital", "vote", "election", "treaty",
             "charter", "constitution", "education", "culture", "peace",
             "security", "article", "assembly", "dignity", "equality",
             "liberty", "justice", "happiness", "truth", "creator",
             "consent", "reason", "conscience", "spirit", "birth", "nature",
             "god", "fiscal", "blank", "volume", "mat", "park", "ball",
             "village", "farmer", "field", "season", "harvest", "rain",
             "winter", "summer", "road", "bridge", "engineer", "machine",
             "letter", "message", "friend", "king", "queen", "army",
             "soldier", "ship", "island", "coast", "storm", "forest",
             "garden", "flower", "scientist", "experiment", "theory",
             "energy", "planet", "court", "judge", "contract", "debt",
             "order", "variable", "choice", "process", "step", "trial"});
    add_all(t, Pos::kVerb,
            {"become", "dissolve", "connect", "assume", "establish", "elect",
             "explain", "declare", "accord", "embroil", "obtain", "restrain",
             "impel", "entitle", "require",
             "sue", "seal", "involve", "determine", "sleep", "run", "walk",
             "eat", "go", "make", "take", "give", "find", "think", "tell",
             "say", "ask", "call", "try", "need", "feel", "leave", "put",
             "keep", "begin", "seem", "help", "show", "hear", "play", "move",
             "live", "believe", "bring", "happen", "write", "sit", "stand",
             "lose", "pay", "meet", "include", "continue", "set", "learn",
             "change", "lead", "understand", "watch", "follow", "stop",
             "create", "speak", "read", "allow", "add", "spend", "grow",
             "open", "win", "offer", "remember", "love", "consider",
             "appear", "buy", "wait", "serve", "die", "send", "expect",
             "build", "stay", "fall", "cut", "reach", "kill", "remain",
             "suggest", "raise", "pass", "sell", "require", "decide", "pull",
             "simulate", "fill", "calculate", "subtract", "divide",
             "estimate", "produce", "revise", "choose", "respond", "use",
             "support", "protect", "promote", "recognize", "endow", "secure",
             "derive", "govern", "alter", "abolish", "institute", "organize",
             "dictate", "sign", "adopt", "travel", "visit", "discover",
             "invent", "carry", "collect", "cross", "share", "compare",
             "describe", "measure", "multiply", "complete", "provide",
             "receive", "join", "plant", "climb", "sing", "dance", "jump",
             "swim", "fly", "drive", "ride", "paint", "draw", "cook"});
    add_all(t, Pos::kAdj,
            {"human", "necessary", "political", "separate", "equal", "main",
             "new", "legal", "musical", "successful", "commercial",
             "domestic", "annual", "simple", "middle", "good", "great",
             "small", "large", "big", "old", "young", "high", "low", "long",
             "short", "important", "public", "free", "true", "false", "real",
             "early", "late", "hard", "easy", "possible", "full", "special",
             "clear", "certain", "whole", "national", "international",
             "social", "economic", "universal", "fundamental", "inherent",
             "unalienable", "inalienable", "happy", "red", "blue", "green",
             "black", "white", "strong", "weak", "quick", "lazy", "brown",
             "current", "planned", "arithmetic", "mathematical", "remaining",
             "quiet", "bright", "dark", "cold", "warm", "hot", "wide", "deep",
             "rich", "poor", "ancient", "modern", "famous", "brave", "wise"});
    add_all(t, Pos::kAdv,
            {"reportedly", "commercially", "respectively", "often", "always",
             "quickly", "slowly", "already", "still", "again", "soon",
             "usually", "sometimes", "together", "directly", "finally",
             "recently", "carefully", "simply", "approximately"});
    return t;
  }();
  return kTable;
}

const std::unordered_map<std::string_view, std::string_view>& irregulars() {
  static const std::unordered_map<std::string_view, std::string_view> kTable =
      {{"children", "child"}, {"men", "man"},       {"women", "woman"},
       {"feet", "foot"},      {"teeth", "tooth"},   {"mice", "mouse"},
       {"went", "go"},        {"gone", "go"},       {"made", "make"},
       {"took", "take"},      {"taken", "take"},    {"gave", "give"},
       {"given", "give"},     {"found", "find"},    {"thought", "think"},
       {"told", "tell"},      {"said", "say"},      {"left", "leave"},
       {"kept", "keep"},      {"began", "begin"},   {"begun", "begin"},
       {"brought", "bring"},  {"wrote", "write"},   {"written", "write"},
       {"sat", "sit"},        {"stood", "stand"},   {"lost", "lose"},
       {"paid", "pay"},       {"met", "meet"},      {"led", "lead"},
       {"understood", "understand"},                {"spoke", "speak"},
       {"spoken", "speak"},   {"grew", "grow"},     {"grown", "grow"},
       {"won", "win"},        {"bought", "buy"},    {"sent", "send"},
       {"built", "build"},    {"fell", "fall"},     {"fallen", "fall"},
       {"sold", "sell"},      {"chose", "choose"},  {"chosen", "choose"},
       {"became", "become"},  {"ran", "run"},       {"ate", "eat"},
       {"eaten", "eat"},      {"slept", "sleep"},   {"drove", "drive"},
       {"driven", "drive"},   {"flew", "fly"},      {"flown", "fly"},
       {"sang", "sing"},      {"sung", "sing"},     {"swam", "swim"},
       {"drew", "draw"},      {"drawn", "draw"},    {"rode", "ride"},
       {"ridden", "ride"},    {"people", "people"}, {"sales", "sales"},
       {"news", "news"},      {"data", "data"},     {"series", "series"}};
  return kTable;
}

const std::unordered_map<std::string_view, Hypernym>& hypernyms() {
  static const std::unordered_map<std::string_view, Hypernym> kTable = {
      {"dog", {"Animal", "domestic animal"}},
      {"cat", {"Animal", "domestic animal"}},
      {"horse", {"Animal", "domestic animal"}},
      {"bird", {"Animal", "flying animal"}},
      {"fish", {"Animal", "aquatic animal"}},
      {"weight", {"Measurement", "heaviness"}},
      {"pound", {"Unit", "unit of mass"}},
      {"average", {"Mathematics", "mean value"}},
      {"equation", {"Mathematics", "mathematical statement"}},
      {"total", {"Mathematics", "sum"}},
      {"value", {"Mathematics", "quantity"}},
      {"scooter", {"Product", "vehicle"}},
      {"model", {"Product", "product line"}},
      {"production", {"Planning", "manufacturing"}},
      {"volume", {"Quantity", "amount"}},
      {"inventory", {"Business", "stock"}},
      {"revenue", {"Finance", "income"}},
      {"recall", {"Business", "product withdrawal"}},
      {"cost", {"Finance", "expense"}},
      {"price", {"Finance", "monetary value"}},
      {"sales", {"Business", "selling"}},
      {"plan", {"Planning", "intention"}},
      {"government", {"Organization", "ruling body"}},
      {"president", {"Person", "leader"}},
      {"war", {"Event", "armed conflict"}},
      {"country", {"Place", "nation"}},
      {"duo", {"Group", "pair of people"}},
      {"battle", {"Event", "conflict"}},
      {"lawsuit", {"Law", "legal action"}},
      {"music", {"Art", "sound art"}},
      {"partner", {"Person", "associate"}},
      {"declaration", {"Document", "formal statement"}},
      {"independence", {"Politics", "self-rule"}},
      {"people", {"Group", "population"}},
      {"earth", {"Place", "planet"}},
      {"event", {"Event", "occurrence"}},
      {"course", {"Process", "progression"}},
      {"purpose", {"Concept", "aim"}},
      {"text", {"Document", "written words"}},
      {"separation", {"Event", "division"}},
      {"entitle", {"", "give a right"}},
      {"decent", {"", "proper"}},
      {"respect", {"Attitude", "regard"}},
      {"opinion", {"Thought", "view"}},
      {"mankind", {"Group", "humanity"}},
      {"require", {"", "need"}},
      {"cause", {"Reason", "motive"}},
      {"band", {"Group", "tie, association"}},
      {"unit", {"Measure", "single item"}},
      {"yen", {"Currency", "money"}},
      {"rate", {"Measure", "proportion"}},
      {"fiscal", {"", "financial"}},
      {"year", {"Time", "twelve months"}},
      {"number", {"Quantity", "count"}},
      {"amount", {"Quantity", "total"}},
      {"simulation", {"Method", "model run"}},
      {"condition", {"Rule", "premise"}},
      {"blank", {"Form", "empty space"}},
      {"sale", {"Business", "selling"}},
      {"loss", {"Finance", "deficit"}},
      {"decrease", {"Change", "drop"}},
      {"subject", {"", "liable"}},
      {"sell", {"", "trade away"}},
      {"calculate", {"", "compute"}},
      {"divide", {"", "split"}},
      {"subtract", {"", "take away"}},
      {"project", {"", "forecast"}},
      {"revise", {"", "amend"}},
      {"estimate", {"", "judge roughly"}},
      {"remain", {"", "stay"}},
      {"consider", {"", "take into account"}},
      {"expense", {"Finance", "outlay"}},
      {"part", {"Component", "piece"}},
      {"repair", {"Service", "fix"}},
      {"transportation", {"Service", "moving goods"}},
      {"april", {"Time", "month"}},
      {"impel", {"", "drive"}},
      {"law", {"Rule", "legal rule"}},
      {"laws", {"Rule", "legal rules"}},
      {"nature", {"Concept", "natural world"}},
      {"god", {"Individual Name", "higher power"}},
      {"power", {"Concept", "authority"}},
      {"station", {"Status", "position"}},
      {"establish", {"", "found"}},
      {"elect", {"", "choose by vote"}},
      {"explain", {"", "clarify"}},
      {"declare", {"", "announce"}},
      {"obtain", {"", "acquire"}},
      {"sue", {"", "take legal action"}},
      {"dissolve", {"", "break up"}},
      {"assume", {"", "take on"}},
      {"connect", {"", "link"}},
      {"determine", {"", "establish"}},
      {"become", {"", "change state"}},
      {"sleep", {"", "rest"}},
      {"accord", {"", "agreement"}},
      {"human", {"", "of people"}},
      {"necessary", {"", "required"}},
      {"political", {"", "governmental"}},
      {"legal", {"", "lawful"}},
      {"new", {"", "recent"}},
      {"main", {"", "primary"}},
      {"equal", {"", "same"}},
      {"separate", {"", "distinct"}}};
  return kTable;
}

}  // namespace

bool is_function_word(std::string_view lower) {
  return function_words().contains(lower);
}

bool is_number_word(std::string_view lower) {
  return number_words().contains(lower);
}

std::optional<Pos> open_class_pos(std::string_view lower) {
  const auto& t = open_class();
  auto it = t.find(lower);
  if (it == t.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> irregular_lemma(std::string_view lower) {
  const auto& t = irregulars();
  auto it = t.find(lower);
  if (it == t.end()) return std::nullopt;
  return std::string(it->second);
}

std::optional<Hypernym> hypernym(std::string_view lemma) {
  const auto& t = hypernyms();
  auto it = t.find(lemma);
  if (it == t.end()) return std::nullopt;
  return it->second;
}

}  // namespace maskeval::lexicon
