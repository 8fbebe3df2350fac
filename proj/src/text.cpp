// SPDX-FileCopyrightText: Copyright (c) 2026 The Bookmarks Authors
// SPDX-License-Identifier: Apache-2.0
#include "bookmarks/text.hpp"

#include <algorithm>
#include <unordered_set>

namespace bookmarks {
namespace {

// Fixed English stop-word list. Changing it changes prefilter ranking and
// concept keywords, so it is versioned with the prompt templates.
const std::vector<std::string_view> kStopWords = {
    "a",          "about",    "above",     "after",      "again",   "against", "all",
    "also",       "am",       "an",        "and",        "any",     "are",     "aren",
    "as",         "at",       "be",        "because",    "been",    "before",  "being",
    "below",      "between",  "both",      "but",        "by",      "can",     "cant",
    "could",      "couldn",   "did",       "didn",       "do",      "does",    "doesn",
    "doing",      "don",      "dont",      "down",       "during",  "each",    "either",
    "ever",       "few",      "for",       "from",       "further", "had",     "has",
    "have",       "having",   "he",        "her",        "here",    "hers",    "herself",
    "him",        "himself",  "his",       "how",        "i",       "if",      "im",
    "in",         "into",     "is",        "isn",        "isnt",    "it",      "its",
    "itself",     "ive",      "just",      "ll",         "may",     "me",      "might",
    "more",       "most",     "must",      "my",         "myself",  "neither", "no",
    "nor",        "not",      "now",       "of",         "off",     "on",      "once",
    "only",       "onto",     "or",        "other",      "our",     "ours",    "ourselves",
    "out",        "over",     "own",       "per",        "re",      "same",    "shall",
    "she",        "should",   "so",        "some",       "such",    "than",    "that",
    "thats",      "the",      "their",     "theirs",     "them",    "themselves", "then",
    "there",      "these",    "they",      "this",       "those",   "through", "to",
    "too",        "toward",   "towards",   "under",      "until",   "up",      "upon",
    "us",         "ve",       "very",      "via",        "was",     "wasn",    "we",
    "were",       "weren",    "what",      "when",       "where",   "whether", "which",
    "while",      "who",      "whom",      "whose",      "why",     "will",    "with",
    "within",     "without",  "won",       "wont",       "would",   "wouldn",  "yet",
    "you",        "youre",    "your",      "yours",      "yourself", "yourselves",
};

// Words that frame a concept question without naming the concept.
const std::unordered_set<std::string_view> kScaffolding = {
    "mean",     "meaning",  "means",  "meant",   "definition", "define", "defined",
    "refer",    "refers",   "referred", "called", "known",     "explain", "describe",
    "concept",  "term",     "exactly", "thing",  "story",      "storyline",
};

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c >= 0x80;
}

// Splits on anything that is neither a word byte nor an apostrophe. The right
// single quotation mark (U+2019, E2 80 99) is folded to an ASCII apostrophe.
std::vector<std::string> raw_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99) {
      current += '\'';
      i += 2;
    } else if (c == 0xE2 && i + 2 < text.size() &&
               static_cast<unsigned char>(text[i + 1]) == 0x80 &&
               (static_cast<unsigned char>(text[i + 2]) == 0x9C ||
                static_cast<unsigned char>(text[i + 2]) == 0x9D ||
                static_cast<unsigned char>(text[i + 2]) == 0x94 ||
                static_cast<unsigned char>(text[i + 2]) == 0x93 ||
                static_cast<unsigned char>(text[i + 2]) == 0xA6)) {
      // curly double quotes, dashes, ellipsis
      flush();
      i += 2;
    } else if (c == '\'') {
      current += '\'';
    } else if (is_word_byte(c)) {
      current += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    } else {
      flush();
    }
  }
  flush();
  return words;
}

std::string strip_apostrophes(std::string word) {
  if (word.size() >= 2 && word.ends_with("'s")) word.resize(word.size() - 2);
  std::erase(word, '\'');
  return word;
}

}  // namespace

const std::vector<std::string_view>& stop_words() { return kStopWords; }

bool is_stop_word(std::string_view token) {
  static const std::unordered_set<std::string_view> lookup(kStopWords.begin(), kStopWords.end());
  return lookup.contains(token);
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

TokenSet normalize_tokens(std::string_view text) {
  TokenSet tokens;
  for (std::string& word : raw_words(text)) {
    std::string token = strip_apostrophes(std::move(word));
    if (token.empty() || is_stop_word(token)) continue;
    tokens.insert(std::move(token));
  }
  return tokens;
}

double overlap_score(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t shared = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  const std::size_t total = a.size() + b.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(total);
}

std::vector<std::string> concept_keywords(std::string_view question) {
  std::set<std::string> keywords;
  for (const std::string& token : normalize_tokens(question)) {
    if (!kScaffolding.contains(token)) keywords.insert(token);
  }
  // Quoted phrases: ASCII "..." and curly “...”.
  std::string ascii(question);
  for (std::string_view open : {std::string_view("\""), std::string_view("\xE2\x80\x9C")}) {
    const std::string_view close = open == "\"" ? std::string_view("\"") : "\xE2\x80\x9D";
    std::size_t pos = 0;
    while ((pos = ascii.find(open, pos)) != std::string::npos) {
      const std::size_t start = pos + open.size();
      const std::size_t end = ascii.find(close, start);
      if (end == std::string::npos) break;
      std::string phrase = trim(to_lower(ascii.substr(start, end - start)));
      if (!phrase.empty()) keywords.insert(std::move(phrase));
      pos = end + close.size();
    }
  }
  return {keywords.begin(), keywords.end()};
}

bool contains_any_keyword(std::string_view text, const std::vector<std::string>& keywords) {
  if (keywords.empty()) return false;
  const std::string lowered = to_lower(text);
  return std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) {
    return !k.empty() && lowered.find(k) != std::string::npos;
  });
}

}  // namespace bookmarks
