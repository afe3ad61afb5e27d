#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "graphsearch/common.hpp"

namespace graphsearch {

/// A normalized token and the byte span it came from in the source text.
struct Token {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

struct SuffixRule {
  std::string suffix;
  std::string replacement;
  std::size_t min_stem = 3;  // characters that must remain before the suffix
};

/// Rules are grouped in steps; within a step the first matching rule fires,
/// and every step is applied in order.
using SuffixRuleSet = std::vector<std::vector<SuffixRule>>;

inline const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",      "about",   "above",  "after",  "again",  "against", "all",   "also",   "am",     "among",
      "an",     "and",     "any",    "are",    "as",     "at",      "be",    "been",   "before", "being",
      "below",  "between", "both",   "but",    "by",     "can",     "could", "did",    "do",     "does",
      "doing",  "down",    "during", "each",   "either", "few",     "for",   "from",   "further", "had",
      "has",    "have",    "having", "he",     "her",    "here",    "hers",  "him",    "his",    "how",
      "however", "i",      "if",     "in",     "into",   "is",      "it",    "its",    "itself", "may",
      "me",     "might",   "more",   "most",   "must",   "my",      "no",    "nor",    "not",    "of",
      "off",    "on",      "once",   "only",   "or",     "other",   "our",   "ours",   "out",    "over",
      "own",    "same",    "she",    "should", "so",     "some",    "such",  "than",   "that",   "the",
      "their",  "theirs",  "them",   "then",   "there",  "these",   "they",  "this",   "those",  "through",
      "thus",   "to",      "too",    "under",  "until",  "up",      "upon",  "very",   "via",    "was",
      "we",     "were",    "what",   "when",   "where",  "whether", "which", "while",  "who",    "whom",
      "why",    "will",    "with",   "within", "without", "would",  "you",   "your",   "yours"};
  return words;
}

inline const SuffixRuleSet& default_suffix_rules() {
  static const SuffixRuleSet rules = {
      // plurals; identity rules shield -ss/-us/-is from the bare -s rule
      {{"sses", "ss", 2}, {"ies", "y", 2}, {"ss", "ss", 1}, {"us", "us", 1}, {"is", "is", 1}, {"s", "", 3}},
      {{"ing", "", 3}, {"ed", "", 3}},
      {{"e", "", 3}},
  };
  return rules;
}

struct TokenizerConfig {
  std::set<std::string> stopwords = default_stopwords();
  SuffixRuleSet suffix_rules = default_suffix_rules();
  bool stem = true;
};

namespace detail {

inline bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

inline bool stemmable(std::string_view tok) {
  return std::all_of(tok.begin(), tok.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; });
}

}  // namespace detail

inline std::string stem(std::string word, const SuffixRuleSet& rules) {
  if (!detail::stemmable(word)) return word;
  for (const auto& step : rules) {
    for (const auto& rule : step) {
      if (word.size() >= rule.suffix.size() + rule.min_stem && word.ends_with(rule.suffix)) {
        word.replace(word.size() - rule.suffix.size(), rule.suffix.size(), rule.replacement);
        break;
      }
    }
  }
  return word;
}

/// Splits on anything that is not a letter, digit or non-ASCII byte, keeping
/// hyphens that sit between two word characters ("covid-19"). Tokens are
/// lowercased, stopwords dropped, and alphabetic tokens suffix-stripped.
inline std::vector<Token> tokenize_normalize(std::string_view text, const TokenizerConfig& config = {}) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!detail::is_word_byte(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < n) {
      if (detail::is_word_byte(text[i])) {
        ++i;
      } else if (text[i] == '-' && i + 1 < n && detail::is_word_byte(text[i + 1])) {
        ++i;
      } else {
        break;
      }
    }
    auto word = text::to_lower(text.substr(start, i - start));
    if (config.stopwords.contains(word)) continue;
    if (config.stem) word = stem(std::move(word), config.suffix_rules);
    out.push_back(Token{std::move(word), start, i});
  }
  return out;
}

/// Tokens joined by single spaces: the form names are compared in.
inline std::string normalize_phrase(std::string_view text, const TokenizerConfig& config = {}) {
  std::string out;
  for (const auto& tok : tokenize_normalize(text, config)) {
    if (!out.empty()) out.push_back(' ');
    out += tok.text;
  }
  return out;
}

/// Edit distance over code points.
inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// 1 - levenshtein(a, b) / max(|a|, |b|); two empty strings are identical.
inline double similarity(std::u32string_view a, std::u32string_view b) {
  auto longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

inline double similarity(std::string_view a, std::string_view b) {
  return similarity(text::utf8_decode(a), text::utf8_decode(b));
}

}  // namespace graphsearch
