#include "fixrec/resources.hpp"

#include <algorithm>
#include <array>

namespace fixrec::resources {
namespace {

// data/stopwords_en.txt, embedded. Keep the two in sync (tests enforce it).
constexpr std::array<std::string_view, 127> kStopwords = {
    "i",          "me",        "my",      "myself",  "we",         "our",     "ours",
    "ourselves",  "you",       "your",    "yours",   "yourself",   "yourselves",
    "he",         "him",       "his",     "himself", "she",        "her",     "hers",
    "herself",    "it",        "its",     "itself",  "they",       "them",    "their",
    "theirs",     "themselves", "what",   "which",   "who",        "whom",    "this",
    "that",       "these",     "those",   "am",      "is",         "are",     "was",
    "were",       "be",        "been",    "being",   "have",       "has",     "had",
    "having",     "do",        "does",    "did",     "doing",      "a",       "an",
    "the",        "and",       "but",     "if",      "or",         "because", "as",
    "until",      "while",     "of",      "at",      "by",         "for",     "with",
    "about",      "against",   "between", "into",    "through",    "during",  "before",
    "after",      "above",     "below",   "to",      "from",       "up",      "down",
    "in",         "out",       "on",      "off",     "over",       "under",   "again",
    "further",    "then",      "once",    "here",    "there",      "when",    "where",
    "why",        "how",       "all",     "any",     "both",       "each",    "few",
    "more",       "most",      "other",   "some",    "such",       "no",      "nor",
    "not",        "only",      "own",     "same",    "so",         "than",    "too",
    "very",       "s",         "t",       "can",     "will",       "just",    "don",
    "should",     "now",
};

// data/c99_keywords.txt, embedded (ISO C99 6.4.1).
constexpr std::array<std::string_view, 37> kC99Keywords = {
    "auto",     "break",    "case",     "char",   "const",    "continue", "default",
    "do",       "double",   "else",     "enum",   "extern",   "float",    "for",
    "goto",     "if",       "inline",   "int",    "long",     "register", "restrict",
    "return",   "short",    "signed",   "sizeof", "static",   "struct",   "switch",
    "typedef",  "union",    "unsigned", "void",   "volatile", "while",    "_Bool",
    "_Complex", "_Imaginary",
};

}  // namespace

std::span<const std::string_view> english_stopwords() { return kStopwords; }

bool is_english_stopword(std::string_view word) {
  return std::find(kStopwords.begin(), kStopwords.end(), word) != kStopwords.end();
}

std::span<const std::string_view> c99_keywords() { return kC99Keywords; }

bool is_c_keyword(std::string_view word) {
  return std::find(kC99Keywords.begin(), kC99Keywords.end(), word) != kC99Keywords.end();
}

}  // namespace fixrec::resources
