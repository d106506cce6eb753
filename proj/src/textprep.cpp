#include "fixrec/textprep.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <utility>

#include "fixrec/resources.hpp"

namespace fixrec::textprep {
namespace {

bool is_word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_pure_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// Porter's consonant rule: a/e/i/o/u are vowels; 'y' is a consonant at
// position 0 or after a vowel, a vowel after a consonant; everything else
// (including digits) is a consonant.
bool is_consonant(const std::string& w, std::size_t i) {
  char c = w[i];
  if (is_pure_vowel(c)) return false;
  if (c == 'y') return i == 0 ? true : !is_consonant(w, i - 1);
  return true;
}

// The measure m of w[0..len): number of vowel-run -> consonant-run
// transitions ([C](VC)^m[V] in Porter's notation).
int measure(const std::string& w, std::size_t len) {
  int m = 0;
  std::size_t i = 0;
  while (i < len && is_consonant(w, i)) ++i;
  while (i < len) {
    while (i < len && !is_consonant(w, i)) ++i;
    if (i >= len) break;
    ++m;
    while (i < len && is_consonant(w, i)) ++i;
  }
  return m;
}

bool has_vowel(const std::string& w, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    if (!is_consonant(w, i)) return true;
  }
  return false;
}

bool ends_with(const std::string& w, std::string_view suffix) {
  return w.size() >= suffix.size() && std::string_view(w).substr(w.size() - suffix.size()) == suffix;
}

// Final doubled consonant other than l/s/z (y excluded outright, as in the
// reference revision's character class).
bool ends_double_cons(const std::string& w) {
  std::size_t n = w.size();
  if (n < 2 || w[n - 1] != w[n - 2]) return false;
  char c = w[n - 1];
  return !is_pure_vowel(c) && c != 'y' && c != 'l' && c != 's' && c != 'z';
}

// Whole-prefix *o rule of the reference revision: w[0..len) must be an
// initial consonant cluster (no vowels, 'y' only first), one vowel
// (y allowed), and a final consonant other than w/x/y.
bool cvc_shape(const std::string& w, std::size_t len) {
  if (len < 3) return false;
  char last = w[len - 1];
  if (is_pure_vowel(last) || last == 'w' || last == 'x' || last == 'y') return false;
  char mid = w[len - 2];
  if (!is_pure_vowel(mid) && mid != 'y') return false;
  if (is_pure_vowel(w[0])) return false;
  for (std::size_t i = 1; i + 2 < len; ++i) {
    if (is_pure_vowel(w[i]) || w[i] == 'y') return false;
  }
  return true;
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// Rule tables ordered longest-suffix-first; scanning stops at the first
// suffix that structurally matches (with a nonempty stem), whether or not
// the measure condition then allows the rewrite — exactly the reference
// behavior of one anchored alternation with a lazy stem group.
constexpr std::array<Rule, 21> kStep2 = {{
    {"ational", "ate"}, {"ization", "ize"}, {"iveness", "ive"}, {"fulness", "ful"},
    {"ousness", "ous"}, {"tional", "tion"}, {"biliti", "ble"},  {"entli", "ent"},
    {"ousli", "ous"},   {"ation", "ate"},   {"alism", "al"},    {"aliti", "al"},
    {"iviti", "ive"},   {"enci", "ence"},   {"anci", "ance"},   {"izer", "ize"},
    {"alli", "al"},     {"ator", "ate"},    {"logi", "log"},    {"bli", "ble"},
    {"eli", "e"},
}};

constexpr std::array<Rule, 7> kStep3 = {{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
    {"ical", "ic"},  {"ness", ""},  {"ful", ""},
}};

constexpr std::array<std::string_view, 18> kStep4 = {
    "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism",
    "ate",   "iti",  "ous",  "ive",  "ize",  "al",   "er",  "ic",  "ou",
};

}  // namespace

std::string porter_stem(std::string_view token) {
  std::string w(token);
  if (w.size() < 3) return w;

  // Step 1a: plurals.
  {
    std::size_t n = w.size();
    if (ends_with(w, "sses") && n >= 5) {
      w.resize(n - 2);
    } else if (ends_with(w, "ies") && n >= 4) {
      w.resize(n - 2);
    } else if (w[n - 1] == 's' && w[n - 2] != 's') {
      w.resize(n - 1);
    }
  }

  // Step 1b: -eed / -ed / -ing.
  {
    std::size_t n = w.size();
    if (ends_with(w, "eed") && n >= 4) {
      if (measure(w, n - 3) > 0) w.resize(n - 1);
    } else {
      std::size_t strip = 0;
      if (ends_with(w, "ed") && n >= 3) {
        strip = 2;
      } else if (ends_with(w, "ing") && n >= 4) {
        strip = 3;
      }
      if (strip != 0 && has_vowel(w, n - strip)) {
        w.resize(n - strip);
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
          w += 'e';
        } else if (ends_double_cons(w)) {
          w.resize(w.size() - 1);
        } else if (cvc_shape(w, w.size())) {
          w += 'e';
        }
      }
    }
  }

  // Step 1c: terminal y -> i when the stem has a vowel.
  {
    std::size_t n = w.size();
    if (n >= 2 && w[n - 1] == 'y' && has_vowel(w, n - 1)) w[n - 1] = 'i';
  }

  // Step 2 (m > 0) and step 3 (m > 0): double-suffix reductions.
  for (const Rule& r : kStep2) {
    if (w.size() > r.suffix.size() && ends_with(w, r.suffix)) {
      if (measure(w, w.size() - r.suffix.size()) > 0) {
        w.resize(w.size() - r.suffix.size());
        w += r.replacement;
      }
      break;
    }
  }
  for (const Rule& r : kStep3) {
    if (w.size() > r.suffix.size() && ends_with(w, r.suffix)) {
      if (measure(w, w.size() - r.suffix.size()) > 0) {
        w.resize(w.size() - r.suffix.size());
        w += r.replacement;
      }
      break;
    }
  }

  // Step 4 (m > 1): drop the remaining suffix; -ion only after s/t.
  {
    bool matched = false;
    for (std::string_view suffix : kStep4) {
      if (w.size() > suffix.size() && ends_with(w, suffix)) {
        if (measure(w, w.size() - suffix.size()) > 1) w.resize(w.size() - suffix.size());
        matched = true;
        break;
      }
    }
    std::size_t n = w.size();
    if (!matched && n >= 5 && ends_with(w, "ion") && (w[n - 4] == 's' || w[n - 4] == 't')) {
      if (measure(w, n - 3) > 1) w.resize(n - 3);
    }
  }

  // Step 5a: terminal e.
  {
    std::size_t n = w.size();
    if (n >= 2 && w[n - 1] == 'e') {
      int m = measure(w, n - 1);
      if (m > 1 || (m == 1 && !cvc_shape(w, n - 1))) w.resize(n - 1);
    }
  }

  // Step 5b: -ll -> -l when m > 1.
  {
    std::size_t n = w.size();
    if (n >= 2 && w[n - 1] == 'l' && w[n - 2] == 'l' && measure(w, n) > 1) w.resize(n - 1);
  }

  return w;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 &&
        !std::all_of(cur.begin(), cur.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      out.push_back(cur);
    }
    cur.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_char(c)) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

TokenSeq remove_stopwords(const TokenSeq& tokens) {
  TokenSeq out;
  out.reserve(tokens.size());
  std::copy_if(tokens.begin(), tokens.end(), std::back_inserter(out),
               [](const std::string& t) { return !resources::is_english_stopword(t); });
  return out;
}

TokenSeq preprocess_text(std::string_view text) {
  TokenSeq tokens = remove_stopwords(tokenize(text));
  for (std::string& t : tokens) t = porter_stem(t);
  return tokens;
}

TokenSeq preprocess(const corpus::BugReport& report) { return preprocess_text(report.short_desc); }

std::vector<TokenSeq> preprocess_all(const std::vector<corpus::BugReport>& reports,
                                     par::Exec mode) {
  std::vector<TokenSeq> out(reports.size());
  par::for_each_index(reports.size(), mode,
                      [&](std::size_t i) { out[i] = preprocess(reports[i]); });
  return out;
}

}  // namespace fixrec::textprep
