#pragma once

#include <span>
#include <string_view>

namespace fixrec::resources {

/// The classic 127-word English stopword list, embedded so results are
/// reproducible without any runtime data lookup. The same list ships as
/// data/stopwords_en.txt (one word per line); a test asserts the two stay
/// in sync.
std::span<const std::string_view> english_stopwords();

bool is_english_stopword(std::string_view word);

/// The 37 C99 keywords (data/c99_keywords.txt is the file twin).
std::span<const std::string_view> c99_keywords();

bool is_c_keyword(std::string_view word);

}  // namespace fixrec::resources
