#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fixrec/corpus.hpp"
#include "fixrec/parallel.hpp"

namespace fixrec::textprep {

/// Ordered lowercase stems; every token matches [a-z0-9_]+ and is not a
/// stopword (stopwords are removed before stemming).
using TokenSeq = std::vector<std::string>;

/// Lowercases, splits on anything outside [A-Za-z0-9_] (non-ASCII bytes are
/// split points), drops tokens shorter than 2 chars and purely numeric
/// tokens. Mixed tokens like "0x42" or "ipv6" survive.
std::vector<std::string> tokenize(std::string_view text);

/// Removes embedded-list English stopwords, order preserved. Idempotent.
TokenSeq remove_stopwords(const TokenSeq& tokens);

/// Porter stem of a lowercase ASCII token. Canonical algorithm as
/// distributed by its author (the revision every reference implementation
/// and the official test vocabulary use): step-2 includes bli->ble and
/// logi->log, words of length <= 2 are returned unchanged, and a leading
/// 'y' counts as a consonant.
std::string porter_stem(std::string_view token);

/// tokenize -> remove_stopwords -> porter_stem over short_desc only.
/// A stopword-only summary yields an empty sequence; downstream treats that
/// as a prior-only document.
TokenSeq preprocess(const corpus::BugReport& report);
TokenSeq preprocess_text(std::string_view text);

/// Batch preprocessing; pure per report, so index-parallel.
std::vector<TokenSeq> preprocess_all(const std::vector<corpus::BugReport>& reports,
                                     par::Exec mode = par::Exec::parallel);

}  // namespace fixrec::textprep
