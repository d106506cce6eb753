#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fixrec/corpus.hpp"
#include "fixrec/parallel.hpp"

namespace fixrec::patchlang {

enum class LineTag { context, add, remove };

struct HunkLine {
  LineTag tag = LineTag::context;
  std::string text;  // without the leading ' ', '+' or '-'

  bool operator==(const HunkLine&) const = default;
};

/// One `@@ -a,b +c,d @@` section. Counts are validated against the body:
/// remove+context lines == old_len, add+context == new_len.
struct Hunk {
  long old_start = 0;
  long old_len = 0;
  long new_start = 0;
  long new_len = 0;
  std::vector<HunkLine> lines;

  bool operator==(const Hunk&) const = default;
};

struct FileDiff {
  std::string file;  // new-side path, "a/"-style prefix stripped
  std::vector<Hunk> hunks;

  bool operator==(const FileDiff&) const = default;
};

enum class TokKind { identifier, keyword, literal, punct };

struct CodeToken {
  TokKind kind = TokKind::punct;
  std::string text;

  bool operator==(const CodeToken&) const = default;
};

enum class ActionKind { add, remove };

struct ActionSource {
  std::string commit_hash;
  std::string file;
  long line = 0;  // 1-based line number within the new (add) or old (remove) file

  bool operator==(const ActionSource&) const = default;
};

/// One normalized added/removed statement line.
struct FixAction {
  ActionKind kind = ActionKind::add;
  std::vector<CodeToken> tokens;
  ActionSource source;

  bool operator==(const FixAction&) const = default;
};

enum class MetaSort { identifier, expression };

struct MetaVar {
  std::string name;  // X0, X1, ... / E0, E1, ...
  MetaSort sort = MetaSort::identifier;

  bool operator==(const MetaVar&) const = default;
};

/// A pattern element is either a concrete token or a metavariable reference.
using PatternElem = std::variant<CodeToken, MetaVar>;

struct FixTemplate {
  ActionKind kind = ActionKind::add;
  std::vector<PatternElem> pattern;
  std::vector<MetaVar> metavars;  // declaration order = first occurrence
  long support = 0;               // distinct source commits
  std::vector<ActionSource> instances;

  bool operator==(const FixTemplate&) const = default;
};

/// Unified-diff parsing. Files are introduced by `--- `/`+++ ` pairs, hunks
/// by `@@ -a,b +c,d @@`. Throws Error on malformed headers or count
/// mismatches (the message names the hunk). Empty input -> empty list.
std::vector<FileDiff> parse_unified_diff(const std::string& diff_text);

/// Re-serializes a hunk body exactly as parsed (used by the round-trip
/// tests): one line per HunkLine with its ' ', '+' or '-' prefix.
std::string serialize_hunk_body(const Hunk& hunk);

/// C-flavored lexer: identifiers/keywords per the C99 list, numeric and
/// string/char literals, multi-char then single-char punctuators. Comments
/// (// and /* */) and whitespace are dropped; unlexable bytes become
/// single-char literal tokens.
std::vector<CodeToken> lex_line(const std::string& line);

/// Slice every add/remove line of every hunk into FixActions, dropping
/// blank-after-lexing lines and cancelling identical token sequences that
/// appear on both sides of one hunk (the cosmetic filter, multiset
/// semantics). `commit_hash` seeds the provenance of each action.
std::vector<FixAction> slice_fix_actions(const std::vector<FileDiff>& files,
                                         const std::string& commit_hash);

/// Convenience: parse + slice each commit's diff. Per-commit work is pure
/// and runs index-parallel; output order is commit order then line order.
/// slice_commit throws on a malformed diff; slice_commits instead skips the
/// offending commit and records one message per skip in `diagnostics`.
std::vector<FixAction> slice_commit(const corpus::Commit& commit);
std::vector<FixAction> slice_commits(const std::vector<corpus::Commit>& commits,
                                     par::Exec mode = par::Exec::parallel,
                                     std::vector<std::string>* diagnostics = nullptr);

/// Most specific common generalization of two equal-kind actions, or
/// nullopt. Alignment is positional over units (tokens or balanced `(...)`
/// groups); equal units stay literal; identifier<->identifier mismatches
/// become identifier metavariables (reused for repeated pairs); a failed
/// group alignment becomes an expression metavariable binding the group
/// interior; identifier mismatches in call position (immediately before
/// `(`) and every other mismatch fail.
std::optional<FixTemplate> anti_unify(const FixAction& a, const FixAction& b);

/// Template-level fold used by clustering: generalize an existing template
/// against one more action (metavariables in `t` stay abstract).
std::optional<FixTemplate> anti_unify_template(const FixTemplate& t, const FixAction& a);

/// True iff a substitution (identifier metavar -> one identifier token,
/// expression metavar -> one balanced token group), consistent across
/// repeats, reproduces a.tokens exactly.
bool matches(const FixTemplate& t, const FixAction& a);

/// Greedy first-fit agglomeration in input order; each cluster's template
/// is the running fold of its members. Output sorted by support descending
/// then rendered pattern text ascending. support counts distinct commits
/// and always equals len(instances): instances keeps the first joining
/// source per commit (later same-commit actions still refine the pattern).
std::vector<FixTemplate> cluster_and_rank(const std::vector<FixAction>& actions);

/// SmPL-flavored text: `@@ identifier X0; expression E0; @@` header, then
/// the pattern as `+`/`-` lines with deterministic spacing; a control-
/// keyword head group (if/while/for/switch) breaks the line and indents the
/// remainder with a tab.
std::string render_template(const FixTemplate& t);

/// The pattern body only (no header/prefix), single line; used for
/// deterministic tie-breaks.
std::string pattern_text(const FixTemplate& t);

}  // namespace fixrec::patchlang
