#include "fixrec/patchlang.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "fixrec/error.hpp"
#include "fixrec/resources.hpp"

namespace fixrec::patchlang {
namespace {

// ---------------------------------------------------------------------------
// Unified-diff parsing
// ---------------------------------------------------------------------------

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

// "a/dir/file.c\t<timestamp>" -> "dir/file.c"
std::string strip_diff_path(std::string s) {
  std::size_t tab = s.find('\t');
  if (tab != std::string::npos) s.resize(tab);
  if (s.rfind("a/", 0) == 0 || s.rfind("b/", 0) == 0) s.erase(0, 2);
  return s;
}

struct HunkHeader {
  long old_start = 0, old_len = 1, new_start = 0, new_len = 1;
  bool ok = false;
};

// @@ -a[,b] +c[,d] @@[ section heading]
HunkHeader parse_hunk_header(const std::string& line) {
  HunkHeader h;
  if (line.rfind("@@ -", 0) != 0) return h;
  std::size_t i = 4;
  auto read_num = [&](long& out) {
    if (i >= line.size() || line[i] < '0' || line[i] > '9') return false;
    out = 0;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') out = out * 10 + (line[i++] - '0');
    return true;
  };
  auto expect = [&](char c) { return i < line.size() && line[i] == c ? (++i, true) : false; };
  if (!read_num(h.old_start)) return h;
  if (i < line.size() && line[i] == ',') {
    ++i;
    if (!read_num(h.old_len)) return h;
  }
  if (!expect(' ') || !expect('+') || !read_num(h.new_start)) return h;
  if (i < line.size() && line[i] == ',') {
    ++i;
    if (!read_num(h.new_len)) return h;
  }
  if (!expect(' ') || !expect('@') || !expect('@')) return h;
  h.ok = true;
  return h;
}

[[noreturn]] void hunk_error(const std::string& file, const Hunk& h, const std::string& what) {
  throw Error("hunk @@ -" + std::to_string(h.old_start) + "," + std::to_string(h.old_len) + " +" +
              std::to_string(h.new_start) + "," + std::to_string(h.new_len) + " @@ in '" + file +
              "': " + what);
}

// ---------------------------------------------------------------------------
// C-flavored lexing
// ---------------------------------------------------------------------------

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_space_char(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

constexpr std::string_view kPunct3[] = {"<<=", ">>=", "..."};
constexpr std::string_view kPunct2[] = {"->", "++", "--", "<<", ">>", "<=", ">=", "==",
                                        "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=",
                                        "&=", "^=", "|=", "##"};
constexpr std::string_view kPunct1 = "[](){}<>.,;:?!+-*/%&|^~=#";

}  // namespace

std::vector<CodeToken> lex_line(const std::string& line) {
  std::vector<CodeToken> toks;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    const char c = line[i];
    if (is_space_char(c)) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && line[i + 1] == '/') break;  // line comment
    if (c == '/' && i + 1 < n && line[i + 1] == '*') {
      std::size_t end = line.find("*/", i + 2);
      if (end == std::string::npos) break;  // comment runs off the line
      i = end + 2;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < n && is_ident_char(line[j])) ++j;
      std::string text = line.substr(i, j - i);
      TokKind kind = resources::is_c_keyword(text) ? TokKind::keyword : TokKind::identifier;
      toks.push_back({kind, std::move(text)});
      i = j;
      continue;
    }
    if (c >= '0' && c <= '9') {
      std::size_t j = i + 1;
      while (j < n && (is_ident_char(line[j]) || line[j] == '.')) ++j;
      toks.push_back({TokKind::literal, line.substr(i, j - i)});
      i = j;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < n) {
        if (line[j] == '\\' && j + 1 < n) {
          j += 2;
        } else if (line[j] == c) {
          ++j;
          break;
        } else {
          ++j;
        }
      }
      toks.push_back({TokKind::literal, line.substr(i, j - i)});
      i = j;
      continue;
    }
    bool matched = false;
    for (std::string_view p : kPunct3) {
      if (line.compare(i, 3, p) == 0) {
        toks.push_back({TokKind::punct, std::string(p)});
        i += 3;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (std::string_view p : kPunct2) {
      if (line.compare(i, 2, p) == 0) {
        toks.push_back({TokKind::punct, std::string(p)});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (kPunct1.find(c) != std::string_view::npos) {
      toks.push_back({TokKind::punct, std::string(1, c)});
    } else {
      // Unlexable byte (non-ASCII and the like): keep it as a literal token.
      toks.push_back({TokKind::literal, std::string(1, c)});
    }
    ++i;
  }
  return toks;
}

std::vector<FileDiff> parse_unified_diff(const std::string& diff_text) {
  std::vector<FileDiff> files;
  const std::vector<std::string> lines = split_lines(diff_text);
  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string& line = lines[i];
    if (line.rfind("--- ", 0) == 0) {
      if (i + 1 >= lines.size() || lines[i + 1].rfind("+++ ", 0) != 0) {
        throw Error("diff line " + std::to_string(i + 1) + ": '--- ' header without '+++ ' pair");
      }
      std::string old_path = strip_diff_path(line.substr(4));
      std::string new_path = strip_diff_path(lines[i + 1].substr(4));
      FileDiff fd;
      fd.file = new_path == "/dev/null" ? old_path : new_path;
      i += 2;
      while (i < lines.size() && lines[i].rfind("@@", 0) == 0) {
        HunkHeader hh = parse_hunk_header(lines[i]);
        if (!hh.ok) {
          throw Error("diff line " + std::to_string(i + 1) + ": malformed hunk header '" +
                      lines[i] + "'");
        }
        Hunk hunk;
        hunk.old_start = hh.old_start;
        hunk.old_len = hh.old_len;
        hunk.new_start = hh.new_start;
        hunk.new_len = hh.new_len;
        ++i;
        long old_left = hh.old_len;
        long new_left = hh.new_len;
        while (old_left > 0 || new_left > 0) {
          if (i >= lines.size()) hunk_error(fd.file, hunk, "body ends before declared counts");
          const std::string& bl = lines[i];
          if (!bl.empty() && bl[0] == '\\') {  // "\ No newline at end of file"
            ++i;
            continue;
          }
          // A fully empty line is a context line whose trailing space was
          // stripped in transit; normalize it to empty context text.
          const char tag = bl.empty() ? ' ' : bl[0];
          std::string text = bl.empty() ? std::string() : bl.substr(1);
          if (tag == ' ') {
            if (old_left <= 0 || new_left <= 0) {
              hunk_error(fd.file, hunk, "context line exceeds declared counts");
            }
            hunk.lines.push_back({LineTag::context, std::move(text)});
            --old_left;
            --new_left;
          } else if (tag == '+') {
            if (new_left <= 0) hunk_error(fd.file, hunk, "add line exceeds declared new count");
            hunk.lines.push_back({LineTag::add, std::move(text)});
            --new_left;
          } else if (tag == '-') {
            if (old_left <= 0) hunk_error(fd.file, hunk, "remove line exceeds declared old count");
            hunk.lines.push_back({LineTag::remove, std::move(text)});
            --old_left;
          } else {
            hunk_error(fd.file, hunk, "unexpected line '" + bl + "' inside hunk body");
          }
          ++i;
        }
        fd.hunks.push_back(std::move(hunk));
      }
      files.push_back(std::move(fd));
      continue;
    }
    if (line.rfind("+++ ", 0) == 0) {
      throw Error("diff line " + std::to_string(i + 1) + ": '+++ ' header without '--- ' pair");
    }
    if (!line.empty() && (line[0] == '+' || line[0] == '-')) {
      throw Error("diff line " + std::to_string(i + 1) + ": diff body line outside any hunk");
    }
    ++i;  // diff --git, index, mode, rename and similar metadata lines
  }
  return files;
}

std::string serialize_hunk_body(const Hunk& hunk) {
  std::string out;
  for (const HunkLine& hl : hunk.lines) {
    switch (hl.tag) {
      case LineTag::context: out += ' '; break;
      case LineTag::add: out += '+'; break;
      case LineTag::remove: out += '-'; break;
    }
    out += hl.text;
    out += '\n';
  }
  return out;
}

namespace {

std::string token_key(const std::vector<CodeToken>& toks) {
  std::string key;
  for (const CodeToken& t : toks) {
    key += static_cast<char>('0' + static_cast<int>(t.kind));
    key += t.text;
    key += '\x1f';
  }
  return key;
}

}  // namespace

std::vector<FixAction> slice_fix_actions(const std::vector<FileDiff>& files,
                                         const std::string& commit_hash) {
  std::vector<FixAction> out;
  for (const FileDiff& fd : files) {
    for (const Hunk& hunk : fd.hunks) {
      struct Candidate {
        ActionKind kind;
        std::vector<CodeToken> tokens;
        long line;
      };
      std::vector<Candidate> cands;
      long old_line = hunk.old_start;
      long new_line = hunk.new_start;
      for (const HunkLine& hl : hunk.lines) {
        if (hl.tag == LineTag::context) {
          ++old_line;
          ++new_line;
          continue;
        }
        const bool is_add = hl.tag == LineTag::add;
        const long line = is_add ? new_line++ : old_line++;
        std::vector<CodeToken> toks = lex_line(hl.text);
        if (toks.empty()) continue;  // blank or comment-only line
        cands.push_back({is_add ? ActionKind::add : ActionKind::remove, std::move(toks), line});
      }
      // Cosmetic filter: a token sequence appearing on both sides of the
      // hunk is a move/reformat, not a fix action; cancel matching
      // occurrences pairwise (multiset semantics, earliest lines first).
      std::map<std::string, int> add_count;
      std::map<std::string, int> rem_count;
      for (const Candidate& c : cands) {
        (c.kind == ActionKind::add ? add_count : rem_count)[token_key(c.tokens)] += 1;
      }
      std::map<std::string, int> cancel;
      for (const auto& [key, na] : add_count) {
        auto it = rem_count.find(key);
        if (it != rem_count.end()) cancel[key] = std::min(na, it->second);
      }
      std::map<std::string, int> cancelled_add;
      std::map<std::string, int> cancelled_rem;
      for (Candidate& c : cands) {
        const std::string key = token_key(c.tokens);
        auto it = cancel.find(key);
        if (it != cancel.end()) {
          auto& used = c.kind == ActionKind::add ? cancelled_add[key] : cancelled_rem[key];
          if (used < it->second) {
            ++used;
            continue;
          }
        }
        out.push_back(FixAction{c.kind, std::move(c.tokens), {commit_hash, fd.file, c.line}});
      }
    }
  }
  return out;
}

std::vector<FixAction> slice_commit(const corpus::Commit& commit) {
  return slice_fix_actions(parse_unified_diff(commit.diff_text), commit.hash);
}

std::vector<FixAction> slice_commits(const std::vector<corpus::Commit>& commits, par::Exec mode,
                                     std::vector<std::string>* diagnostics) {
  std::vector<std::vector<FixAction>> per_commit(commits.size());
  std::vector<std::string> errors(commits.size());
  par::for_each_index(commits.size(), mode, [&](std::size_t i) {
    try {
      per_commit[i] = slice_commit(commits[i]);
    } catch (const Error& e) {
      errors[i] = "commit " + commits[i].hash + ": " + e.what();
    }
  });
  std::vector<FixAction> out;
  for (std::size_t i = 0; i < commits.size(); ++i) {
    if (!errors[i].empty()) {
      if (diagnostics) diagnostics->push_back(errors[i]);
      continue;
    }
    out.insert(out.end(), std::make_move_iterator(per_commit[i].begin()),
               std::make_move_iterator(per_commit[i].end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Anti-unification
// ---------------------------------------------------------------------------

namespace {

// Alignment unit: a concrete token, a metavariable, or a balanced `(...)`
// group (children hold the interior; the parentheses themselves are
// implicit and always render as literals).
struct Term {
  enum class Kind { token, var, group };
  Kind kind = Kind::token;
  CodeToken tok;
  MetaSort sort = MetaSort::identifier;  // kind == var
  int var_id = -1;                       // kind == var: pre-renaming identity
  std::vector<Term> children;            // kind == group
};

bool is_lparen(const CodeToken& t) { return t.kind == TokKind::punct && t.text == "("; }
bool is_rparen(const CodeToken& t) { return t.kind == TokKind::punct && t.text == ")"; }

// Generic grouping over any element list, given accessors that classify an
// element as "(", ")" or other; used for both raw tokens and pattern
// elements (which may contain metavariables).
template <class Elem, class ToTerm>
std::vector<Term> group_elems(const std::vector<Elem>& elems, std::size_t begin, std::size_t end,
                              bool (*lp)(const Elem&), bool (*rp)(const Elem&), ToTerm to_term) {
  std::vector<Term> terms;
  std::size_t i = begin;
  while (i < end) {
    if (lp(elems[i])) {
      int depth = 1;
      std::size_t j = i + 1;
      for (; j < end; ++j) {
        if (lp(elems[j])) ++depth;
        if (rp(elems[j]) && --depth == 0) break;
      }
      if (j < end) {
        Term g;
        g.kind = Term::Kind::group;
        g.children = group_elems(elems, i + 1, j, lp, rp, to_term);
        terms.push_back(std::move(g));
        i = j + 1;
        continue;
      }
      // Unbalanced "(" falls through as a plain token.
    }
    terms.push_back(to_term(elems[i]));
    ++i;
  }
  return terms;
}

std::vector<Term> tokens_to_terms(const std::vector<CodeToken>& toks) {
  return group_elems<CodeToken>(
      toks, 0, toks.size(), [](const CodeToken& t) { return is_lparen(t); },
      [](const CodeToken& t) { return is_rparen(t); },
      [](const CodeToken& t) {
        Term u;
        u.kind = Term::Kind::token;
        u.tok = t;
        return u;
      });
}

std::vector<Term> pattern_to_terms(const std::vector<PatternElem>& pattern,
                                   const std::vector<MetaVar>& metavars) {
  std::unordered_map<std::string, int> var_ids;
  for (std::size_t i = 0; i < metavars.size(); ++i) {
    var_ids.emplace(metavars[i].name, static_cast<int>(i));
  }
  std::vector<Term> flat;
  flat.reserve(pattern.size());
  for (const PatternElem& e : pattern) {
    Term u;
    if (const CodeToken* t = std::get_if<CodeToken>(&e)) {
      u.kind = Term::Kind::token;
      u.tok = *t;
    } else {
      const MetaVar& v = std::get<MetaVar>(e);
      u.kind = Term::Kind::var;
      u.sort = v.sort;
      u.tok.text = v.name;  // carries the original name for pair keying
      u.var_id = var_ids.count(v.name) ? var_ids[v.name] : -1;
    }
    flat.push_back(std::move(u));
  }
  return group_elems<Term>(
      flat, 0, flat.size(),
      [](const Term& t) { return t.kind == Term::Kind::token && is_lparen(t.tok); },
      [](const Term& t) { return t.kind == Term::Kind::token && is_rparen(t.tok); },
      [](const Term& t) { return t; });
}

std::string term_key(const Term& t) {
  switch (t.kind) {
    case Term::Kind::token:
      return "t" + std::string(1, static_cast<char>('0' + static_cast<int>(t.tok.kind))) +
             t.tok.text;
    case Term::Kind::var:
      return std::string("v") + (t.sort == MetaSort::identifier ? "i" : "e") + t.tok.text;
    case Term::Kind::group: {
      std::string s = "g(";
      for (const Term& c : t.children) s += term_key(c) + "\x1e";
      return s + ")";
    }
  }
  return {};
}

enum class GenStatus { ok, soft_fail, hard_fail };

struct GenContext {
  std::map<std::string, int> vars_by_pair;
  std::vector<MetaSort> sorts;
  int fresh(const Term& a, const Term& b, MetaSort sort) {
    const std::string key = term_key(a) + "\x1f" + term_key(b);
    auto it = vars_by_pair.find(key);
    if (it != vars_by_pair.end()) return it->second;
    const int id = static_cast<int>(sorts.size());
    sorts.push_back(sort);
    vars_by_pair.emplace(key, id);
    return id;
  }
};

bool identifier_like(const Term& t) {
  return (t.kind == Term::Kind::token && t.tok.kind == TokKind::identifier) ||
         (t.kind == Term::Kind::var && t.sort == MetaSort::identifier);
}

bool group_like(const Term& t) {
  return t.kind == Term::Kind::group ||
         (t.kind == Term::Kind::var && t.sort == MetaSort::expression);
}

bool callish(const std::vector<Term>& seq, std::size_t i) {
  if (i + 1 >= seq.size()) return false;
  const Term& next = seq[i + 1];
  // An expression metavariable stands for a balanced group, so it anchors a
  // call just like a concrete argument list does.
  return group_like(next) || (next.kind == Term::Kind::token && is_lparen(next.tok));
}

GenStatus generalize_seq(const std::vector<Term>& a, const std::vector<Term>& b, GenContext& ctx,
                         std::vector<Term>& out);

GenStatus generalize_unit(const Term& a, const Term& b, bool call_position, GenContext& ctx,
                          Term& out) {
  if (a.kind == Term::Kind::token && b.kind == Term::Kind::token && a.tok == b.tok) {
    out = a;
    return GenStatus::ok;
  }
  if (a.kind == Term::Kind::var && b.kind == Term::Kind::var && a.sort == b.sort &&
      a.tok.text == b.tok.text) {
    out = a;
    return GenStatus::ok;
  }
  if (identifier_like(a) && identifier_like(b)) {
    // An identifier immediately preceding a call's argument list is an API
    // anchor (kmalloc stays kmalloc); abstracting it would fuse unrelated
    // APIs, so the whole unification fails instead.
    if (call_position) return GenStatus::hard_fail;
    out.kind = Term::Kind::var;
    out.sort = MetaSort::identifier;
    out.var_id = ctx.fresh(a, b, MetaSort::identifier);
    return GenStatus::ok;
  }
  if (a.kind == Term::Kind::group && b.kind == Term::Kind::group) {
    std::vector<Term> inner;
    GenStatus s = generalize_seq(a.children, b.children, ctx, inner);
    if (s == GenStatus::ok) {
      out.kind = Term::Kind::group;
      out.children = std::move(inner);
      return GenStatus::ok;
    }
    if (s == GenStatus::hard_fail) return s;
    // Interiors do not align: abstract the whole group as one expression.
    out.kind = Term::Kind::var;
    out.sort = MetaSort::expression;
    out.var_id = ctx.fresh(a, b, MetaSort::expression);
    return GenStatus::ok;
  }
  if (group_like(a) && group_like(b)) {  // expression metavar folding
    out.kind = Term::Kind::var;
    out.sort = MetaSort::expression;
    out.var_id = ctx.fresh(a, b, MetaSort::expression);
    return GenStatus::ok;
  }
  return GenStatus::soft_fail;
}

GenStatus generalize_seq(const std::vector<Term>& a, const std::vector<Term>& b, GenContext& ctx,
                         std::vector<Term>& out) {
  if (a.size() != b.size()) return GenStatus::soft_fail;
  out.clear();
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool call_position = callish(a, i) && callish(b, i);
    Term term;
    GenStatus s = generalize_unit(a[i], b[i], call_position, ctx, term);
    if (s != GenStatus::ok) return s;
    out.push_back(std::move(term));
  }
  return GenStatus::ok;
}

void flatten_terms(const std::vector<Term>& terms, std::vector<PatternElem>& pattern,
                   std::vector<int>& var_order, const std::vector<MetaSort>& sorts,
                   std::map<int, std::string>& names, int& next_x, int& next_e) {
  for (const Term& t : terms) {
    switch (t.kind) {
      case Term::Kind::token:
        pattern.emplace_back(t.tok);
        break;
      case Term::Kind::var: {
        auto it = names.find(t.var_id);
        if (it == names.end()) {
          std::string name = sorts[t.var_id] == MetaSort::identifier
                                 ? "X" + std::to_string(next_x++)
                                 : "E" + std::to_string(next_e++);
          it = names.emplace(t.var_id, std::move(name)).first;
          var_order.push_back(t.var_id);
        }
        pattern.emplace_back(MetaVar{it->second, sorts[t.var_id]});
        break;
      }
      case Term::Kind::group:
        pattern.emplace_back(CodeToken{TokKind::punct, "("});
        flatten_terms(t.children, pattern, var_order, sorts, names, next_x, next_e);
        pattern.emplace_back(CodeToken{TokKind::punct, ")"});
        break;
    }
  }
}

FixTemplate build_template(ActionKind kind, const std::vector<Term>& terms,
                           const std::vector<MetaSort>& sorts) {
  FixTemplate t;
  t.kind = kind;
  std::vector<int> var_order;
  std::map<int, std::string> names;
  int next_x = 0;
  int next_e = 0;
  flatten_terms(terms, t.pattern, var_order, sorts, names, next_x, next_e);
  for (int id : var_order) t.metavars.push_back(MetaVar{names[id], sorts[id]});
  return t;
}

void add_instance(FixTemplate& t, const ActionSource& source) {
  for (const ActionSource& s : t.instances) {
    if (s.commit_hash == source.commit_hash) return;  // support counts distinct commits
  }
  t.instances.push_back(source);
  t.support = static_cast<long>(t.instances.size());
}

}  // namespace

std::optional<FixTemplate> anti_unify(const FixAction& a, const FixAction& b) {
  if (a.kind != b.kind) return std::nullopt;
  GenContext ctx;
  std::vector<Term> result;
  if (generalize_seq(tokens_to_terms(a.tokens), tokens_to_terms(b.tokens), ctx, result) !=
      GenStatus::ok) {
    return std::nullopt;
  }
  FixTemplate t = build_template(a.kind, result, ctx.sorts);
  add_instance(t, a.source);
  add_instance(t, b.source);
  return t;
}

std::optional<FixTemplate> anti_unify_template(const FixTemplate& t, const FixAction& a) {
  if (t.kind != a.kind) return std::nullopt;
  GenContext ctx;
  std::vector<Term> result;
  if (generalize_seq(pattern_to_terms(t.pattern, t.metavars), tokens_to_terms(a.tokens), ctx,
                     result) != GenStatus::ok) {
    return std::nullopt;
  }
  FixTemplate folded = build_template(t.kind, result, ctx.sorts);
  folded.instances = t.instances;
  folded.support = t.support;
  add_instance(folded, a.source);
  return folded;
}

namespace {

bool match_seq(const std::vector<Term>& pat, const std::vector<Term>& act,
               std::map<std::string, std::string>& bindings) {
  if (pat.size() != act.size()) return false;
  for (std::size_t i = 0; i < pat.size(); ++i) {
    const Term& p = pat[i];
    const Term& a = act[i];
    if (p.kind == Term::Kind::token) {
      if (a.kind != Term::Kind::token || !(p.tok == a.tok)) return false;
      continue;
    }
    if (p.kind == Term::Kind::var && p.sort == MetaSort::identifier) {
      if (a.kind != Term::Kind::token || a.tok.kind != TokKind::identifier) return false;
      auto [it, inserted] = bindings.emplace("i:" + p.tok.text, a.tok.text);
      if (!inserted && it->second != a.tok.text) return false;
      continue;
    }
    if (p.kind == Term::Kind::var && p.sort == MetaSort::expression) {
      // An expression metavariable binds one whole balanced group.
      if (a.kind != Term::Kind::group) return false;
      const std::string value = term_key(a);
      auto [it, inserted] = bindings.emplace("e:" + p.tok.text, value);
      if (!inserted && it->second != value) return false;
      continue;
    }
    if (p.kind == Term::Kind::group) {
      if (a.kind != Term::Kind::group) return false;
      if (!match_seq(p.children, a.children, bindings)) return false;
      continue;
    }
    return false;
  }
  return true;
}

}  // namespace

bool matches(const FixTemplate& t, const FixAction& a) {
  if (t.kind != a.kind) return false;
  std::map<std::string, std::string> bindings;
  return match_seq(pattern_to_terms(t.pattern, t.metavars), tokens_to_terms(a.tokens), bindings);
}

std::vector<FixTemplate> cluster_and_rank(const std::vector<FixAction>& actions) {
  std::vector<FixTemplate> clusters;
  for (const FixAction& a : actions) {
    bool placed = false;
    for (FixTemplate& c : clusters) {
      if (std::optional<FixTemplate> folded = anti_unify_template(c, a)) {
        c = std::move(*folded);
        placed = true;
        break;
      }
    }
    if (placed) continue;
    FixTemplate t;
    t.kind = a.kind;
    t.pattern.reserve(a.tokens.size());
    for (const CodeToken& tok : a.tokens) t.pattern.emplace_back(tok);
    add_instance(t, a.source);
    clusters.push_back(std::move(t));
  }
  std::sort(clusters.begin(), clusters.end(), [](const FixTemplate& a, const FixTemplate& b) {
    if (a.support != b.support) return a.support > b.support;
    const std::string ta = pattern_text(a);
    const std::string tb = pattern_text(b);
    if (ta != tb) return ta < tb;
    return a.kind < b.kind;
  });
  return clusters;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

struct DisplayToken {
  std::string text;
  bool word = false;    // identifier / keyword / literal / metavar
  bool unary = false;   // prefix operator: glue to the operand
  bool keyword = false;
};

std::vector<DisplayToken> display_tokens(const FixTemplate& t) {
  std::vector<DisplayToken> ds;
  ds.reserve(t.pattern.size());
  for (const PatternElem& e : t.pattern) {
    DisplayToken d;
    if (const CodeToken* tok = std::get_if<CodeToken>(&e)) {
      d.text = tok->text;
      d.word = tok->kind != TokKind::punct;
      d.keyword = tok->kind == TokKind::keyword;
    } else {
      d.text = std::get<MetaVar>(e).name;
      d.word = true;
    }
    if (!d.word && (d.text == "-" || d.text == "+" || d.text == "&" || d.text == "*")) {
      const DisplayToken* prev = ds.empty() ? nullptr : &ds.back();
      d.unary = prev == nullptr || prev->text == "return" ||
                (!prev->word && prev->text != ")" && prev->text != "]");
    }
    if (d.text == "!" || d.text == "~") d.unary = true;
    ds.push_back(std::move(d));
  }
  return ds;
}

bool needs_space(const DisplayToken& prev, const DisplayToken& cur) {
  if (cur.text == ";" || cur.text == "," || cur.text == ")" || cur.text == "]" ||
      cur.text == "[") {
    return false;  // array subscripts bind tight: a[i], not a [i]
  }
  if (prev.text == "(" || prev.text == "[") return false;
  if (prev.unary) return false;
  if (prev.text == "." || prev.text == "->" || cur.text == "." || cur.text == "->") return false;
  if (cur.text == "(") {
    // Control keywords space their parenthesis; calls and sizeof bind tight.
    return prev.keyword && prev.text != "sizeof";
  }
  return true;
}

std::string join_range(const std::vector<DisplayToken>& ds, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin && needs_space(ds[i - 1], ds[i])) out += ' ';
    out += ds[i].text;
  }
  return out;
}

// Index just past the closing parenthesis of a leading control-flow head
// (`if (...)`, `while (...)`, ...), or 0 when the pattern has no such head.
std::size_t control_head_end(const std::vector<DisplayToken>& ds) {
  if (ds.size() < 2 || !ds[0].keyword || ds[1].text != "(") return 0;
  if (ds[0].text != "if" && ds[0].text != "while" && ds[0].text != "for" && ds[0].text != "switch") {
    return 0;
  }
  int depth = 0;
  for (std::size_t i = 1; i < ds.size(); ++i) {
    if (ds[i].text == "(") ++depth;
    if (ds[i].text == ")" && --depth == 0) return i + 1;
  }
  return 0;
}

}  // namespace

std::string pattern_text(const FixTemplate& t) {
  const std::vector<DisplayToken> ds = display_tokens(t);
  return join_range(ds, 0, ds.size());
}

std::string render_template(const FixTemplate& t) {
  std::string header = "@@ ";
  for (const MetaVar& v : t.metavars) {
    header += v.sort == MetaSort::identifier ? "identifier " : "expression ";
    header += v.name;
    header += "; ";
  }
  header += "@@";

  const std::vector<DisplayToken> ds = display_tokens(t);
  const std::string prefix = t.kind == ActionKind::add ? "+ " : "- ";
  std::vector<std::string> body;
  const std::size_t head = control_head_end(ds);
  if (head != 0 && head < ds.size()) {
    body.push_back(prefix + join_range(ds, 0, head));
    body.push_back(prefix + "\t" + join_range(ds, head, ds.size()));
  } else {
    body.push_back(prefix + join_range(ds, 0, ds.size()));
  }

  std::string out = header;
  for (const std::string& line : body) {
    out += '\n';
    out += line;
  }
  return out;
}

}  // namespace fixrec::patchlang
