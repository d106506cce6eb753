#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fixrec/corpus.hpp"
#include "fixrec/parallel.hpp"

namespace fixrec::linker {

/// A commit-message pattern whose single capture group yields the bug id.
struct LinkPattern {
  std::string name;
  std::string regex;

  bool operator==(const LinkPattern&) const = default;
};

struct BugLink {
  std::string bug_id;
  std::string commit_hash;
  std::string pattern_name;
  std::string matched_text;

  bool operator==(const BugLink&) const = default;
};

/// `bug-ref` ([Bb]ug #NNN) and `bugzilla-url` (show_bug.cgi?id=NNN).
std::vector<LinkPattern> default_patterns();

/// Validates that every regex compiles with exactly one capture group;
/// throws Error naming the offending pattern otherwise.
void validate_patterns(const std::vector<LinkPattern>& patterns);

/// Patterns file: JSONL of {"name": str, "regex": str}; validated on load.
std::vector<LinkPattern> load_patterns(const std::string& path);

/// Scans every commit message with every pattern; duplicate (bug_id, hash)
/// pairs collapse; output sorted by (bug_id, hash). Per-commit scanning is
/// pure, so the scan is index-parallel with a deterministic merge.
std::vector<BugLink> extract_links(const std::vector<corpus::Commit>& commits,
                                   const std::vector<LinkPattern>& patterns,
                                   par::Exec mode = par::Exec::parallel);

struct JoinResult {
  std::vector<std::pair<corpus::BugReport, corpus::Commit>> pairs;
  std::vector<BugLink> dangling;  // links whose report id or hash is unknown
};

/// Inner join on bug_id = report.id and commit_hash = commit.hash; dangling
/// links are reported, never dropped silently.
JoinResult join_links(const std::vector<BugLink>& links,
                      const std::vector<corpus::BugReport>& reports,
                      const std::vector<corpus::Commit>& commits);

}  // namespace fixrec::linker
