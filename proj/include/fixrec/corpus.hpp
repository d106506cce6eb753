#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fixrec::corpus {

/// One user-filed bug report. `label` is the fault-category name used for
/// supervised training; history mined from a tracker usually has it only on
/// a curated subset.
struct BugReport {
  std::string id;
  std::string short_desc;
  std::string long_desc;
  std::optional<std::string> label;
  std::optional<std::string> created_at;

  bool operator==(const BugReport&) const = default;
};

struct Commit {
  std::string hash;       // lowercase hex, 7-40 chars
  std::string message;    // de-indented log message
  std::string diff_text;  // unified diff, verbatim; may be empty

  bool operator==(const Commit&) const = default;
};

bool is_valid_commit_hash(std::string_view hash);

/// Reads one JSON object per line:
///   {"id": str, "short_desc": str, "long_desc"?: str, "label"?: str, "created_at"?: str}
/// Rejects duplicate ids and whitespace-only short descriptions; error
/// messages carry the 1-based line number.
std::vector<BugReport> ingest_reports(const std::filesystem::path& path);
std::vector<BugReport> parse_reports_jsonl(std::istream& in, const std::string& source_name);

/// Parses a single report object (the `recommend --report` input).
BugReport parse_report_json(const std::string& text, const std::string& source_name);

/// Parses patch-inclusive commit-log text: records begin with `commit <hex>`,
/// message lines are indented by four spaces, and diff text runs verbatim
/// from `diff --git` to the next record. Lines that are neither (Author:,
/// Date:, Merge:, signature output) are not interpreted.
std::vector<Commit> ingest_gitlog(std::istream& in);
std::vector<Commit> ingest_gitlog_file(const std::filesystem::path& path);

/// Alternative ingestion path: {"hash": str, "message": str, "diff_text"?: str} per line.
std::vector<Commit> parse_commits_jsonl(std::istream& in, const std::string& source_name);
std::vector<Commit> ingest_commits_jsonl(const std::filesystem::path& path);

}  // namespace fixrec::corpus
