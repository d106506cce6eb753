#include "fixrec/corpus.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "fixrec/error.hpp"

namespace fixrec::corpus {
namespace {

using nlohmann::json;

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(source + ":" + std::to_string(line) + ": " + what);
}

json parse_json_line(const std::string& text, const std::string& source, std::size_t line) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail_at(source, line, "malformed JSON");
  if (!j.is_object()) fail_at(source, line, "expected a JSON object");
  return j;
}

std::string require_string(const json& j, const char* key, const std::string& source,
                           std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) fail_at(source, line, std::string("missing field '") + key + "'");
  if (!it->is_string()) fail_at(source, line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key,
                                           const std::string& source, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail_at(source, line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

BugReport report_from_json(const json& j, const std::string& source, std::size_t line) {
  BugReport r;
  r.id = require_string(j, "id", source, line);
  if (r.id.empty()) fail_at(source, line, "report id must be nonempty");
  r.short_desc = require_string(j, "short_desc", source, line);
  if (trimmed(r.short_desc).empty()) fail_at(source, line, "short_desc of report '" + r.id +
                                                               "' is empty after trimming");
  r.long_desc = optional_string(j, "long_desc", source, line).value_or("");
  r.label = optional_string(j, "label", source, line);
  r.created_at = optional_string(j, "created_at", source, line);
  return r;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

bool is_valid_commit_hash(std::string_view hash) {
  if (hash.size() < 7 || hash.size() > 40) return false;
  for (char c : hash) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

std::vector<BugReport> parse_reports_jsonl(std::istream& in, const std::string& source_name) {
  std::vector<BugReport> reports;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trimmed(line).empty()) continue;
    json j = parse_json_line(line, source_name, lineno);
    BugReport r = report_from_json(j, source_name, lineno);
    if (!seen.insert(r.id).second) {
      fail_at(source_name, lineno, "duplicate report id '" + r.id + "'");
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<BugReport> ingest_reports(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  return parse_reports_jsonl(in, path.string());
}

BugReport parse_report_json(const std::string& text, const std::string& source_name) {
  json j = parse_json_line(text, source_name, 1);
  return report_from_json(j, source_name, 1);
}

std::vector<Commit> ingest_gitlog(std::istream& in) {
  std::vector<Commit> commits;
  std::string line;
  std::size_t lineno = 0;
  bool in_diff = false;
  std::vector<std::string> message_lines;
  std::string diff_text;

  auto flush_message = [&](Commit& c) {
    std::string msg;
    for (std::size_t i = 0; i < message_lines.size(); ++i) {
      if (i != 0) msg += '\n';
      msg += message_lines[i];
    }
    c.message = std::move(msg);
    message_lines.clear();
  };
  auto finish = [&] {
    if (commits.empty()) return;
    Commit& c = commits.back();
    flush_message(c);
    c.diff_text = std::move(diff_text);
    diff_text.clear();
    in_diff = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("commit ", 0) == 0) {
      std::string rest = line.substr(7);
      std::string hash = rest.substr(0, rest.find_first_of(" \t"));
      if (!is_valid_commit_hash(hash)) {
        throw Error("gitlog:" + std::to_string(lineno) + ": invalid commit hash '" + hash + "'");
      }
      finish();
      commits.push_back(Commit{hash, "", ""});
      continue;
    }
    if (commits.empty()) {
      if (trimmed(line).empty()) continue;
      throw Error("gitlog:" + std::to_string(lineno) +
                  ": expected a 'commit <hash>' record header");
    }
    if (in_diff) {
      diff_text += line;
      diff_text += '\n';
      continue;
    }
    if (line.rfind("diff --git", 0) == 0) {
      in_diff = true;
      diff_text += line;
      diff_text += '\n';
      continue;
    }
    if (line.rfind("    ", 0) == 0) {
      message_lines.push_back(line.substr(4));
      continue;
    }
    // Header noise (Author:, Date:, Merge:, blank separators, signature
    // output) carries no information the pipeline uses; skip it.
  }
  finish();
  return commits;
}

std::vector<Commit> ingest_gitlog_file(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  return ingest_gitlog(in);
}

std::vector<Commit> parse_commits_jsonl(std::istream& in, const std::string& source_name) {
  std::vector<Commit> commits;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trimmed(line).empty()) continue;
    json j = parse_json_line(line, source_name, lineno);
    Commit c;
    c.hash = require_string(j, "hash", source_name, lineno);
    if (!is_valid_commit_hash(c.hash)) {
      fail_at(source_name, lineno, "invalid commit hash '" + c.hash + "'");
    }
    c.message = require_string(j, "message", source_name, lineno);
    c.diff_text = optional_string(j, "diff_text", source_name, lineno).value_or("");
    commits.push_back(std::move(c));
  }
  return commits;
}

std::vector<Commit> ingest_commits_jsonl(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  return parse_commits_jsonl(in, path.string());
}

}  // namespace fixrec::corpus
