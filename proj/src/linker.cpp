#include "fixrec/linker.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <unordered_map>

#include "json.hpp"

#include "fixrec/error.hpp"

namespace fixrec::linker {
namespace {

std::regex compile_pattern(const LinkPattern& p) {
  try {
    std::regex re(p.regex, std::regex::ECMAScript);
    if (re.mark_count() != 1) {
      throw Error("pattern '" + p.name + "' must have exactly one capture group, has " +
                  std::to_string(re.mark_count()));
    }
    return re;
  } catch (const std::regex_error& e) {
    throw Error("pattern '" + p.name + "' does not compile: " + e.what());
  }
}

}  // namespace

std::vector<LinkPattern> default_patterns() {
  return {
      {"bug-ref", R"([Bb]ug\s*#\s*(\d+))"},
      {"bugzilla-url", R"(bugzilla\.[a-z.]+/show_bug\.cgi\?id=(\d+))"},
  };
}

void validate_patterns(const std::vector<LinkPattern>& patterns) {
  if (patterns.empty()) throw Error("pattern set is empty");
  for (const LinkPattern& p : patterns) compile_pattern(p);
}

std::vector<LinkPattern> load_patterns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<LinkPattern> patterns;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("name") || !j["name"].is_string() ||
        !j.contains("regex") || !j["regex"].is_string()) {
      throw Error(path + ":" + std::to_string(lineno) +
                  ": expected {\"name\": str, \"regex\": str}");
    }
    patterns.push_back({j["name"].get<std::string>(), j["regex"].get<std::string>()});
  }
  validate_patterns(patterns);
  return patterns;
}

std::vector<BugLink> extract_links(const std::vector<corpus::Commit>& commits,
                                   const std::vector<LinkPattern>& patterns, par::Exec mode) {
  validate_patterns(patterns);
  std::vector<std::regex> compiled;
  compiled.reserve(patterns.size());
  for (const LinkPattern& p : patterns) compiled.push_back(compile_pattern(p));

  std::vector<std::vector<BugLink>> per_commit(commits.size());
  par::for_each_index(commits.size(), mode, [&](std::size_t i) {
    const corpus::Commit& c = commits[i];
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      auto begin = std::sregex_iterator(c.message.begin(), c.message.end(), compiled[p]);
      for (auto it = begin; it != std::sregex_iterator(); ++it) {
        per_commit[i].push_back(BugLink{(*it)[1].str(), c.hash, patterns[p].name, (*it)[0].str()});
      }
    }
  });

  std::vector<BugLink> links;
  for (auto& chunk : per_commit) {
    links.insert(links.end(), std::make_move_iterator(chunk.begin()),
                 std::make_move_iterator(chunk.end()));
  }
  std::sort(links.begin(), links.end(), [](const BugLink& a, const BugLink& b) {
    return std::tie(a.bug_id, a.commit_hash, a.pattern_name, a.matched_text) <
           std::tie(b.bug_id, b.commit_hash, b.pattern_name, b.matched_text);
  });
  links.erase(std::unique(links.begin(), links.end(),
                          [](const BugLink& a, const BugLink& b) {
                            return a.bug_id == b.bug_id && a.commit_hash == b.commit_hash;
                          }),
              links.end());
  return links;
}

JoinResult join_links(const std::vector<BugLink>& links,
                      const std::vector<corpus::BugReport>& reports,
                      const std::vector<corpus::Commit>& commits) {
  std::unordered_map<std::string, std::size_t> report_of;
  for (std::size_t i = 0; i < reports.size(); ++i) report_of.emplace(reports[i].id, i);
  std::unordered_map<std::string, std::size_t> commit_of;
  for (std::size_t i = 0; i < commits.size(); ++i) commit_of.emplace(commits[i].hash, i);

  JoinResult result;
  for (const BugLink& link : links) {
    auto r = report_of.find(link.bug_id);
    auto c = commit_of.find(link.commit_hash);
    if (r != report_of.end() && c != commit_of.end()) {
      result.pairs.emplace_back(reports[r->second], commits[c->second]);
    } else {
      result.dangling.push_back(link);
    }
  }
  return result;
}

}  // namespace fixrec::linker
