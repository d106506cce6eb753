#include "fixrec/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "fixrec/error.hpp"
#include "fixrec/textprep.hpp"
#include "fixrec/topics.hpp"

namespace fixrec::recommend {

double similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("similarity: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

// The gating category of a historical report: its label when curated,
// otherwise the classifier's prediction; empty when neither exists.
std::string report_category(const corpus::ModelBundle& bundle, std::size_t index) {
  const corpus::BugReport& r = bundle.reports[index];
  if (r.label) return *r.label;
  if (bundle.classifier.labels.empty()) return {};
  return classify::predict(bundle.classifier, bundle.topic_model.thetas[index]).label;
}

}  // namespace

std::vector<Neighbor> find_neighbors(const corpus::ModelBundle& bundle,
                                     std::span<const double> new_theta,
                                     const std::string& category, int n) {
  if (bundle.reports.size() != bundle.topic_model.thetas.size()) {
    throw Error("bundle is inconsistent: " + std::to_string(bundle.reports.size()) +
                " reports but " + std::to_string(bundle.topic_model.thetas.size()) +
                " topic-proportion rows");
  }
  std::unordered_set<std::string> linked;
  for (const linker::BugLink& l : bundle.links) linked.insert(l.bug_id);

  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < bundle.reports.size(); ++i) {
    if (!linked.count(bundle.reports[i].id)) continue;  // nothing to recommend from
    if (!category.empty() && report_category(bundle, i) != category) continue;
    all.push_back({bundle.reports[i].id, similarity(new_theta, bundle.topic_model.thetas[i])});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.bug_id < b.bug_id;
  });
  if (n < 0) n = 0;
  if (static_cast<std::size_t>(n) < all.size()) all.resize(static_cast<std::size_t>(n));
  return all;
}

Recommendation recommend_top_k(const corpus::ModelBundle& bundle, const corpus::BugReport& report,
                               const RecommendOptions& options) {
  if (options.k < 1) throw Error("recommend: k must be >= 1");
  if (bundle.topic_model.num_topics <= 0 || bundle.topic_model.phi.empty()) {
    throw Error("recommend: bundle has no trained topic model");
  }

  Recommendation rec;
  rec.report_id = report.id;

  const textprep::TokenSeq doc = textprep::preprocess(report);
  const std::vector<double> theta =
      topics::infer_theta(bundle.topic_model, doc, options.fold_in_iterations, options.seed);

  if (bundle.classifier.labels.empty()) {
    rec.diagnostics.push_back("bundle has no classifier; category gating disabled");
  } else {
    rec.category = classify::predict(bundle.classifier, theta).label;
  }

  const bool gate = options.gate_by_category && !rec.category.empty();
  rec.neighbors = find_neighbors(bundle, theta, gate ? rec.category : std::string(),
                                 options.n_neighbors);
  if (rec.neighbors.empty()) {
    rec.diagnostics.push_back("no linked neighbors found");
    rec.diagnostics.push_back("no fix actions recovered");
    return rec;
  }

  // Fixing commits of each neighbor, in neighbor order; bundle.links is
  // sorted by (bug_id, commit_hash) so the gathering is deterministic.
  std::unordered_map<std::string, std::size_t> commit_index;
  for (std::size_t i = 0; i < bundle.commits.size(); ++i) {
    commit_index.emplace(bundle.commits[i].hash, i);
  }
  std::unordered_map<std::string, std::vector<std::string>> bugs_of_commit;
  std::unordered_map<std::string, std::unordered_set<std::string>> commits_of_bug;
  std::vector<std::size_t> gathered;  // distinct commit indices, neighbor order
  std::unordered_set<std::size_t> gathered_set;
  for (const Neighbor& nb : rec.neighbors) {
    for (const linker::BugLink& l : bundle.links) {
      if (l.bug_id != nb.bug_id) continue;
      auto it = commit_index.find(l.commit_hash);
      if (it == commit_index.end()) {
        rec.diagnostics.push_back("link " + l.bug_id + " -> " + l.commit_hash +
                                  ": commit not in bundle");
        continue;
      }
      bugs_of_commit[l.commit_hash].push_back(l.bug_id);
      commits_of_bug[l.bug_id].insert(l.commit_hash);
      if (gathered_set.insert(it->second).second) gathered.push_back(it->second);
    }
  }

  std::vector<patchlang::FixAction> actions;
  for (std::size_t ci : gathered) {
    const corpus::Commit& c = bundle.commits[ci];
    try {
      std::vector<patchlang::FixAction> sliced = patchlang::slice_commit(c);
      actions.insert(actions.end(), std::make_move_iterator(sliced.begin()),
                     std::make_move_iterator(sliced.end()));
    } catch (const Error& e) {
      rec.diagnostics.push_back("commit " + c.hash + ": " + e.what());
    }
  }
  if (actions.empty()) {
    rec.diagnostics.push_back("no fix actions recovered");
    return rec;
  }

  const std::vector<patchlang::FixTemplate> templates = patchlang::cluster_and_rank(actions);

  std::vector<Hint> hints;
  hints.reserve(templates.size());
  for (const patchlang::FixTemplate& t : templates) {
    std::unordered_set<std::string> template_commits;
    for (const patchlang::ActionSource& s : t.instances) template_commits.insert(s.commit_hash);

    Hint h;
    h.tmpl = t;
    for (const Neighbor& nb : rec.neighbors) {
      auto it = commits_of_bug.find(nb.bug_id);
      if (it == commits_of_bug.end()) continue;
      const bool contains = std::any_of(
          it->second.begin(), it->second.end(),
          [&](const std::string& hash) { return template_commits.count(hash) != 0; });
      if (contains) h.score += nb.similarity;
    }
    for (const std::string& hash : template_commits) {
      auto it = bugs_of_commit.find(hash);
      if (it == bugs_of_commit.end()) continue;
      for (const std::string& bug : it->second) h.provenance.emplace_back(bug, hash);
    }
    std::sort(h.provenance.begin(), h.provenance.end());
    h.provenance.erase(std::unique(h.provenance.begin(), h.provenance.end()),
                       h.provenance.end());
    hints.push_back(std::move(h));
  }

  std::vector<std::string> rendered(hints.size());
  for (std::size_t i = 0; i < hints.size(); ++i) {
    rendered[i] = patchlang::render_template(hints[i].tmpl);
  }
  std::vector<std::size_t> order(hints.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (hints[a].score != hints[b].score) return hints[a].score > hints[b].score;
    return rendered[a] < rendered[b];
  });
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(options.k), order.size());
  rec.hints.reserve(take);
  for (std::size_t i = 0; i < take; ++i) rec.hints.push_back(std::move(hints[order[i]]));
  return rec;
}

}  // namespace fixrec::recommend
