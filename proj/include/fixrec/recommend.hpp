#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fixrec/bundle.hpp"
#include "fixrec/corpus.hpp"
#include "fixrec/patchlang.hpp"

namespace fixrec::recommend {

/// Cosine similarity; in [0,1] for topic proportions (entries nonnegative).
/// Throws on dimension mismatch; a zero vector yields 0.
double similarity(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  std::string bug_id;
  double similarity = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct Hint {
  patchlang::FixTemplate tmpl;
  double score = 0.0;
  std::vector<std::pair<std::string, std::string>> provenance;  // (bug_id, commit_hash)

  bool operator==(const Hint&) const = default;
};

struct Recommendation {
  std::string report_id;
  std::string category;  // predicted label; empty when no classifier exists
  std::vector<Neighbor> neighbors;
  std::vector<Hint> hints;  // score desc, ties by rendered template text asc
  std::vector<std::string> diagnostics;
};

struct RecommendOptions {
  int k = 5;
  int n_neighbors = 20;
  bool gate_by_category = true;
  int fold_in_iterations = 100;
  std::uint64_t seed = 42;
};

/// Among past reports whose labeled-or-predicted category equals
/// `category` (no filter when category is empty) and that carry at least
/// one link, the n most similar by cosine over theta; ties by bug_id
/// ascending. May return fewer than n.
std::vector<Neighbor> find_neighbors(const corpus::ModelBundle& bundle,
                                     std::span<const double> new_theta,
                                     const std::string& category, int n);

/// preprocess -> fold-in theta -> predict category -> neighbors -> slice +
/// cluster the neighbors' fixing commits -> score(t) = sum of
/// similarity(new, r) over neighbors r whose fixes contain an instance of t
/// -> top-k. Deterministic under (bundle, report, options). Throws on an
/// untrained bundle or k < 1.
Recommendation recommend_top_k(const corpus::ModelBundle& bundle, const corpus::BugReport& report,
                               const RecommendOptions& options);

}  // namespace fixrec::recommend
