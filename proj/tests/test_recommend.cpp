#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "fixrec/bundle.hpp"
#include "fixrec/error.hpp"
#include "fixrec/recommend.hpp"
#include "fixrec/textprep.hpp"
#include "fixrec/topics.hpp"

using namespace fixrec;

namespace {

std::string check_patch(const std::string& ident) {
  return "--- a/drivers/x.c\n"
         "+++ b/drivers/x.c\n"
         "@@ -10,2 +10,3 @@\n"
         " \tctx();\n"
         "+\tif (!" +
         ident +
         ") return -ENOMEM;\n"
         " \tmore();\n";
}

// Eight historical reports over two disjoint themes; reports 1/2 share one
// document so their similarities tie, 3 leans memory with a pinch of paging.
// Bugs 1, 2, 3 (memory side) and 5 (paging side) carry links.
corpus::ModelBundle make_bundle() {
  corpus::ModelBundle bundle;
  bundle.rng_seed = 42;

  const std::vector<textprep::TokenSeq> docs = {
      {"kmalloc", "alloc", "null", "pointer", "kmalloc", "alloc"},          // 1
      {"kmalloc", "alloc", "null", "pointer", "kmalloc", "alloc"},          // 2 (== 1)
      {"kmalloc", "alloc", "null", "page"},                                 // 3
      {"alloc", "null", "pointer", "kmalloc", "null", "null"},              // 4
      {"page", "fault", "mmu", "tlb", "page", "fault"},                     // 5
      {"fault", "page", "tlb", "mmu", "tlb"},                               // 6
      {"page", "mmu", "fault", "tlb", "fault", "page"},                     // 7
      {"tlb", "page", "fault", "mmu", "page"},                              // 8
  };
  topics::LdaConfig cfg;
  cfg.num_topics = 2;
  cfg.alpha = 0.5;
  cfg.iterations = 120;
  cfg.seed = 42;
  bundle.topic_model = topics::train_lda(docs, cfg);

  const std::vector<std::string> labels = {"mem", "mem", "", "", "page", "page", "", ""};
  for (std::size_t i = 0; i < docs.size(); ++i) {
    corpus::BugReport r;
    r.id = std::to_string(i + 1);
    std::string desc;
    for (const auto& tok : docs[i]) desc += tok + " ";
    r.short_desc = desc;
    if (!labels[i].empty()) r.label = labels[i];
    bundle.reports.push_back(std::move(r));
  }

  std::vector<classify::FeatureVector> xs;
  std::vector<std::string> ys;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].empty()) continue;
    xs.push_back(bundle.topic_model.thetas[i]);
    ys.push_back(labels[i]);
  }
  bundle.classifier = classify::train_svm(xs, ys, classify::SvmHyper{}, 42);

  bundle.commits = {
      corpus::Commit{"aaaaaa1", "fix a", check_patch("a")},
      corpus::Commit{"bbbbbb2", "fix b", check_patch("b")},
      corpus::Commit{"cccccc3", "fix c",
                     "--- a/mm/f.c\n+++ b/mm/f.c\n@@ -5,1 +5,2 @@\n \tenter();\n"
                     "+\tfault_guard(vma);\n"},
      corpus::Commit{"dddddd4", "fix d", check_patch("d")},
  };
  bundle.links = {
      {"1", "aaaaaa1", "bug-ref", "Bug #1"},
      {"2", "bbbbbb2", "bug-ref", "Bug #2"},
      {"3", "dddddd4", "bug-ref", "Bug #3"},
      {"5", "cccccc3", "bug-ref", "Bug #5"},
  };
  return bundle;
}

corpus::BugReport memory_report() {
  corpus::BugReport r;
  r.id = "900";
  r.short_desc = "kmalloc alloc null pointer kmalloc alloc";
  return r;
}

}  // namespace

TEST_CASE("cosine similarity values and contracts") {
  const std::vector<double> ex = {1.0, 0.0};
  const std::vector<double> ey = {0.0, 1.0};
  const std::vector<double> mid = {0.5, 0.5};
  CHECK(recommend::similarity(ex, ex) == doctest::Approx(1.0));
  CHECK(recommend::similarity(ex, ey) == doctest::Approx(0.0));
  CHECK(std::abs(recommend::similarity(mid, ex) - 0.7071) < 1e-4);
  CHECK(recommend::similarity(std::vector<double>{0.0, 0.0}, ex) == 0.0);
  CHECK(recommend::similarity(std::vector<double>{}, std::vector<double>{}) == 0.0);
  CHECK_THROWS_WITH_AS(recommend::similarity(ex, std::vector<double>{1.0, 2.0, 3.0}),
                       "similarity: dimension mismatch (2 vs 3)", Error);
}

TEST_CASE("find_neighbors: linked-only, category gate, ties, truncation") {
  const auto bundle = make_bundle();
  const auto theta = topics::infer_theta(bundle.topic_model,
                                         textprep::preprocess(memory_report()), 100, 42);

  // Ungated: every linked report qualifies; 4 and 6-8 have no links.
  const auto all = recommend::find_neighbors(bundle, theta, "", 99);
  REQUIRE(all.size() == 4);
  for (const auto& nb : all) {
    CHECK((nb.bug_id == "1" || nb.bug_id == "2" || nb.bug_id == "3" || nb.bug_id == "5"));
  }
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i - 1].similarity >= all[i].similarity);
  }
  // Reports 1 and 2 share a document: identical similarity, id breaks the tie.
  CHECK(all[0].bug_id == "1");
  CHECK(all[1].bug_id == "2");
  CHECK(all[0].similarity == all[1].similarity);

  // Gated on "mem": the linked paging report 5 (curated label) drops out;
  // report 3 is unlabeled and enters through its predicted category.
  const auto mem = recommend::find_neighbors(bundle, theta, "mem", 99);
  REQUIRE(mem.size() == 3);
  CHECK(mem[0].bug_id == "1");
  CHECK(mem[1].bug_id == "2");
  CHECK(mem[2].bug_id == "3");

  CHECK(recommend::find_neighbors(bundle, theta, "", 2).size() == 2);
  CHECK(recommend::find_neighbors(bundle, theta, "", 0).empty());
  CHECK(recommend::find_neighbors(bundle, theta, "no-such-category", 99).empty());

  corpus::ModelBundle broken = bundle;
  broken.topic_model.thetas.pop_back();
  CHECK_THROWS_WITH_AS(recommend::find_neighbors(broken, theta, "", 5),
                       "bundle is inconsistent: 8 reports but 7 topic-proportion rows", Error);
}

TEST_CASE("recommend_top_k: gated recommendation with score and provenance") {
  const auto bundle = make_bundle();
  recommend::RecommendOptions opts;
  const auto rec = recommend::recommend_top_k(bundle, memory_report(), opts);

  CHECK(rec.report_id == "900");
  CHECK(rec.category == "mem");
  REQUIRE(rec.neighbors.size() == 3);
  CHECK(rec.neighbors[0].bug_id == "1");
  CHECK(rec.neighbors[1].bug_id == "2");
  CHECK(rec.neighbors[2].bug_id == "3");

  // All three memory fixes are the same shape, so exactly one hint exists;
  // its score is the sum of every neighbor similarity because each neighbor
  // contributed an instance.
  REQUIRE(rec.hints.size() == 1);
  const auto& hint = rec.hints[0];
  CHECK(patchlang::pattern_text(hint.tmpl) == "if (!X0) return -ENOMEM;");
  CHECK(hint.tmpl.support == 3);
  double sim_sum = 0.0;
  for (const auto& nb : rec.neighbors) sim_sum += nb.similarity;
  CHECK(hint.score == doctest::Approx(sim_sum));
  CHECK(hint.provenance ==
        std::vector<std::pair<std::string, std::string>>{
            {"1", "aaaaaa1"}, {"2", "bbbbbb2"}, {"3", "dddddd4"}});
  CHECK(rec.diagnostics.empty());
}

TEST_CASE("recommend_top_k: gate off widens neighbors and hints stay score-sorted") {
  const auto bundle = make_bundle();
  recommend::RecommendOptions opts;
  opts.gate_by_category = false;
  const auto rec = recommend::recommend_top_k(bundle, memory_report(), opts);

  REQUIRE(rec.neighbors.size() == 4);
  REQUIRE(rec.hints.size() == 2);
  for (std::size_t i = 1; i < rec.hints.size(); ++i) {
    CHECK(rec.hints[i - 1].score >= rec.hints[i].score);
  }
  CHECK(patchlang::pattern_text(rec.hints[0].tmpl) == "if (!X0) return -ENOMEM;");
  CHECK(patchlang::pattern_text(rec.hints[1].tmpl) == "fault_guard(vma);");
  CHECK(rec.hints[1].provenance ==
        std::vector<std::pair<std::string, std::string>>{{"5", "cccccc3"}});

  // Every provenance pair is backed by a sliceable instance that still
  // matches the hint's template.
  for (const auto& hint : rec.hints) {
    for (const auto& [bug, hash] : hint.provenance) {
      const auto it = std::find_if(bundle.commits.begin(), bundle.commits.end(),
                                   [&](const corpus::Commit& c) { return c.hash == hash; });
      REQUIRE(it != bundle.commits.end());
      bool any = false;
      for (const auto& action : patchlang::slice_commit(*it)) {
        if (patchlang::matches(hint.tmpl, action)) any = true;
      }
      CHECK(any);
    }
  }

  // k truncates after sorting.
  opts.k = 1;
  const auto one = recommend::recommend_top_k(bundle, memory_report(), opts);
  REQUIRE(one.hints.size() == 1);
  CHECK(patchlang::pattern_text(one.hints[0].tmpl) == "if (!X0) return -ENOMEM;");

  // n_neighbors truncates the neighbor list before gathering.
  opts.k = 5;
  opts.n_neighbors = 2;
  const auto two = recommend::recommend_top_k(bundle, memory_report(), opts);
  CHECK(two.neighbors.size() == 2);
}

TEST_CASE("recommend_top_k is deterministic") {
  const auto bundle = make_bundle();
  recommend::RecommendOptions opts;
  const auto a = recommend::recommend_top_k(bundle, memory_report(), opts);
  const auto b = recommend::recommend_top_k(bundle, memory_report(), opts);
  CHECK(a.category == b.category);
  CHECK(a.neighbors == b.neighbors);
  CHECK(a.hints == b.hints);
  CHECK(a.diagnostics == b.diagnostics);
}

TEST_CASE("recommend_top_k: degraded bundles report diagnostics instead of failing") {
  const auto bundle = make_bundle();
  recommend::RecommendOptions opts;

  // No classifier: gating is disabled with a diagnostic, category is empty.
  corpus::ModelBundle unclassified = bundle;
  unclassified.classifier = classify::LinearClassifier{};
  const auto rec = recommend::recommend_top_k(unclassified, memory_report(), opts);
  CHECK(rec.category.empty());
  REQUIRE(!rec.diagnostics.empty());
  CHECK(rec.diagnostics[0] == "bundle has no classifier; category gating disabled");
  CHECK(rec.neighbors.size() == 4);  // ungated
  CHECK(!rec.hints.empty());

  // No links at all: empty result plus two diagnostics.
  corpus::ModelBundle unlinked = bundle;
  unlinked.links.clear();
  const auto none = recommend::recommend_top_k(unlinked, memory_report(), opts);
  CHECK(none.neighbors.empty());
  CHECK(none.hints.empty());
  REQUIRE(none.diagnostics.size() == 2);
  CHECK(none.diagnostics[0] == "no linked neighbors found");
  CHECK(none.diagnostics[1] == "no fix actions recovered");

  // A link pointing at a commit the bundle does not carry is diagnosed.
  corpus::ModelBundle dangling = bundle;
  dangling.links.push_back({"1", "ffffff9", "bug-ref", "Bug #1"});
  std::sort(dangling.links.begin(), dangling.links.end(),
            [](const linker::BugLink& a, const linker::BugLink& b) {
              return std::tie(a.bug_id, a.commit_hash) < std::tie(b.bug_id, b.commit_hash);
            });
  const auto diag = recommend::recommend_top_k(dangling, memory_report(), opts);
  bool found = false;
  for (const auto& d : diag.diagnostics) {
    if (d == "link 1 -> ffffff9: commit not in bundle") found = true;
  }
  CHECK(found);
  CHECK(!diag.hints.empty());  // the resolvable links still produce hints

  // Empty diffs on every linked commit: neighbors exist, actions do not.
  corpus::ModelBundle empty_diffs = bundle;
  for (auto& c : empty_diffs.commits) c.diff_text.clear();
  const auto hollow = recommend::recommend_top_k(empty_diffs, memory_report(), opts);
  CHECK(!hollow.neighbors.empty());
  CHECK(hollow.hints.empty());
  REQUIRE(!hollow.diagnostics.empty());
  CHECK(hollow.diagnostics.back() == "no fix actions recovered");
}

TEST_CASE("recommend_top_k input validation") {
  const auto bundle = make_bundle();
  recommend::RecommendOptions opts;
  opts.k = 0;
  CHECK_THROWS_WITH_AS(recommend::recommend_top_k(bundle, memory_report(), opts),
                       "recommend: k must be >= 1", Error);
  opts.k = 5;
  CHECK_THROWS_WITH_AS(recommend::recommend_top_k(corpus::ModelBundle{}, memory_report(), opts),
                       "recommend: bundle has no trained topic model", Error);
}
