#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fixrec/classify.hpp"
#include "fixrec/corpus.hpp"
#include "fixrec/linker.hpp"
#include "fixrec/patchlang.hpp"
#include "fixrec/topics.hpp"

namespace fixrec::corpus {

inline constexpr int kBundleSchemaVersion = 1;

/// Self-contained trained state persisted between CLI stages: one JSON
/// document, floats in shortest round-trip decimal form. reports/commits
/// are retained so `recommend` can run from the bundle alone; thetas row d
/// of the topic model belongs to reports[d]. classifier may be empty
/// (no/too-few labels) — category gating then degrades gracefully.
struct ModelBundle {
  int schema_version = kBundleSchemaVersion;
  topics::TopicModel topic_model;  // owns the vocabulary
  classify::LinearClassifier classifier;
  std::vector<linker::BugLink> links;
  std::vector<patchlang::FixTemplate> templates;
  std::vector<BugReport> reports;
  std::vector<Commit> commits;
  std::uint64_t rng_seed = 0;

  bool operator==(const ModelBundle&) const = default;
};

/// Serialize to `path`. Key order and float formatting are deterministic:
/// equal bundles produce byte-identical files.
void save_bundle(const ModelBundle& bundle, const std::string& path);

std::string bundle_to_json(const ModelBundle& bundle);

/// Throws Error on I/O failure, corrupt JSON, or a schema_version other
/// than kBundleSchemaVersion (message names both versions).
ModelBundle load_bundle(const std::string& path);

ModelBundle bundle_from_json(const std::string& text, const std::string& source_name);

}  // namespace fixrec::corpus
