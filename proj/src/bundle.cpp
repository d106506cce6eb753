#include "fixrec/bundle.hpp"

#include <fstream>
#include <sstream>

#include "fixrec/error.hpp"
#include "json.hpp"

namespace fixrec::corpus {
namespace {

using ordered_json = nlohmann::ordered_json;

// --- serialization -----------------------------------------------------

std::string_view tok_kind_name(patchlang::TokKind k) {
  switch (k) {
    case patchlang::TokKind::identifier: return "identifier";
    case patchlang::TokKind::keyword: return "keyword";
    case patchlang::TokKind::literal: return "literal";
    case patchlang::TokKind::punct: return "punct";
  }
  return "identifier";
}

std::string_view sort_name(patchlang::MetaSort s) {
  return s == patchlang::MetaSort::identifier ? "identifier" : "expression";
}

ordered_json metavar_json(const patchlang::MetaVar& v) {
  return ordered_json{{"name", v.name}, {"sort", sort_name(v.sort)}};
}

ordered_json template_json(const patchlang::FixTemplate& t) {
  ordered_json j;
  j["kind"] = t.kind == patchlang::ActionKind::add ? "add" : "remove";
  ordered_json pattern = ordered_json::array();
  for (const patchlang::PatternElem& e : t.pattern) {
    if (const auto* tok = std::get_if<patchlang::CodeToken>(&e)) {
      pattern.push_back(
          ordered_json{{"token", {{"kind", tok_kind_name(tok->kind)}, {"text", tok->text}}}});
    } else {
      pattern.push_back(ordered_json{{"metavar", metavar_json(std::get<patchlang::MetaVar>(e))}});
    }
  }
  j["pattern"] = std::move(pattern);
  ordered_json metavars = ordered_json::array();
  for (const patchlang::MetaVar& v : t.metavars) metavars.push_back(metavar_json(v));
  j["metavars"] = std::move(metavars);
  j["support"] = t.support;
  ordered_json instances = ordered_json::array();
  for (const patchlang::ActionSource& s : t.instances) {
    instances.push_back(
        ordered_json{{"commit_hash", s.commit_hash}, {"file", s.file}, {"line", s.line}});
  }
  j["instances"] = std::move(instances);
  return j;
}

// --- deserialization helpers --------------------------------------------

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw Error(source + ": " + what);
}

const ordered_json& field(const ordered_json& j, const char* key, const std::string& source) {
  auto it = j.find(key);
  if (it == j.end()) fail(source, std::string("missing field '") + key + "'");
  return *it;
}

std::string str_field(const ordered_json& j, const char* key, const std::string& source) {
  const ordered_json& v = field(j, key, source);
  if (!v.is_string()) fail(source, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

patchlang::TokKind parse_tok_kind(const std::string& s, const std::string& source) {
  if (s == "identifier") return patchlang::TokKind::identifier;
  if (s == "keyword") return patchlang::TokKind::keyword;
  if (s == "literal") return patchlang::TokKind::literal;
  if (s == "punct") return patchlang::TokKind::punct;
  fail(source, "unknown token kind '" + s + "'");
}

patchlang::MetaSort parse_sort(const std::string& s, const std::string& source) {
  if (s == "identifier") return patchlang::MetaSort::identifier;
  if (s == "expression") return patchlang::MetaSort::expression;
  fail(source, "unknown metavariable sort '" + s + "'");
}

patchlang::MetaVar parse_metavar(const ordered_json& j, const std::string& source) {
  return {str_field(j, "name", source), parse_sort(str_field(j, "sort", source), source)};
}

patchlang::FixTemplate parse_template(const ordered_json& j, const std::string& source) {
  patchlang::FixTemplate t;
  const std::string kind = str_field(j, "kind", source);
  if (kind != "add" && kind != "remove") fail(source, "unknown action kind '" + kind + "'");
  t.kind = kind == "add" ? patchlang::ActionKind::add : patchlang::ActionKind::remove;
  for (const ordered_json& e : field(j, "pattern", source)) {
    if (e.contains("token")) {
      const ordered_json& tok = e["token"];
      t.pattern.emplace_back(patchlang::CodeToken{
          parse_tok_kind(str_field(tok, "kind", source), source), str_field(tok, "text", source)});
    } else if (e.contains("metavar")) {
      t.pattern.emplace_back(parse_metavar(e["metavar"], source));
    } else {
      fail(source, "pattern element is neither 'token' nor 'metavar'");
    }
  }
  for (const ordered_json& v : field(j, "metavars", source)) {
    t.metavars.push_back(parse_metavar(v, source));
  }
  t.support = field(j, "support", source).get<long>();
  for (const ordered_json& s : field(j, "instances", source)) {
    t.instances.push_back({str_field(s, "commit_hash", source), str_field(s, "file", source),
                           field(s, "line", source).get<long>()});
  }
  return t;
}

std::vector<std::vector<double>> matrix_field(const ordered_json& j, const char* key,
                                              const std::string& source) {
  const ordered_json& v = field(j, key, source);
  if (!v.is_array()) fail(source, std::string("field '") + key + "' must be an array");
  return v.get<std::vector<std::vector<double>>>();
}

}  // namespace

std::string bundle_to_json(const ModelBundle& bundle) {
  ordered_json j;
  j["schema_version"] = bundle.schema_version;
  j["rng_seed"] = bundle.rng_seed;

  const topics::TopicModel& tm = bundle.topic_model;
  ordered_json jt;
  jt["num_topics"] = tm.num_topics;
  jt["alpha"] = tm.alpha;
  jt["beta"] = tm.beta;
  jt["seed"] = tm.seed;
  jt["vocabulary"] = tm.vocab.word_of;
  jt["phi"] = tm.phi;
  jt["thetas"] = tm.thetas;
  jt["assignments"] = tm.assignments;
  j["topic_model"] = std::move(jt);

  if (bundle.classifier.labels.empty()) {
    j["classifier"] = nullptr;
  } else {
    ordered_json jc;
    jc["labels"] = bundle.classifier.labels;
    jc["weights"] = bundle.classifier.weights;
    jc["biases"] = bundle.classifier.biases;
    jc["lambda"] = bundle.classifier.hyper.lambda;
    jc["epochs"] = bundle.classifier.hyper.epochs;
    jc["seed"] = bundle.classifier.seed;
    j["classifier"] = std::move(jc);
  }

  ordered_json links = ordered_json::array();
  for (const linker::BugLink& l : bundle.links) {
    links.push_back(ordered_json{{"bug_id", l.bug_id},
                                 {"commit_hash", l.commit_hash},
                                 {"pattern_name", l.pattern_name},
                                 {"matched_text", l.matched_text}});
  }
  j["links"] = std::move(links);

  ordered_json templates = ordered_json::array();
  for (const patchlang::FixTemplate& t : bundle.templates) templates.push_back(template_json(t));
  j["templates"] = std::move(templates);

  ordered_json reports = ordered_json::array();
  for (const BugReport& r : bundle.reports) {
    ordered_json jr;
    jr["id"] = r.id;
    jr["short_desc"] = r.short_desc;
    jr["long_desc"] = r.long_desc;
    if (r.label) jr["label"] = *r.label;
    if (r.created_at) jr["created_at"] = *r.created_at;
    reports.push_back(std::move(jr));
  }
  j["reports"] = std::move(reports);

  ordered_json commits = ordered_json::array();
  for (const Commit& c : bundle.commits) {
    commits.push_back(
        ordered_json{{"hash", c.hash}, {"message", c.message}, {"diff_text", c.diff_text}});
  }
  j["commits"] = std::move(commits);

  return j.dump();
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open for writing");
  out << bundle_to_json(bundle) << '\n';
  if (!out) throw Error(path + ": write failed");
}

ModelBundle bundle_from_json(const std::string& text, const std::string& source_name) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(source_name, std::string("corrupt bundle JSON: ") + e.what());
  }
  if (!j.is_object()) fail(source_name, "bundle must be a JSON object");

  try {
    const int version = field(j, "schema_version", source_name).get<int>();
    if (version != kBundleSchemaVersion) {
      fail(source_name, "bundle schema version " + std::to_string(version) +
                            " is not supported (this build reads version " +
                            std::to_string(kBundleSchemaVersion) + ")");
    }

    ModelBundle b;
    b.schema_version = version;
    b.rng_seed = field(j, "rng_seed", source_name).get<std::uint64_t>();

    const ordered_json& jt = field(j, "topic_model", source_name);
    topics::TopicModel& tm = b.topic_model;
    tm.num_topics = field(jt, "num_topics", source_name).get<int>();
    tm.alpha = field(jt, "alpha", source_name).get<double>();
    tm.beta = field(jt, "beta", source_name).get<double>();
    tm.seed = field(jt, "seed", source_name).get<std::uint64_t>();
    tm.vocab.word_of = field(jt, "vocabulary", source_name).get<std::vector<std::string>>();
    for (std::size_t i = 0; i < tm.vocab.word_of.size(); ++i) {
      tm.vocab.id_of.emplace(tm.vocab.word_of[i], static_cast<int>(i));
    }
    tm.phi = matrix_field(jt, "phi", source_name);
    tm.thetas = matrix_field(jt, "thetas", source_name);
    tm.assignments = field(jt, "assignments", source_name).get<std::vector<std::vector<int>>>();

    const ordered_json& jc = field(j, "classifier", source_name);
    if (!jc.is_null()) {
      b.classifier.labels = field(jc, "labels", source_name).get<std::vector<std::string>>();
      b.classifier.weights = matrix_field(jc, "weights", source_name);
      b.classifier.biases = field(jc, "biases", source_name).get<std::vector<double>>();
      b.classifier.hyper.lambda = field(jc, "lambda", source_name).get<double>();
      b.classifier.hyper.epochs = field(jc, "epochs", source_name).get<int>();
      b.classifier.seed = field(jc, "seed", source_name).get<std::uint64_t>();
    }

    for (const ordered_json& l : field(j, "links", source_name)) {
      b.links.push_back({str_field(l, "bug_id", source_name),
                         str_field(l, "commit_hash", source_name),
                         str_field(l, "pattern_name", source_name),
                         str_field(l, "matched_text", source_name)});
    }
    for (const ordered_json& t : field(j, "templates", source_name)) {
      b.templates.push_back(parse_template(t, source_name));
    }
    for (const ordered_json& r : field(j, "reports", source_name)) {
      BugReport br;
      br.id = str_field(r, "id", source_name);
      br.short_desc = str_field(r, "short_desc", source_name);
      br.long_desc = str_field(r, "long_desc", source_name);
      if (r.contains("label")) br.label = str_field(r, "label", source_name);
      if (r.contains("created_at")) br.created_at = str_field(r, "created_at", source_name);
      b.reports.push_back(std::move(br));
    }
    for (const ordered_json& c : field(j, "commits", source_name)) {
      b.commits.push_back({str_field(c, "hash", source_name),
                           str_field(c, "message", source_name),
                           str_field(c, "diff_text", source_name)});
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    fail(source_name, std::string("corrupt bundle JSON: ") + e.what());
  }
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path + ": cannot open bundle");
  std::ostringstream buf;
  buf << in.rdbuf();
  return bundle_from_json(buf.str(), path);
}

}  // namespace fixrec::corpus
