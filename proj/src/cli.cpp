#include "fixrec/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "fixrec/bundle.hpp"
#include "fixrec/classify.hpp"
#include "fixrec/error.hpp"
#include "fixrec/linker.hpp"
#include "fixrec/patchlang.hpp"
#include "fixrec/recommend.hpp"
#include "fixrec/textprep.hpp"
#include "fixrec/topics.hpp"
#include "json.hpp"

namespace fixrec::cli {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json report_json(const corpus::BugReport& r) {
  ordered_json j;
  j["id"] = r.id;
  j["short_desc"] = r.short_desc;
  if (!r.long_desc.empty()) j["long_desc"] = r.long_desc;
  if (r.label) j["label"] = *r.label;
  if (r.created_at) j["created_at"] = *r.created_at;
  return j;
}

ordered_json commit_json(const corpus::Commit& c) {
  return ordered_json{{"hash", c.hash}, {"message", c.message}, {"diff_text", c.diff_text}};
}

ordered_json link_json(const linker::BugLink& l) {
  return ordered_json{{"bug_id", l.bug_id},
                      {"commit_hash", l.commit_hash},
                      {"pattern_name", l.pattern_name},
                      {"matched_text", l.matched_text}};
}

ordered_json template_json(const patchlang::FixTemplate& t) {
  ordered_json j;
  j["kind"] = t.kind == patchlang::ActionKind::add ? "add" : "remove";
  j["pattern"] = patchlang::pattern_text(t);
  ordered_json metavars = ordered_json::array();
  for (const patchlang::MetaVar& v : t.metavars) {
    metavars.push_back(ordered_json{
        {"name", v.name},
        {"sort", v.sort == patchlang::MetaSort::identifier ? "identifier" : "expression"}});
  }
  j["metavars"] = std::move(metavars);
  j["support"] = t.support;
  ordered_json instances = ordered_json::array();
  for (const patchlang::ActionSource& s : t.instances) {
    instances.push_back(
        ordered_json{{"commit_hash", s.commit_hash}, {"file", s.file}, {"line", s.line}});
  }
  j["instances"] = std::move(instances);
  j["smpl"] = patchlang::render_template(t);
  return j;
}

struct CommitSource {
  std::string gitlog;
  std::string commits;

  bool any() const { return !gitlog.empty() || !commits.empty(); }
  std::vector<corpus::Commit> load() const {
    if (!gitlog.empty()) return corpus::ingest_gitlog_file(gitlog);
    return corpus::ingest_commits_jsonl(commits);
  }
};

void add_commit_source(CLI::App* cmd, CommitSource& src, bool required) {
  auto* g = cmd->add_option("--gitlog", src.gitlog, "commit log with patches (git log -p format)");
  auto* c = cmd->add_option("--commits", src.commits, "commits as JSONL {hash, message, diff_text}");
  g->excludes(c);
  c->excludes(g);
  if (required) {
    // Enforced after parsing: CLI11 has no one-of-two-required primitive.
    cmd->callback([g, c]() {
      if (g->count() == 0 && c->count() == 0) {
        throw CLI::RequiredError("one of --gitlog / --commits");
      }
    });
  }
}

std::vector<linker::LinkPattern> load_pattern_option(const std::string& path) {
  return path.empty() ? linker::default_patterns() : linker::load_patterns(path);
}

// Distinct fixing commits of the join result, first-appearance order.
std::vector<corpus::Commit> joined_commits(const linker::JoinResult& join) {
  std::vector<corpus::Commit> out;
  for (const auto& [report, commit] : join.pairs) {
    const bool seen = std::any_of(out.begin(), out.end(),
                                  [&](const corpus::Commit& c) { return c.hash == commit.hash; });
    if (!seen) out.push_back(commit);
  }
  return out;
}

void report_dangling(const linker::JoinResult& join, std::ostream& err) {
  for (const linker::BugLink& l : join.dangling) {
    err << "dangling link: bug " << l.bug_id << " -> commit " << l.commit_hash
        << " (report or commit not in corpus)\n";
  }
}

struct LdaFlags {
  int topics = 10;
  double alpha = 0.0;
  double beta = 0.01;
  int iters = 1000;

  topics::LdaConfig config(std::uint64_t seed) const {
    topics::LdaConfig cfg;
    cfg.num_topics = topics;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.iterations = iters;
    cfg.seed = seed;
    return cfg;
  }
};

void add_lda_flags(CLI::App* cmd, LdaFlags& f) {
  cmd->add_option("--topics", f.topics, "number of LDA topics")->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Dirichlet alpha (<= 0 selects 50/K)");
  cmd->add_option("--beta", f.beta, "Dirichlet beta")->capture_default_str();
  cmd->add_option("--iters", f.iters, "Gibbs sweeps")->capture_default_str();
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int cmd_ingest_reports(const std::string& input, std::ostream& out, std::ostream& err) {
  const std::vector<corpus::BugReport> reports = corpus::ingest_reports(input);
  for (const corpus::BugReport& r : reports) out << report_json(r).dump() << '\n';
  err << "ingested " << reports.size() << " reports from " << input << '\n';
  return 0;
}

int cmd_ingest_commits(const CommitSource& src, std::ostream& out, std::ostream& err) {
  const std::vector<corpus::Commit> commits = src.load();
  std::size_t with_diff = 0;
  for (const corpus::Commit& c : commits) {
    if (!c.diff_text.empty()) ++with_diff;
    out << commit_json(c).dump() << '\n';
  }
  err << "ingested " << commits.size() << " commits (" << with_diff << " with diffs)\n";
  return 0;
}

struct TrainArgs {
  std::string reports_path;
  CommitSource commits;
  std::string patterns_path;
  std::string out_path;
  LdaFlags lda;
  double lambda = 0.01;
  int epochs = 200;
  std::uint64_t seed = 42;
  bool serial = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const par::Exec mode = a.serial ? par::Exec::serial : par::Exec::parallel;
  const std::vector<corpus::BugReport> reports = corpus::ingest_reports(a.reports_path);

  corpus::ModelBundle bundle;
  bundle.rng_seed = a.seed;
  bundle.reports = reports;

  const std::vector<textprep::TokenSeq> docs = textprep::preprocess_all(reports, mode);
  bundle.topic_model = topics::train_lda(docs, a.lda.config(a.seed));
  err << "trained LDA: " << bundle.topic_model.num_topics << " topics over "
      << bundle.topic_model.vocab.size() << " stems\n";

  std::vector<classify::FeatureVector> features;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!reports[i].label) continue;
    features.push_back(bundle.topic_model.thetas[i]);
    labels.push_back(*reports[i].label);
  }
  const std::size_t distinct =
      std::set<std::string>(labels.begin(), labels.end()).size();
  if (distinct >= 2) {
    bundle.classifier =
        classify::train_svm(features, labels, {a.lambda, a.epochs}, a.seed);
    err << "trained classifier on " << labels.size() << " labeled reports, " << distinct
        << " categories\n";
  } else {
    err << "classifier skipped: " << distinct << " labeled categor"
        << (distinct == 1 ? "y" : "ies") << " (need >= 2)\n";
  }

  if (a.commits.any()) {
    bundle.commits = a.commits.load();
    const std::vector<linker::LinkPattern> patterns = load_pattern_option(a.patterns_path);
    bundle.links = linker::extract_links(bundle.commits, patterns, mode);
    const linker::JoinResult join = linker::join_links(bundle.links, reports, bundle.commits);
    report_dangling(join, err);

    std::vector<std::string> slice_diagnostics;
    const std::vector<patchlang::FixAction> actions =
        patchlang::slice_commits(joined_commits(join), mode, &slice_diagnostics);
    for (const std::string& d : slice_diagnostics) err << "skipped: " << d << '\n';
    bundle.templates = patchlang::cluster_and_rank(actions);
    err << bundle.links.size() << " links, " << actions.size() << " fix actions, "
        << bundle.templates.size() << " templates\n";
  }

  corpus::save_bundle(bundle, a.out_path);
  err << "bundle written to " << a.out_path << '\n';

  ordered_json summary;
  summary["bundle"] = a.out_path;
  summary["reports"] = bundle.reports.size();
  summary["labeled"] = labels.size();
  summary["commits"] = bundle.commits.size();
  summary["vocabulary"] = bundle.topic_model.vocab.size();
  summary["topics"] = bundle.topic_model.num_topics;
  summary["classifier"] = !bundle.classifier.labels.empty();
  summary["links"] = bundle.links.size();
  summary["templates"] = bundle.templates.size();
  out << summary.dump() << '\n';
  return 0;
}

int cmd_topics_show(const std::string& bundle_path, int top, std::ostream& out,
                    std::ostream& err) {
  const corpus::ModelBundle bundle = corpus::load_bundle(bundle_path);
  const topics::TopicModel& model = bundle.topic_model;
  ordered_json j;
  j["num_topics"] = model.num_topics;
  ordered_json list = ordered_json::array();
  for (int t = 0; t < model.num_topics; ++t) {
    const auto words = topics::top_words(model, t, top);
    ordered_json jt;
    jt["topic"] = t;
    ordered_json jw = ordered_json::array();
    err << "topic " << std::setw(2) << t << ":";
    for (const auto& [word, prob] : words) {
      jw.push_back(ordered_json{{"word", word}, {"prob", prob}});
      err << ' ' << word;
    }
    err << '\n';
    jt["words"] = std::move(jw);
    list.push_back(std::move(jt));
  }
  j["topics"] = std::move(list);
  out << j.dump() << '\n';
  return 0;
}

int cmd_link(const CommitSource& src, const std::string& patterns_path,
             const std::string& reports_path, bool serial, std::ostream& out, std::ostream& err) {
  const par::Exec mode = serial ? par::Exec::serial : par::Exec::parallel;
  const std::vector<corpus::Commit> commits = src.load();
  const std::vector<linker::LinkPattern> patterns = load_pattern_option(patterns_path);
  const std::vector<linker::BugLink> links = linker::extract_links(commits, patterns, mode);
  for (const linker::BugLink& l : links) out << link_json(l).dump() << '\n';
  err << links.size() << " links from " << commits.size() << " commits\n";
  if (!reports_path.empty()) {
    const std::vector<corpus::BugReport> reports = corpus::ingest_reports(reports_path);
    const linker::JoinResult join = linker::join_links(links, reports, commits);
    report_dangling(join, err);
    err << join.pairs.size() << " joined pairs, " << join.dangling.size() << " dangling\n";
  }
  return 0;
}

struct SummarizeArgs {
  std::string reports_path;
  CommitSource commits;
  std::string patterns_path;
  std::string smpl_out;
  bool serial = false;
};

int cmd_summarize(const SummarizeArgs& a, std::ostream& out, std::ostream& err) {
  const par::Exec mode = a.serial ? par::Exec::serial : par::Exec::parallel;
  const std::vector<corpus::BugReport> reports = corpus::ingest_reports(a.reports_path);
  const std::vector<corpus::Commit> commits = a.commits.load();
  const std::vector<linker::LinkPattern> patterns = load_pattern_option(a.patterns_path);
  const std::vector<linker::BugLink> links = linker::extract_links(commits, patterns, mode);
  const linker::JoinResult join = linker::join_links(links, reports, commits);
  report_dangling(join, err);

  std::vector<std::string> slice_diagnostics;
  const std::vector<corpus::Commit> fixing = joined_commits(join);
  const std::vector<patchlang::FixAction> actions =
      patchlang::slice_commits(fixing, mode, &slice_diagnostics);
  for (const std::string& d : slice_diagnostics) err << "skipped: " << d << '\n';

  const std::vector<patchlang::FixTemplate> templates = patchlang::cluster_and_rank(actions);
  for (const patchlang::FixTemplate& t : templates) out << template_json(t).dump() << '\n';
  err << templates.size() << " templates from " << fixing.size() << " fixing commits ("
      << actions.size() << " fix actions)\n";

  if (!a.smpl_out.empty()) {
    std::filesystem::create_directories(a.smpl_out);
    for (std::size_t i = 0; i < templates.size(); ++i) {
      std::ostringstream name;
      name << "template_" << std::setfill('0') << std::setw(3) << i << ".cocci";
      const std::filesystem::path path = std::filesystem::path(a.smpl_out) / name.str();
      std::ofstream f(path, std::ios::binary);
      if (!f) throw Error(path.string() + ": cannot open for writing");
      f << patchlang::render_template(templates[i]) << '\n';
    }
    err << "wrote " << templates.size() << " SmPL files to " << a.smpl_out << '\n';
  }
  return 0;
}

struct EvaluateArgs {
  std::string reports_path;
  int folds = 10;
  LdaFlags lda;
  double lambda = 0.01;
  int epochs = 200;
  std::uint64_t seed = 42;
  bool serial = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const par::Exec mode = a.serial ? par::Exec::serial : par::Exec::parallel;
  const std::vector<corpus::BugReport> reports = corpus::ingest_reports(a.reports_path);
  const classify::EvalReport ev =
      classify::k_fold_cv(reports, a.lda.config(a.seed), {a.lambda, a.epochs}, a.folds, a.seed,
                          mode);

  ordered_json j;
  j["folds"] = ev.folds;
  j["labels"] = ev.labels;
  j["confusion"] = ev.confusion;
  j["precision"] = ev.precision;
  j["recall"] = ev.recall;
  j["macro_precision"] = ev.macro_precision;
  j["macro_recall"] = ev.macro_recall;
  j["pooled_precision"] = ev.pooled_precision;
  j["pooled_recall"] = ev.pooled_recall;
  j["accuracy"] = ev.accuracy;
  out << j.dump() << '\n';

  std::size_t width = 8;
  for (const std::string& l : ev.labels) width = std::max(width, l.size() + 2);
  err << std::left << std::setw(static_cast<int>(width)) << "label" << std::right
      << std::setw(10) << "precision" << std::setw(10) << "recall" << '\n';
  err << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < ev.labels.size(); ++i) {
    err << std::left << std::setw(static_cast<int>(width)) << ev.labels[i] << std::right
        << std::setw(10) << ev.precision[i] << std::setw(10) << ev.recall[i] << '\n';
  }
  err << std::left << std::setw(static_cast<int>(width)) << "macro" << std::right << std::setw(10)
      << ev.macro_precision << std::setw(10) << ev.macro_recall << '\n';
  err << std::left << std::setw(static_cast<int>(width)) << "pooled" << std::right << std::setw(10)
      << ev.pooled_precision << std::setw(10) << ev.pooled_recall << '\n';
  err << "accuracy " << ev.accuracy << " over " << ev.folds << " folds\n";
  err.unsetf(std::ios::floatfield);
  err << std::setprecision(6);
  return 0;
}

struct RecommendArgs {
  std::string bundle_path;
  std::string report_path;
  int top_k = 5;
  int n_neighbors = 20;
  bool no_gate = false;
  int fold_in = topics::kDefaultFoldInIterations;
  std::uint64_t seed = 42;
};

int cmd_recommend(const RecommendArgs& a, std::ostream& out, std::ostream& err) {
  const corpus::ModelBundle bundle = corpus::load_bundle(a.bundle_path);
  std::ifstream in(a.report_path, std::ios::binary);
  if (!in) throw Error(a.report_path + ": cannot open report");
  std::ostringstream buf;
  buf << in.rdbuf();
  const corpus::BugReport report = corpus::parse_report_json(buf.str(), a.report_path);

  recommend::RecommendOptions options;
  options.k = a.top_k;
  options.n_neighbors = a.n_neighbors;
  options.gate_by_category = !a.no_gate;
  options.fold_in_iterations = a.fold_in;
  options.seed = a.seed;
  const recommend::Recommendation rec = recommend::recommend_top_k(bundle, report, options);

  for (const std::string& d : rec.diagnostics) err << d << '\n';

  ordered_json j;
  j["report_id"] = rec.report_id;
  j["category"] = rec.category;
  ordered_json neighbors = ordered_json::array();
  for (const recommend::Neighbor& n : rec.neighbors) {
    neighbors.push_back(ordered_json{{"bug_id", n.bug_id}, {"similarity", n.similarity}});
  }
  j["neighbors"] = std::move(neighbors);
  ordered_json hints = ordered_json::array();
  for (const recommend::Hint& h : rec.hints) {
    ordered_json jh = template_json(h.tmpl);
    jh["score"] = h.score;
    ordered_json prov = ordered_json::array();
    for (const auto& [bug, hash] : h.provenance) {
      prov.push_back(ordered_json{{"bug_id", bug}, {"commit_hash", hash}});
    }
    jh["provenance"] = std::move(prov);
    hints.push_back(std::move(jh));
  }
  j["hints"] = std::move(hints);
  out << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mine bug-fix hints from a tracker + commit history"};
  app.name("fixrec");
  app.require_subcommand(1);

  std::string ir_input;
  CLI::App* ingest_reports = app.add_subcommand("ingest-reports", "parse and echo a report JSONL");
  ingest_reports->add_option("--input", ir_input, "reports JSONL file")->required();

  CommitSource ic_src;
  CLI::App* ingest_commits =
      app.add_subcommand("ingest-commits", "parse and echo a commit log as JSONL");
  add_commit_source(ingest_commits, ic_src, /*required=*/true);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train topics + classifier, harvest links and "
                                                "templates, write a bundle");
  train->add_option("--reports", train_args.reports_path, "reports JSONL file")->required();
  add_commit_source(train, train_args.commits, /*required=*/false);
  train->add_option("--patterns", train_args.patterns_path, "link patterns JSONL (default: built-in)");
  add_lda_flags(train, train_args.lda);
  train->add_option("--lambda", train_args.lambda, "SVM L2 strength")->capture_default_str();
  train->add_option("--epochs", train_args.epochs, "SVM epochs")->capture_default_str();
  train->add_option("--seed", train_args.seed, "PRNG seed")->capture_default_str();
  train->add_flag("--serial", train_args.serial, "run parallel kernels serially");
  train->add_option("--out", train_args.out_path, "bundle output path")->required();

  std::string ts_bundle;
  int ts_top = 6;
  CLI::App* topics_cmd = app.add_subcommand("topics", "topic model inspection");
  topics_cmd->require_subcommand(1);
  CLI::App* topics_show = topics_cmd->add_subcommand("show", "print per-topic top words");
  topics_show->add_option("--bundle", ts_bundle, "trained bundle")->required();
  topics_show->add_option("--top", ts_top, "words per topic")->capture_default_str();

  CommitSource link_src;
  std::string link_patterns, link_reports;
  bool link_serial = false;
  CLI::App* link = app.add_subcommand("link", "extract bug ids from commit messages");
  add_commit_source(link, link_src, /*required=*/true);
  link->add_option("--patterns", link_patterns, "link patterns JSONL (default: built-in)");
  link->add_option("--reports", link_reports, "reports JSONL; join + report dangling links");
  link->add_flag("--serial", link_serial, "run parallel kernels serially");

  SummarizeArgs sum_args;
  CLI::App* summarize =
      app.add_subcommand("summarize", "cluster linked fix actions into templates");
  summarize->add_option("--reports", sum_args.reports_path, "reports JSONL file")->required();
  add_commit_source(summarize, sum_args.commits, /*required=*/true);
  summarize->add_option("--patterns", sum_args.patterns_path,
                        "link patterns JSONL (default: built-in)");
  summarize->add_option("--smpl-out", sum_args.smpl_out, "directory for SmPL text files");
  summarize->add_flag("--serial", sum_args.serial, "run parallel kernels serially");

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "stratified k-fold CV of the classifier");
  evaluate->add_option("--reports", eval_args.reports_path, "labeled reports JSONL")->required();
  evaluate->add_option("--folds", eval_args.folds, "number of folds")->capture_default_str();
  add_lda_flags(evaluate, eval_args.lda);
  evaluate->add_option("--lambda", eval_args.lambda, "SVM L2 strength")->capture_default_str();
  evaluate->add_option("--epochs", eval_args.epochs, "SVM epochs")->capture_default_str();
  evaluate->add_option("--seed", eval_args.seed, "PRNG seed")->capture_default_str();
  evaluate->add_flag("--serial", eval_args.serial, "run parallel kernels serially");

  RecommendArgs rec_args;
  CLI::App* recommend = app.add_subcommand("recommend", "top-k fix hints for a new report");
  recommend->add_option("--bundle", rec_args.bundle_path, "trained bundle")->required();
  recommend->add_option("--report", rec_args.report_path, "new report (single JSON object)")
      ->required();
  recommend->add_option("--top-k", rec_args.top_k, "hints to emit")->capture_default_str();
  recommend->add_option("--n-neighbors", rec_args.n_neighbors, "similar reports to consult")
      ->capture_default_str();
  recommend->add_flag("--no-gate", rec_args.no_gate, "disable category gating");
  recommend->add_option("--fold-in", rec_args.fold_in, "fold-in Gibbs sweeps")
      ->capture_default_str();
  recommend->add_option("--seed", rec_args.seed, "PRNG seed")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("fixrec");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 1;
  }

  try {
    if (ingest_reports->parsed()) return cmd_ingest_reports(ir_input, out, err);
    if (ingest_commits->parsed()) return cmd_ingest_commits(ic_src, out, err);
    if (train->parsed()) return cmd_train(train_args, out, err);
    if (topics_cmd->parsed() && topics_show->parsed()) {
      return cmd_topics_show(ts_bundle, ts_top, out, err);
    }
    if (link->parsed()) {
      return cmd_link(link_src, link_patterns, link_reports, link_serial, out, err);
    }
    if (summarize->parsed()) return cmd_summarize(sum_args, out, err);
    if (evaluate->parsed()) return cmd_evaluate(eval_args, out, err);
    if (recommend->parsed()) return cmd_recommend(rec_args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  err << "error: no subcommand\n" << app.help();
  return 1;
}

}  // namespace fixrec::cli
