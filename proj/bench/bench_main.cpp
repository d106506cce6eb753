// Times each data-parallel kernel in serial (reference) and parallel mode
// on a synthetic corpus and verifies the outputs are bit-identical.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "fixrec/classify.hpp"
#include "fixrec/corpus.hpp"
#include "fixrec/linker.hpp"
#include "fixrec/parallel.hpp"
#include "fixrec/rng.hpp"
#include "fixrec/textprep.hpp"
#include "fixrec/topics.hpp"

namespace {

using fixrec::par::Exec;

constexpr const char* kWords[] = {
    "kernel",  "panic",   "driver",  "module",  "memory", "pointer", "buffer",  "overflow",
    "network", "packet",  "socket",  "timeout", "mutex",  "deadlock", "thread", "signal",
    "filesystem", "inode", "cache",  "scheduler", "interrupt", "device",  "probe", "register",
    "allocation", "fragmentation", "checksum", "header", "payload", "firmware", "regression",
    "watchdog",
};

std::vector<fixrec::corpus::BugReport> make_reports(std::size_t n) {
  fixrec::SplitMix64 rng(7);
  std::vector<fixrec::corpus::BugReport> reports(n);
  for (std::size_t i = 0; i < n; ++i) {
    reports[i].id = "B" + std::to_string(i);
    std::string desc;
    for (int w = 0; w < 24; ++w) {
      desc += kWords[rng.next_below(std::size(kWords))];
      desc += ' ';
    }
    reports[i].short_desc = desc;
  }
  return reports;
}

std::vector<fixrec::corpus::Commit> make_commits(std::size_t n) {
  fixrec::SplitMix64 rng(11);
  std::vector<fixrec::corpus::Commit> commits(n);
  for (std::size_t i = 0; i < n; ++i) {
    char hash[16];
    std::snprintf(hash, sizeof hash, "%010zx", i + 1);
    commits[i].hash = hash;
    commits[i].message = "fix " + std::string(kWords[rng.next_below(std::size(kWords))]) +
                         " handling\n\nBug # " + std::to_string(rng.next_below(500)) +
                         "\nSee bugzilla.example.org/show_bug.cgi?id=" +
                         std::to_string(rng.next_below(500)) + "\n";
  }
  return commits;
}

template <class F>
double time_ms(F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-28s %10.1f ms %10.1f ms %8.2fx  %s\n", name, serial_ms, parallel_ms,
              parallel_ms > 0 ? serial_ms / parallel_ms : 0.0, equal ? "identical" : "DIFFER");
}

}  // namespace

int main() {
  using namespace fixrec;

  const auto reports = make_reports(4000);
  const auto commits = make_commits(20000);

  std::printf("threads available: %d\n", par::max_threads());
  std::printf("%-28s %13s %13s %9s  %s\n", "kernel", "serial", "parallel", "speedup", "check");

  std::vector<textprep::TokenSeq> docs_s, docs_p;
  const double t1s = time_ms([&] { docs_s = textprep::preprocess_all(reports, Exec::serial); });
  const double t1p = time_ms([&] { docs_p = textprep::preprocess_all(reports, Exec::parallel); });
  row("preprocess_all", t1s, t1p, docs_s == docs_p);

  topics::LdaConfig cfg;
  cfg.num_topics = 8;
  cfg.iterations = 30;
  const topics::TopicModel model = topics::train_lda(docs_s, cfg);

  std::vector<std::vector<double>> th_s, th_p;
  const double t2s =
      time_ms([&] { th_s = topics::infer_theta_batch(model, docs_s, 50, 42, Exec::serial); });
  const double t2p =
      time_ms([&] { th_p = topics::infer_theta_batch(model, docs_p, 50, 42, Exec::parallel); });
  row("infer_theta_batch", t2s, t2p, th_s == th_p);

  double ll_s = 0, ll_p = 0;
  const double t3s =
      time_ms([&] { ll_s = topics::held_out_log_likelihood(model, docs_s, 50, Exec::serial); });
  const double t3p =
      time_ms([&] { ll_p = topics::held_out_log_likelihood(model, docs_p, 50, Exec::parallel); });
  row("held_out_log_likelihood", t3s, t3p, ll_s == ll_p);

  const auto patterns = linker::default_patterns();
  std::vector<linker::BugLink> links_s, links_p;
  const double t4s =
      time_ms([&] { links_s = linker::extract_links(commits, patterns, Exec::serial); });
  const double t4p =
      time_ms([&] { links_p = linker::extract_links(commits, patterns, Exec::parallel); });
  row("extract_links", t4s, t4p, links_s == links_p);

  return 0;
}
