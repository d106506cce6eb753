#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fixrec/parallel.hpp"
#include "fixrec/textprep.hpp"

namespace fixrec::topics {

/// Dense stem <-> id bijection; ids are assigned in first-seen order.
struct Vocabulary {
  std::unordered_map<std::string, int> id_of;
  std::vector<std::string> word_of;

  int add(const std::string& stem);
  /// -1 when the stem is out of vocabulary.
  int lookup(std::string_view stem) const;
  int size() const { return static_cast<int>(word_of.size()); }

  bool operator==(const Vocabulary& other) const { return word_of == other.word_of; }
};

struct LdaConfig {
  int num_topics = 10;
  double alpha = 0.0;  // <= 0 means the 50/K heuristic
  double beta = 0.01;
  int iterations = 1000;
  std::uint64_t seed = 42;

  double resolved_alpha() const { return alpha > 0.0 ? alpha : 50.0 / num_topics; }
};

/// Trained LDA state. phi is K x V row-stochastic (topic-word), thetas is
/// D x K row-stochastic (training-document topic proportions), assignments
/// holds the final Gibbs topic of every training token. For every document
/// theta_dk == (n_dk + alpha) / (N_d + K*alpha) with n_dk recomputable from
/// assignments.
struct TopicModel {
  int num_topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  Vocabulary vocab;
  std::vector<std::vector<double>> phi;
  std::vector<std::vector<double>> thetas;
  std::vector<std::vector<int>> assignments;
  std::uint64_t seed = 0;

  bool operator==(const TopicModel&) const = default;
};

/// Collapsed Gibbs sampling for `iterations` full sweeps, single-threaded by
/// contract (fixed inputs + seed => bit-identical model). Documents may be
/// empty; at least one must not be. Throws on K < 2, iterations < 1, or an
/// all-empty corpus.
TopicModel train_lda(const std::vector<textprep::TokenSeq>& docs, const LdaConfig& cfg);

/// Fold-in: phi held fixed, only the new document's assignments are
/// resampled. Out-of-vocabulary tokens are skipped; an empty or all-OOV
/// document returns the uniform prior. Returns smoothed theta (sums to 1).
std::vector<double> infer_theta(const TopicModel& model, const textprep::TokenSeq& doc,
                                int fold_in_iterations, std::uint64_t seed);

/// Per-document fold-in with seeds derived as derive_seed(base_seed, i);
/// index-parallel, bit-identical across modes.
std::vector<std::vector<double>> infer_theta_batch(const TopicModel& model,
                                                   const std::vector<textprep::TokenSeq>& docs,
                                                   int fold_in_iterations, std::uint64_t base_seed,
                                                   par::Exec mode = par::Exec::parallel);

/// The n highest-probability stems of a topic, ties broken by ascending
/// word id. n larger than V returns all V entries. Throws on a bad topic id.
std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int topic_id,
                                                      int n);

/// Sum over docs of per-token log p(w | theta_d, phi) with theta_d obtained
/// by fold-in (seed derived from model.seed and the doc index). OOV tokens
/// are skipped; empty input gives 0.
double held_out_log_likelihood(const TopicModel& model, const std::vector<textprep::TokenSeq>& docs,
                               int fold_in_iterations = 100,
                               par::Exec mode = par::Exec::parallel);

constexpr int kDefaultFoldInIterations = 100;

}  // namespace fixrec::topics
