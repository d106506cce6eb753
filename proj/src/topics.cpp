#include "fixrec/topics.hpp"

#include <algorithm>
#include <cmath>

#include "fixrec/error.hpp"
#include "fixrec/rng.hpp"

namespace fixrec::topics {
namespace {

void check_row_stochastic(const std::vector<double>& row, const char* what) {
  double sum = 0.0;
  for (double x : row) sum += x;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(std::string(what) + " row sums to " + std::to_string(sum) + ", expected 1");
  }
}

// Draws k with probability weight[k]/total by a linear cumulative scan.
int sample_index(const std::vector<double>& weight, double total, SplitMix64& rng) {
  double u = rng.next_double() * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < weight.size(); ++k) {
    cum += weight[k];
    if (u < cum) return static_cast<int>(k);
  }
  return static_cast<int>(weight.size()) - 1;
}

}  // namespace

int Vocabulary::add(const std::string& stem) {
  auto [it, inserted] = id_of.emplace(stem, static_cast<int>(word_of.size()));
  if (inserted) word_of.push_back(stem);
  return it->second;
}

int Vocabulary::lookup(std::string_view stem) const {
  auto it = id_of.find(std::string(stem));
  return it == id_of.end() ? -1 : it->second;
}

TopicModel train_lda(const std::vector<textprep::TokenSeq>& docs, const LdaConfig& cfg) {
  if (cfg.num_topics < 2) throw Error("train_lda: need at least 2 topics");
  if (cfg.iterations < 1) throw Error("train_lda: need at least 1 iteration");
  if (std::all_of(docs.begin(), docs.end(),
                  [](const textprep::TokenSeq& d) { return d.empty(); })) {
    throw Error("train_lda: every document is empty");
  }

  TopicModel model;
  model.num_topics = cfg.num_topics;
  model.alpha = cfg.resolved_alpha();
  model.beta = cfg.beta;
  model.seed = cfg.seed;

  const int K = model.num_topics;
  const std::size_t D = docs.size();
  std::vector<std::vector<int>> words(D);
  for (std::size_t d = 0; d < D; ++d) {
    words[d].reserve(docs[d].size());
    for (const std::string& tok : docs[d]) words[d].push_back(model.vocab.add(tok));
  }
  const int V = model.vocab.size();

  std::vector<std::vector<long>> n_dk(D, std::vector<long>(K, 0));
  std::vector<std::vector<long>> n_kw(K, std::vector<long>(V, 0));
  std::vector<long> n_k(K, 0);
  model.assignments.resize(D);

  // The sampler is deliberately single-threaded: racing samplers would break
  // the bit-reproducibility contract.
  SplitMix64 rng(cfg.seed);
  for (std::size_t d = 0; d < D; ++d) {
    model.assignments[d].resize(words[d].size());
    for (std::size_t i = 0; i < words[d].size(); ++i) {
      int z = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(K)));
      model.assignments[d][i] = z;
      ++n_dk[d][z];
      ++n_kw[z][words[d][i]];
      ++n_k[z];
    }
  }

  const double alpha = model.alpha;
  const double beta = model.beta;
  const double v_beta = V * beta;
  std::vector<double> weight(K);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const int w = words[d][i];
        const int old_z = model.assignments[d][i];
        --n_dk[d][old_z];
        --n_kw[old_z][w];
        --n_k[old_z];
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
          weight[k] = (n_dk[d][k] + alpha) * (n_kw[k][w] + beta) / (n_k[k] + v_beta);
          total += weight[k];
        }
        const int z = sample_index(weight, total, rng);
        model.assignments[d][i] = z;
        ++n_dk[d][z];
        ++n_kw[z][w];
        ++n_k[z];
      }
    }
  }

  model.phi.assign(K, std::vector<double>(V, 0.0));
  for (int k = 0; k < K; ++k) {
    for (int w = 0; w < V; ++w) model.phi[k][w] = (n_kw[k][w] + beta) / (n_k[k] + v_beta);
    check_row_stochastic(model.phi[k], "phi");
  }
  model.thetas.assign(D, std::vector<double>(K, 0.0));
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = static_cast<double>(words[d].size()) + K * alpha;
    for (int k = 0; k < K; ++k) model.thetas[d][k] = (n_dk[d][k] + alpha) / denom;
    check_row_stochastic(model.thetas[d], "theta");
  }
  return model;
}

std::vector<double> infer_theta(const TopicModel& model, const textprep::TokenSeq& doc,
                                int fold_in_iterations, std::uint64_t seed) {
  const int K = model.num_topics;
  std::vector<int> words;
  words.reserve(doc.size());
  for (const std::string& tok : doc) {
    int w = model.vocab.lookup(tok);
    if (w >= 0) words.push_back(w);  // out-of-vocabulary tokens are skipped
  }

  std::vector<double> theta(K, 1.0 / K);
  if (words.empty()) return theta;  // prior-only document

  std::vector<long> n_k(K, 0);
  std::vector<int> z(words.size());
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < words.size(); ++i) {
    z[i] = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(K)));
    ++n_k[z[i]];
  }
  std::vector<double> weight(K);
  for (int iter = 0; iter < fold_in_iterations; ++iter) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --n_k[z[i]];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        weight[k] = (n_k[k] + model.alpha) * model.phi[k][words[i]];
        total += weight[k];
      }
      z[i] = sample_index(weight, total, rng);
      ++n_k[z[i]];
    }
  }
  const double denom = static_cast<double>(words.size()) + K * model.alpha;
  for (int k = 0; k < K; ++k) theta[k] = (n_k[k] + model.alpha) / denom;
  check_row_stochastic(theta, "fold-in theta");
  return theta;
}

std::vector<std::vector<double>> infer_theta_batch(const TopicModel& model,
                                                   const std::vector<textprep::TokenSeq>& docs,
                                                   int fold_in_iterations, std::uint64_t base_seed,
                                                   par::Exec mode) {
  std::vector<std::vector<double>> thetas(docs.size());
  par::for_each_index(docs.size(), mode, [&](std::size_t i) {
    thetas[i] = infer_theta(model, docs[i], fold_in_iterations, derive_seed(base_seed, i));
  });
  return thetas;
}

std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int topic_id,
                                                      int n) {
  if (topic_id < 0 || topic_id >= model.num_topics) {
    throw Error("top_words: topic id " + std::to_string(topic_id) + " out of range [0, " +
                std::to_string(model.num_topics) + ")");
  }
  const auto& row = model.phi[topic_id];
  std::vector<int> order(row.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;  // ties by ascending word id
  });
  const std::size_t take = std::min<std::size_t>(order.size(), n < 0 ? 0 : n);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.emplace_back(model.vocab.word_of[order[i]], row[order[i]]);
  }
  return out;
}

double held_out_log_likelihood(const TopicModel& model, const std::vector<textprep::TokenSeq>& docs,
                               int fold_in_iterations, par::Exec mode) {
  return par::indexed_sum(docs.size(), mode, [&](std::size_t d) {
    std::vector<double> theta =
        infer_theta(model, docs[d], fold_in_iterations, derive_seed(model.seed, d));
    double ll = 0.0;
    for (const std::string& tok : docs[d]) {
      int w = model.vocab.lookup(tok);
      if (w < 0) continue;
      double p = 0.0;
      for (int k = 0; k < model.num_topics; ++k) p += theta[k] * model.phi[k][w];
      ll += std::log(p);
    }
    return ll;
  });
}

}  // namespace fixrec::topics
