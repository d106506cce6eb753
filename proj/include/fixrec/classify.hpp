#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fixrec/corpus.hpp"
#include "fixrec/parallel.hpp"
#include "fixrec/topics.hpp"

namespace fixrec::classify {

/// A document's topic proportions (length K, entries in [0,1], sum 1).
using FeatureVector = std::vector<double>;

struct SvmHyper {
  double lambda = 0.01;
  int epochs = 200;
};

/// One-vs-rest linear classifier. labels is sorted ascending; weights[c] and
/// biases[c] belong to labels[c].
struct LinearClassifier {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> weights;
  std::vector<double> biases;
  SvmHyper hyper;
  std::uint64_t seed = 0;

  int dim() const { return weights.empty() ? 0 : static_cast<int>(weights[0].size()); }

  bool operator==(const LinearClassifier& o) const {
    return labels == o.labels && weights == o.weights && biases == o.biases;
  }
};

struct Prediction {
  std::string label;
  std::vector<double> scores;  // one per class, in label order
};

/// Deterministic full-batch subgradient descent on the L2-regularized hinge
/// objective, one binary problem per label (one-vs-rest). Throws on empty
/// input, fewer than two distinct labels, or inconsistent dimensions.
LinearClassifier train_svm(const std::vector<FeatureVector>& features,
                           const std::vector<std::string>& labels, const SvmHyper& hyper,
                           std::uint64_t seed);

/// argmax_c w_c.x + b_c; ties broken by label order. Throws on dimension
/// mismatch.
Prediction predict(const LinearClassifier& clf, const FeatureVector& x);

std::vector<Prediction> predict_batch(const LinearClassifier& clf,
                                      const std::vector<FeatureVector>& xs,
                                      par::Exec mode = par::Exec::parallel);

/// Regularized binary hinge objective
///   (lambda/2)|w|^2 + (1/n) sum_i max(0, 1 - y_i (w.x_i + b))
/// with y_i in {-1,+1}. Exposed so tests can check the subgradient against
/// finite differences.
double hinge_objective(const std::vector<double>& w, double b,
                       const std::vector<FeatureVector>& xs, const std::vector<int>& ys,
                       double lambda);

/// Subgradient of hinge_objective at (w, b). A sample contributes iff its
/// margin is strictly below 1; at the margin==1 kink it contributes nothing.
void hinge_gradient(const std::vector<double>& w, double b, const std::vector<FeatureVector>& xs,
                    const std::vector<int>& ys, double lambda, std::vector<double>& grad_w,
                    double& grad_b);

/// Pooled cross-validation result. confusion[i][j] counts gold labels[i]
/// predicted as labels[j], summed over all folds. Per-class precision and
/// recall are recomputed from the confusion matrix (0 when the denominator
/// is 0); the pooled figures are micro-averaged over all test decisions.
struct EvalReport {
  std::vector<std::string> labels;
  std::vector<std::vector<long long>> confusion;
  std::vector<double> precision;
  std::vector<double> recall;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double pooled_precision = 0.0;
  double pooled_recall = 0.0;
  double accuracy = 0.0;
  int folds = 0;
};

/// Derive precision/recall/accuracy fields from labels+confusion+folds.
void finalize_metrics(EvalReport& report);

/// Stratified k-fold cross validation. Every report must carry a label and
/// every class needs at least k members. Per fold, LDA is retrained on the
/// training split only and test features come from fold-in (no leakage);
/// fold f uses base seed `seed + f`. Folds are independent and may run in
/// parallel; results are bit-identical across modes.
EvalReport k_fold_cv(const std::vector<corpus::BugReport>& reports,
                     const topics::LdaConfig& topic_config, const SvmHyper& hyper, int k,
                     std::uint64_t seed, par::Exec mode = par::Exec::parallel);

}  // namespace fixrec::classify
