#include "fixrec/classify.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "fixrec/error.hpp"
#include "fixrec/rng.hpp"
#include "fixrec/textprep.hpp"

namespace fixrec::classify {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// One binary one-vs-rest problem: deterministic full-batch subgradient
// descent with the Pegasos step schedule eta_t = 1/(lambda*t), zero
// initialization, unregularized bias.
void train_binary(const std::vector<FeatureVector>& xs, const std::vector<int>& ys,
                  const SvmHyper& hyper, std::vector<double>& w, double& b) {
  const std::size_t dim = xs[0].size();
  w.assign(dim, 0.0);
  b = 0.0;
  std::vector<double> grad_w(dim);
  for (int t = 1; t <= hyper.epochs; ++t) {
    double grad_b = 0.0;
    hinge_gradient(w, b, xs, ys, hyper.lambda, grad_w, grad_b);
    const double eta = 1.0 / (hyper.lambda * t);
    for (std::size_t j = 0; j < dim; ++j) w[j] -= eta * grad_w[j];
    b -= eta * grad_b;
  }
}

}  // namespace

double hinge_objective(const std::vector<double>& w, double b,
                       const std::vector<FeatureVector>& xs, const std::vector<int>& ys,
                       double lambda) {
  double obj = 0.5 * lambda * dot(w, w);
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double margin = ys[i] * (dot(w, xs[i]) + b);
    if (margin < 1.0) loss += 1.0 - margin;
  }
  return obj + loss / static_cast<double>(xs.size());
}

void hinge_gradient(const std::vector<double>& w, double b, const std::vector<FeatureVector>& xs,
                    const std::vector<int>& ys, double lambda, std::vector<double>& grad_w,
                    double& grad_b) {
  const std::size_t dim = w.size();
  grad_w.assign(dim, 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double margin = ys[i] * (dot(w, xs[i]) + b);
    if (margin < 1.0) {
      for (std::size_t j = 0; j < dim; ++j) grad_w[j] -= ys[i] * xs[i][j];
      grad_b -= ys[i];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t j = 0; j < dim; ++j) grad_w[j] = lambda * w[j] + grad_w[j] * inv_n;
  grad_b *= inv_n;
}

LinearClassifier train_svm(const std::vector<FeatureVector>& features,
                           const std::vector<std::string>& labels, const SvmHyper& hyper,
                           std::uint64_t seed) {
  if (features.empty()) throw Error("train_svm: empty training set");
  if (features.size() != labels.size()) {
    throw Error("train_svm: feature/label count mismatch");
  }
  const std::size_t dim = features[0].size();
  for (const FeatureVector& x : features) {
    if (x.size() != dim) throw Error("train_svm: inconsistent feature dimensions");
  }
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw Error("train_svm: need at least 2 distinct labels");

  LinearClassifier clf;
  clf.labels.assign(distinct.begin(), distinct.end());
  clf.hyper = hyper;
  clf.seed = seed;  // provenance only: full-batch descent draws nothing
  clf.weights.resize(clf.labels.size());
  clf.biases.resize(clf.labels.size());
  std::vector<int> ys(labels.size());
  for (std::size_t c = 0; c < clf.labels.size(); ++c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      ys[i] = labels[i] == clf.labels[c] ? 1 : -1;
    }
    train_binary(features, ys, hyper, clf.weights[c], clf.biases[c]);
  }
  return clf;
}

Prediction predict(const LinearClassifier& clf, const FeatureVector& x) {
  if (clf.labels.empty()) throw Error("predict: untrained classifier");
  if (static_cast<int>(x.size()) != clf.dim()) {
    throw Error("predict: feature dimension " + std::to_string(x.size()) + ", classifier expects " +
                std::to_string(clf.dim()));
  }
  Prediction p;
  p.scores.resize(clf.labels.size());
  std::size_t best = 0;
  for (std::size_t c = 0; c < clf.labels.size(); ++c) {
    p.scores[c] = dot(clf.weights[c], x) + clf.biases[c];
    if (p.scores[c] > p.scores[best]) best = c;  // ties keep the earlier label
  }
  p.label = clf.labels[best];
  return p;
}

std::vector<Prediction> predict_batch(const LinearClassifier& clf,
                                      const std::vector<FeatureVector>& xs, par::Exec mode) {
  std::vector<Prediction> out(xs.size());
  par::for_each_index(xs.size(), mode, [&](std::size_t i) { out[i] = predict(clf, xs[i]); });
  return out;
}

void finalize_metrics(EvalReport& report) {
  const std::size_t c = report.labels.size();
  report.precision.assign(c, 0.0);
  report.recall.assign(c, 0.0);
  long long total = 0;
  long long diag = 0;
  for (std::size_t i = 0; i < c; ++i) {
    long long row = 0;
    long long col = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += report.confusion[i][j];
      col += report.confusion[j][i];
      total += report.confusion[i][j];
    }
    diag += report.confusion[i][i];
    report.precision[i] = col == 0 ? 0.0 : static_cast<double>(report.confusion[i][i]) / col;
    report.recall[i] = row == 0 ? 0.0 : static_cast<double>(report.confusion[i][i]) / row;
  }
  report.macro_precision = 0.0;
  report.macro_recall = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    report.macro_precision += report.precision[i];
    report.macro_recall += report.recall[i];
  }
  if (c > 0) {
    report.macro_precision /= static_cast<double>(c);
    report.macro_recall /= static_cast<double>(c);
  }
  report.accuracy = total == 0 ? 0.0 : static_cast<double>(diag) / total;
  // Micro-averaged over pooled decisions; for single-label multiclass both
  // figures coincide with accuracy, reported separately for comparability.
  report.pooled_precision = report.accuracy;
  report.pooled_recall = report.accuracy;
}

EvalReport k_fold_cv(const std::vector<corpus::BugReport>& reports,
                     const topics::LdaConfig& topic_config, const SvmHyper& hyper, int k,
                     std::uint64_t seed, par::Exec mode) {
  if (k < 2) throw Error("k_fold_cv: need k >= 2 folds");
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!reports[i].label.has_value()) {
      throw Error("k_fold_cv: report '" + reports[i].id + "' has no label");
    }
    by_label[*reports[i].label].push_back(i);
  }
  if (by_label.size() < 2) throw Error("k_fold_cv: need at least 2 distinct labels");
  for (const auto& [label, members] : by_label) {
    if (members.size() < static_cast<std::size_t>(k)) {
      throw Error("k_fold_cv: class '" + label + "' has " + std::to_string(members.size()) +
                  " members, fewer than k=" + std::to_string(k));
    }
  }

  // Stratified assignment: shuffle each class with the seeded generator,
  // then deal members round-robin over the folds.
  std::vector<int> fold_of(reports.size(), -1);
  SplitMix64 rng(seed);
  for (auto& [label, members] : by_label) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::size_t j = rng.next_below(static_cast<std::uint32_t>(i));
      std::swap(members[i - 1], members[j]);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold_of[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
  }

  const std::vector<textprep::TokenSeq> docs = textprep::preprocess_all(reports, mode);

  // Folds are independent (each derives its own seed as seed + fold index),
  // so they can run in parallel; the pooled counts are combined in fold
  // order and are bit-identical across modes.
  std::vector<std::vector<std::pair<std::string, std::string>>> fold_results(k);
  par::for_each_index(static_cast<std::size_t>(k), mode, [&](std::size_t f) {
    std::vector<textprep::TokenSeq> train_docs;
    std::vector<std::string> train_labels;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (fold_of[i] == static_cast<int>(f)) {
        test_idx.push_back(i);
      } else {
        train_docs.push_back(docs[i]);
        train_labels.push_back(*reports[i].label);
      }
    }
    topics::LdaConfig fold_cfg = topic_config;
    fold_cfg.seed = seed + f;
    const topics::TopicModel model = topics::train_lda(train_docs, fold_cfg);
    const LinearClassifier clf = train_svm(model.thetas, train_labels, hyper, fold_cfg.seed);
    auto& results = fold_results[f];
    for (std::size_t t = 0; t < test_idx.size(); ++t) {
      // Test features come from fold-in against the fold's own model: the
      // test split never touches training.
      std::vector<double> theta = topics::infer_theta(
          model, docs[test_idx[t]], topics::kDefaultFoldInIterations, derive_seed(fold_cfg.seed, t));
      results.emplace_back(*reports[test_idx[t]].label, predict(clf, theta).label);
    }
  });

  EvalReport report;
  report.folds = k;
  for (const auto& [label, members] : by_label) report.labels.push_back(label);
  report.confusion.assign(report.labels.size(),
                          std::vector<long long>(report.labels.size(), 0));
  auto label_index = [&](const std::string& l) {
    return static_cast<std::size_t>(
        std::lower_bound(report.labels.begin(), report.labels.end(), l) - report.labels.begin());
  };
  for (const auto& results : fold_results) {
    for (const auto& [gold, pred] : results) {
      ++report.confusion[label_index(gold)][label_index(pred)];
    }
  }
  finalize_metrics(report);
  return report;
}

}  // namespace fixrec::classify
