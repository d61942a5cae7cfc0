#pragma once
// Confusion-matrix metrics and the stratified cross-validation harness.

#include <cstdint>
#include <string>
#include <vector>

#include "flowhawk/classifiers/model.hpp"
#include "flowhawk/dataset.hpp"

namespace flowhawk::metrics {

struct MetricsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyMatrix : MetricsError {
  EmptyMatrix() : MetricsError("confusion matrix has zero total count") {}
};
struct LengthMismatch : MetricsError {
  LengthMismatch(std::size_t a, std::size_t b)
      : MetricsError("prediction length " + std::to_string(b) +
                     " does not match truth length " + std::to_string(a)) {}
};

// Positive class is Botnet.
struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct Scores {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fpr = 0.0;
};

// Zero-denominator conventions: precision 0 when tp+fp==0, recall 0 when
// tp+fn==0, f1 0 when precision+recall==0, fpr 0 when fp+tn==0.
Scores score(const ConfusionMatrix& cm);

ConfusionMatrix confusion_from_predictions(const std::vector<LabelClass>& y_true,
                                           const std::vector<LabelClass>& y_pred);

struct FoldResult {
  int fold = 0;
  ConfusionMatrix cm;
  Scores scores;
  double fit_time_s = 0.0;
};

struct EvalReport {
  classifiers::ClassifierSpec spec;
  std::string dataset_descriptor;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  Scores mean;              // arithmetic over folds
  double mean_fit_time_s = 0.0;
  double total_fit_time_s = 0.0;
};

// Trains on k-1 folds and scores the held-out fold, for each fold. Results
// are independent of the worker count (same fold plan, same per-fold seeds).
EvalReport cross_validate(const classifiers::ClassifierSpec& spec,
                          const dataset::LabeledDataset& ds, int k,
                          std::uint64_t seed, int parallelism = 1);

// Machine-readable rows: one line per fold plus a mean line, tab-separated
// columns fold/fit_time_s/precision/recall/f1/accuracy/fpr.
std::string report_rows(const EvalReport& report);

// Aligned text table in the column order "Fit Time (s), Precision, Recall,
// F1 score, Accuracy".
std::string report_table(const EvalReport& report);

}  // namespace flowhawk::metrics
