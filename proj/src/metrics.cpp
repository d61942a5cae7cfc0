#include "flowhawk/metrics.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

namespace flowhawk::metrics {

Scores score(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyMatrix();
  auto tp = static_cast<double>(cm.tp);
  auto fp = static_cast<double>(cm.fp);
  auto tn = static_cast<double>(cm.tn);
  auto fn = static_cast<double>(cm.fn);
  Scores s;
  s.accuracy = (tp + tn) / (tp + tn + fp + fn);
  s.precision = cm.tp + cm.fp > 0 ? tp / (tp + fp) : 0.0;
  s.recall = cm.tp + cm.fn > 0 ? tp / (tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  s.fpr = cm.fp + cm.tn > 0 ? fp / (fp + tn) : 0.0;
  return s;
}

ConfusionMatrix confusion_from_predictions(const std::vector<LabelClass>& y_true,
                                           const std::vector<LabelClass>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    throw LengthMismatch(y_true.size(), y_pred.size());
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    bool actual = y_true[i] == LabelClass::Botnet;
    bool predicted = y_pred[i] == LabelClass::Botnet;
    if (actual)
      ++(predicted ? cm.tp : cm.fn);
    else
      ++(predicted ? cm.fp : cm.tn);
  }
  return cm;
}

namespace {

// splitmix64 finalizer: decorrelates the per-fold seeds from the base seed.
std::uint64_t fold_seed(std::uint64_t seed, int fold) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(fold) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

FoldResult evaluate_fold(const classifiers::ClassifierSpec& spec,
                         const dataset::LabeledDataset& ds,
                         const dataset::FoldPlan& plan, int fold,
                         std::uint64_t seed) {
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < plan.assignments.size(); ++i)
    (plan.assignments[i] == fold ? test_rows : train_rows).push_back(i);

  auto train = dataset::subset(ds, train_rows);
  auto model = classifiers::fit(spec, train, fold_seed(seed, fold));

  std::vector<LabelClass> y_true, y_pred;
  y_true.reserve(test_rows.size());
  y_pred.reserve(test_rows.size());
  std::size_t d = ds.cols();
  for (auto r : test_rows) {
    y_true.push_back(ds.y[r]);
    y_pred.push_back(model->predict({ds.row(r), d}));
  }

  FoldResult fr;
  fr.fold = fold;
  fr.cm = confusion_from_predictions(y_true, y_pred);
  fr.scores = score(fr.cm);
  fr.fit_time_s = model->fit_time_s();
  return fr;
}

}  // namespace

EvalReport cross_validate(const classifiers::ClassifierSpec& spec,
                          const dataset::LabeledDataset& ds, int k,
                          std::uint64_t seed, int parallelism) {
  auto plan = dataset::stratified_kfold(ds, k, seed);

  EvalReport report;
  report.spec = spec;
  report.dataset_descriptor = ds.provenance;
  report.k = k;
  report.seed = seed;
  report.folds.resize(k);

  std::vector<std::exception_ptr> errors(k);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int f = next.fetch_add(1); f < k; f = next.fetch_add(1)) {
      try {
        report.folds[f] = evaluate_fold(spec, ds, plan, f, seed);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };

  int workers = std::max(1, std::min(parallelism, k));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int i = 0; i < workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  for (int f = 0; f < k; ++f) {
    if (!errors[f]) continue;
    try {
      std::rethrow_exception(errors[f]);
    } catch (const std::exception& e) {
      throw MetricsError("fold " + std::to_string(f) + ": " + e.what());
    }
  }

  for (const auto& fr : report.folds) {
    report.mean.accuracy += fr.scores.accuracy;
    report.mean.precision += fr.scores.precision;
    report.mean.recall += fr.scores.recall;
    report.mean.f1 += fr.scores.f1;
    report.mean.fpr += fr.scores.fpr;
    report.total_fit_time_s += fr.fit_time_s;
  }
  double n = static_cast<double>(k);
  report.mean.accuracy /= n;
  report.mean.precision /= n;
  report.mean.recall /= n;
  report.mean.f1 /= n;
  report.mean.fpr /= n;
  report.mean_fit_time_s = report.total_fit_time_s / n;
  return report;
}

namespace {

std::string row(const std::string& tag, double fit_time, const Scores& s) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.9f\n",
                tag.c_str(), fit_time, s.precision, s.recall, s.f1, s.accuracy,
                s.fpr);
  return buf;
}

}  // namespace

std::string report_rows(const EvalReport& report) {
  std::string out = "fold\tfit_time_s\tprecision\trecall\tf1\taccuracy\tfpr\n";
  for (const auto& fr : report.folds)
    out += row(std::to_string(fr.fold), fr.fit_time_s, fr.scores);
  out += row("mean", report.mean_fit_time_s, report.mean);
  return out;
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  char buf[192];
  out << classifiers::to_string(report.spec.kind) << " on "
      << report.dataset_descriptor << " (" << report.k << "-fold, seed "
      << report.seed << ")\n";
  out << "Fold  Fit Time (s)  Precision  Recall   F1 score  Accuracy\n";
  for (const auto& fr : report.folds) {
    std::snprintf(buf, sizeof(buf), "%-5d %12.4f  %9.4f  %7.4f  %8.4f  %8.4f\n",
                  fr.fold, fr.fit_time_s, fr.scores.precision, fr.scores.recall,
                  fr.scores.f1, fr.scores.accuracy);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-5s %12.4f  %9.4f  %7.4f  %8.4f  %8.4f\n",
                "mean", report.mean_fit_time_s, report.mean.precision,
                report.mean.recall, report.mean.f1, report.mean.accuracy);
  out << buf;
  return out.str();
}

}  // namespace flowhawk::metrics
