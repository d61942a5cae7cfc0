#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "flowhawk/kernels.hpp"
#include "models_impl.hpp"

namespace flowhawk::classifiers {

LabelClass Model::predict(std::span<const double> x) const {
  if (x.size() != feature_names_.size())
    throw DimensionMismatch(x.size(), feature_names_.size());
  for (double v : x)
    if (!std::isfinite(v)) throw NonFiniteInput();
  return predict_checked(x);
}

double knn_distance(std::span<const double> x, std::span<const double> y,
                    double p) {
  if (x.size() != y.size()) throw DimensionMismatch(x.size(), y.size());
  if (p < 1.0) throw InvalidHyperparameter("minkowski power must be >= 1");
  const auto& ops = kernels::active();
  if (p == 2.0) return std::sqrt(ops.squared_l2(x.data(), y.data(), x.size()));
  if (p == 1.0) return ops.l1(x.data(), y.data(), x.size());
  return std::pow(ops.minkowski_pow_sum(x.data(), y.data(), x.size(), p), 1.0 / p);
}

ModelPtr fit(const ClassifierSpec& spec, const dataset::LabeledDataset& ds,
             std::uint64_t seed) {
  validate_spec(spec);
  if (ds.rows() == 0) throw dataset::EmptyDataset();
  bool has0 = false, has1 = false;
  for (auto y : ds.y) (y == LabelClass::Botnet ? has1 : has0) = true;
  if (!has0 || !has1) throw SingleClassDataset();

  auto start = std::chrono::steady_clock::now();
  ModelPtr model;
  switch (spec.kind) {
    case Kind::GaussianNB: model = impl::fit_gnb(spec, ds, seed); break;
    case Kind::DecisionTree: model = impl::fit_tree(spec, ds, seed); break;
    case Kind::RandomForest: model = impl::fit_forest(spec, ds, seed); break;
    case Kind::AdaBoost: model = impl::fit_adaboost(spec, ds, seed); break;
    case Kind::LinearSVM: model = impl::fit_svm(spec, ds, seed); break;
    case Kind::KNN: model = impl::fit_knn(spec, ds, seed); break;
  }
  model->spec_ = spec;
  model->feature_names_ = ds.feature_names;
  model->trained_on_ = ds.provenance;
  model->fit_time_s_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return model;
}

namespace impl {

// ---- Gaussian Naive Bayes ----

ModelPtr fit_gnb(const ClassifierSpec&, const dataset::LabeledDataset& ds,
                 std::uint64_t) {
  auto model = std::make_shared<GnbModel>();
  std::size_t d = ds.cols();
  double count[2] = {0, 0};
  for (int c : {0, 1}) {
    model->mean[c].assign(d, 0.0);
    model->var[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    int c = ds.y[i] == LabelClass::Botnet;
    count[c] += 1.0;
    const double* row = ds.row(i);
    for (std::size_t j = 0; j < d; ++j) model->mean[c][j] += row[j];
  }
  for (int c : {0, 1})
    for (std::size_t j = 0; j < d; ++j) model->mean[c][j] /= count[c];
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    int c = ds.y[i] == LabelClass::Botnet;
    const double* row = ds.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      double dlt = row[j] - model->mean[c][j];
      model->var[c][j] += dlt * dlt;
    }
  }
  // Variance smoothing: 1e-9 x the largest overall feature variance keeps
  // the density defined on constant features.
  double max_var = 0.0;
  for (int c : {0, 1})
    for (std::size_t j = 0; j < d; ++j) {
      model->var[c][j] /= count[c];
      max_var = std::max(max_var, model->var[c][j]);
    }
  double eps = 1e-9 * std::max(max_var, 1.0);
  for (int c : {0, 1})
    for (std::size_t j = 0; j < d; ++j) model->var[c][j] += eps;
  double n = count[0] + count[1];
  model->log_prior[0] = std::log(count[0] / n);
  model->log_prior[1] = std::log(count[1] / n);
  return model;
}

LabelClass GnbModel::predict_checked(std::span<const double> x) const {
  const auto& ops = kernels::active();
  double score[2];
  for (int c : {0, 1})
    score[c] = log_prior[c] + ops.gaussian_log_density_sum(
                                  x.data(), mean[c].data(), var[c].data(),
                                  x.size());
  return score[1] > score[0] ? LabelClass::Botnet : LabelClass::Normal;
}

// ---- Decision tree ----

namespace {

TreeParams tree_params_from(const ClassifierSpec& spec) {
  TreeParams p;
  p.criterion = spec.get("criterion").as_string();
  p.random_splitter = spec.get("splitter").as_string() == "random";
  p.min_samples_split = static_cast<int>(spec.get("min_samples_split").as_int());
  p.min_samples_leaf = static_cast<int>(spec.get("min_samples_leaf").as_int());
  p.min_weight_fraction_leaf = spec.get("min_weight_fraction_leaf").as_float();
  return p;
}

std::vector<double> sample_weights_from(const ClassifierSpec& spec,
                                        const dataset::LabeledDataset& ds) {
  std::vector<double> w(ds.rows(), 1.0);
  if (!spec.get("class_weight").is_none()) {
    auto cw = balanced_class_weights(ds);
    for (std::size_t i = 0; i < ds.rows(); ++i)
      w[i] = cw[ds.y[i] == LabelClass::Botnet];
  }
  return w;
}

std::vector<double> normalized(std::vector<double> v) {
  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (sum > 0)
    for (double& x : v) x /= sum;
  return v;
}

}  // namespace

ModelPtr fit_tree(const ClassifierSpec& spec, const dataset::LabeledDataset& ds,
                  std::uint64_t seed) {
  auto model = std::make_shared<TreeModel>();
  auto weights = sample_weights_from(spec, ds);
  std::mt19937_64 rng(seed);
  model->tree = build_tree(ds, weights, tree_params_from(spec), rng);
  return model;
}

LabelClass TreeModel::predict_checked(std::span<const double> x) const {
  return tree.predict(x.data());
}

std::vector<double> TreeModel::feature_importances() const {
  return normalized(tree.raw_importances(feature_names_.size()));
}

// ---- Random forest ----

ModelPtr fit_forest(const ClassifierSpec& spec, const dataset::LabeledDataset& ds,
                    std::uint64_t seed) {
  auto model = std::make_shared<ForestModel>();
  int n_estimators = static_cast<int>(spec.get("n_estimators").as_int());
  bool bootstrap = spec.get("bootstrap").as_string() == "true";
  TreeParams params = tree_params_from(spec);
  if (spec.get("max_features").as_string() == "sqrt" && n_estimators > 1)
    params.max_features = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(ds.cols()))));
  auto base_weights = sample_weights_from(spec, ds);

  model->trees.reserve(n_estimators);
  for (int t = 0; t < n_estimators; ++t) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (t + 1)));
    std::vector<double> weights = base_weights;
    if (bootstrap) {
      std::vector<double> boot(ds.rows(), 0.0);
      std::uniform_int_distribution<std::size_t> pick(0, ds.rows() - 1);
      for (std::size_t i = 0; i < ds.rows(); ++i) boot[pick(rng)] += 1.0;
      for (std::size_t i = 0; i < ds.rows(); ++i) weights[i] *= boot[i];
    }
    model->trees.push_back(build_tree(ds, weights, params, rng));
  }
  return model;
}

LabelClass ForestModel::predict_checked(std::span<const double> x) const {
  int votes = 0;
  for (const auto& t : trees)
    votes += t.predict(x.data()) == LabelClass::Botnet ? 1 : -1;
  return votes > 0 ? LabelClass::Botnet : LabelClass::Normal;
}

std::vector<double> ForestModel::feature_importances() const {
  std::vector<double> acc(feature_names_.size(), 0.0);
  for (const auto& t : trees) {
    auto imp = normalized(t.raw_importances(acc.size()));
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += imp[j];
  }
  return normalized(std::move(acc));
}

// ---- AdaBoost (discrete SAMME and SAMME.R) ----

ModelPtr fit_adaboost(const ClassifierSpec& spec,
                      const dataset::LabeledDataset& ds, std::uint64_t seed) {
  auto model = std::make_shared<AdaBoostModel>();
  int n_estimators = static_cast<int>(spec.get("n_estimators").as_int());
  double learning_rate = spec.get("learning_rate").as_float();
  model->real_boosting = spec.get("algorithm").as_string() == "SAMME.R";
  Value rs = spec.get("random_state");
  std::uint64_t rng_seed = rs.is_none() ? seed : seed ^ (0xda3e39cb94b95bdbull *
                                                         (rs.as_int() + 1));
  std::mt19937_64 rng(rng_seed);

  TreeParams params;  // depth-1 stumps
  params.max_depth = 1;

  std::size_t n = ds.rows();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> sign_y(n);
  for (std::size_t i = 0; i < n; ++i)
    sign_y[i] = ds.y[i] == LabelClass::Botnet ? 1.0 : -1.0;

  for (int t = 0; t < n_estimators; ++t) {
    Tree stump = build_tree(ds, w, params, rng);
    if (model->real_boosting) {
      // Real-valued update from leaf class-probability estimates.
      bool degenerate = false;
      std::vector<double> h(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto proba = stump.leaf_proba(ds.row(i));
        double p1 = std::clamp(proba[1], 1e-10, 1.0 - 1e-10);
        h[i] = 0.5 * std::log(p1 / (1.0 - p1));
        if (!std::isfinite(h[i])) degenerate = true;
      }
      if (degenerate) break;
      model->learners.push_back(std::move(stump));
      model->alphas.push_back(learning_rate);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= std::exp(-learning_rate * sign_y[i] * h[i]);
        sum += w[i];
      }
      if (sum <= 0) break;
      for (double& x : w) x /= sum;
    } else {
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (stump.predict(ds.row(i)) != ds.y[i]) err += w[i];
      if (err <= 0.0) {
        // Perfect learner dominates the vote; further rounds are redundant.
        model->learners.push_back(std::move(stump));
        model->alphas.push_back(learning_rate * std::log(1e12));
        break;
      }
      // Boosting halts once no weak learner beats chance on the weighted set.
      if (err >= 0.5) break;
      double alpha = learning_rate * std::log((1.0 - err) / err);
      model->learners.push_back(stump);
      model->alphas.push_back(alpha);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (stump.predict(ds.row(i)) != ds.y[i]) w[i] *= std::exp(alpha);
        sum += w[i];
      }
      for (double& x : w) x /= sum;
    }
  }
  if (model->learners.empty()) {
    // First stump already at chance: keep it with zero weight so predict is
    // defined (majority of the root leaf).
    model->learners.push_back(build_tree(ds, w, params, rng));
    model->alphas.push_back(0.0);
  }
  return model;
}

LabelClass AdaBoostModel::predict_checked(std::span<const double> x) const {
  double score = 0.0;
  if (real_boosting) {
    for (std::size_t t = 0; t < learners.size(); ++t) {
      auto proba = learners[t].leaf_proba(x.data());
      double p1 = std::clamp(proba[1], 1e-10, 1.0 - 1e-10);
      score += alphas[t] * 0.5 * std::log(p1 / (1.0 - p1));
    }
  } else {
    for (std::size_t t = 0; t < learners.size(); ++t)
      score += alphas[t] *
               (learners[t].predict(x.data()) == LabelClass::Botnet ? 1.0 : -1.0);
  }
  if (score == 0.0 && !learners.empty()) return learners[0].predict(x.data());
  return score > 0 ? LabelClass::Botnet : LabelClass::Normal;
}

std::vector<double> AdaBoostModel::feature_importances() const {
  std::vector<double> acc(feature_names_.size(), 0.0);
  double alpha_sum = 0.0;
  for (double a : alphas) alpha_sum += std::max(a, 0.0);
  for (std::size_t t = 0; t < learners.size(); ++t) {
    double a = alpha_sum > 0 ? std::max(alphas[t], 0.0) / alpha_sum
                             : 1.0 / learners.size();
    auto imp = normalized(learners[t].raw_importances(acc.size()));
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += a * imp[j];
  }
  return normalized(std::move(acc));
}

// ---- Linear SVM ----

namespace {

double svm_objective(const dataset::LabeledDataset& ds,
                     const std::vector<double>& w, double b, double c,
                     bool squared) {
  const auto& ops = kernels::active();
  double obj = 0.5 * ops.dot(w.data(), w.data(), w.size());
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    double y = ds.y[i] == LabelClass::Botnet ? 1.0 : -1.0;
    double margin = 1.0 - y * (ops.dot(w.data(), ds.row(i), w.size()) + b);
    if (margin > 0) obj += c * (squared ? margin * margin : margin);
  }
  return obj;
}

}  // namespace

ModelPtr fit_svm(const ClassifierSpec& spec, const dataset::LabeledDataset& ds,
                 std::uint64_t seed) {
  auto model = std::make_shared<SvmModel>();
  double c = spec.get("c").as_float();
  double tol = spec.get("tol").as_float();
  bool squared = spec.get("loss").as_string() == "squared_hinge";

  std::size_t n = ds.rows(), d = ds.cols();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  model->initial_objective = svm_objective(ds, w, b, c, squared);

  std::vector<double> best_w = w;
  double best_b = b, best_obj = model->initial_objective;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  const auto& ops = kernels::active();

  constexpr int kMaxEpochs = 1000;
  double prev_obj = best_obj;
  for (int epoch = 1; epoch <= kMaxEpochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t i = order[step];
      double eta = 1.0 / (1.0 + 0.01 * (static_cast<double>(epoch - 1) * n + step));
      eta /= static_cast<double>(n);
      double y = ds.y[i] == LabelClass::Botnet ? 1.0 : -1.0;
      const double* x = ds.row(i);
      double margin = 1.0 - y * (ops.dot(w.data(), x, d) + b);
      // Subgradient of 0.5||w||^2 + C sum loss, scaled per-sample.
      double g = 0.0;
      if (margin > 0) g = squared ? 2.0 * c * margin : c;
      for (std::size_t j = 0; j < d; ++j)
        w[j] += eta * (g * y * x[j] - w[j] / static_cast<double>(n));
      b += eta * g * y;
    }
    double obj = svm_objective(ds, w, b, c, squared);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_b = b;
    }
    if (std::fabs(prev_obj - obj) < tol * std::max(1.0, std::fabs(prev_obj)))
      break;
    prev_obj = obj;
  }
  model->w = std::move(best_w);
  model->b = best_b;
  model->final_objective = best_obj;
  return model;
}

LabelClass SvmModel::predict_checked(std::span<const double> x) const {
  double f = kernels::active().dot(w.data(), x.data(), w.size()) + b;
  return f > 0 ? LabelClass::Botnet : LabelClass::Normal;
}

}  // namespace impl
}  // namespace flowhawk::classifiers
