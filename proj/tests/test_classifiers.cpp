#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "classifiers/models_impl.hpp"
#include "flowhawk/classifiers/model.hpp"
#include "test_util.hpp"

using namespace flowhawk;
using namespace flowhawk::classifiers;

namespace {

ClassifierSpec spec_of(Kind kind,
                       std::map<std::string, Value> params = {}) {
  ClassifierSpec s;
  s.kind = kind;
  s.hyperparameters = std::move(params);
  return s;
}

// Random rows (unique with probability ~1) for memorization checks.
dataset::LabeledDataset random_dataset(std::size_t n, std::size_t d,
                                       std::uint64_t seed,
                                       double botnet_frac = 0.4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10, 10);
  dataset::LabeledDataset ds;
  for (std::size_t j = 0; j < d; ++j)
    ds.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) ds.x.push_back(u(rng));
    ds.y.push_back(u(rng) < (botnet_frac * 20 - 10) ? LabelClass::Botnet
                                                    : LabelClass::Normal);
  }
  bool has_b = false, has_n = false;
  for (auto y : ds.y) (y == LabelClass::Botnet ? has_b : has_n) = true;
  if (!has_b) ds.y[0] = LabelClass::Botnet;
  if (!has_n) ds.y[1] = LabelClass::Normal;
  ds.provenance = "random";
  return ds;
}

double training_accuracy(const Model& m, const dataset::LabeledDataset& ds) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < ds.rows(); ++i)
    hit += m.predict({ds.row(i), ds.cols()}) == ds.y[i];
  return static_cast<double>(hit) / static_cast<double>(ds.rows());
}

}  // namespace

// ---- spec schema ----

TEST_CASE("default specs validate for every kind") {
  for (Kind k : {Kind::GaussianNB, Kind::DecisionTree, Kind::RandomForest,
                 Kind::AdaBoost, Kind::LinearSVM, Kind::KNN})
    CHECK_NOTHROW(validate_spec(default_spec(k)));
}

TEST_CASE("unknown names and out-of-domain values are rejected") {
  CHECK_THROWS_AS(validate_spec(spec_of(Kind::DecisionTree, {{"bogus", 1}})),
                  InvalidHyperparameter);
  CHECK_THROWS_AS(
      validate_spec(spec_of(Kind::DecisionTree, {{"min_samples_split", 99}})),
      InvalidHyperparameter);
  CHECK_THROWS_AS(
      validate_spec(spec_of(Kind::DecisionTree, {{"criterion", "mse"}})),
      InvalidHyperparameter);
  CHECK_THROWS_AS(validate_spec(spec_of(Kind::KNN, {{"p", 9}})),
                  InvalidHyperparameter);
}

TEST_CASE("kind names round trip") {
  for (Kind k : {Kind::GaussianNB, Kind::DecisionTree, Kind::RandomForest,
                 Kind::AdaBoost, Kind::LinearSVM, Kind::KNN})
    CHECK(kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(kind_from_string("perceptron"), InvalidHyperparameter);
}

// ---- impurity / distance primitives ----

TEST_CASE("impurity formulas") {
  CHECK(impurity(std::vector<double>{2, 2}, "gini") == doctest::Approx(0.5));
  CHECK(impurity(std::vector<double>{4, 0}, "gini") == doctest::Approx(0.0));
  CHECK(impurity(std::vector<double>{4, 0}, "entropy") == doctest::Approx(0.0));
  CHECK(impurity(std::vector<double>{3, 1}, "entropy") ==
        doctest::Approx(0.8112781).epsilon(1e-6));
  CHECK_THROWS_AS(impurity(std::vector<double>{0, 0}, "gini"), EmptyNode);
  CHECK_THROWS_AS(impurity(std::vector<double>{1, 1}, "misclass"),
                  InvalidHyperparameter);
}

TEST_CASE("minkowski distances") {
  std::vector<double> x{1, 2}, y{4, 6};
  CHECK(knn_distance(x, y, 2) == doctest::Approx(5.0));
  CHECK(knn_distance(x, y, 1) == doctest::Approx(7.0));
  std::vector<double> a{0, 0}, b{1, 1};
  CHECK(knn_distance(a, b, 3) == doctest::Approx(1.259921).epsilon(1e-6));
  std::vector<double> short_vec{1};
  CHECK_THROWS_AS(knn_distance(x, short_vec, 2), DimensionMismatch);
}

// ---- fit/predict contracts ----

TEST_CASE("fit rejects bad inputs") {
  auto ds = testutil::toy_dataset();
  CHECK_THROWS_AS(fit(spec_of(Kind::DecisionTree, {{"criterion", "mse"}}), ds, 0),
                  InvalidHyperparameter);
  dataset::LabeledDataset single = ds;
  for (auto& y : single.y) y = LabelClass::Normal;
  CHECK_THROWS_AS(fit(default_spec(Kind::GaussianNB), single, 0),
                  SingleClassDataset);
}

TEST_CASE("predict validates its input vector") {
  auto model = fit(default_spec(Kind::GaussianNB), testutil::toy_dataset(), 0);
  CHECK_THROWS_AS(model->predict(std::vector<double>{1.0}), DimensionMismatch);
  std::vector<double> nan_vec{std::nan(""), 1.0};
  CHECK_THROWS_AS(model->predict(nan_vec), NonFiniteInput);
}

TEST_CASE("gnb separates a two-point dataset") {
  dataset::LabeledDataset ds;
  ds.feature_names = {"f0"};
  ds.x = {0.0, 10.0};
  ds.y = {LabelClass::Normal, LabelClass::Botnet};
  auto model = fit(default_spec(Kind::GaussianNB), ds, 0);
  CHECK(model->predict(std::vector<double>{1.0}) == LabelClass::Normal);
  CHECK(model->predict(std::vector<double>{9.0}) == LabelClass::Botnet);
  // Fitted per-class means are the training points themselves.
  auto* gnb = dynamic_cast<impl::GnbModel*>(model.get());
  REQUIRE(gnb != nullptr);
  CHECK(gnb->mean[0][0] == doctest::Approx(0.0));
  CHECK(gnb->mean[1][0] == doctest::Approx(10.0));
}

TEST_CASE("gnb argmax matches a closed-form Bayes oracle") {
  dataset::LabeledDataset ds;
  ds.feature_names = {"f0", "f1"};
  auto add = [&](double a, double b, LabelClass y) {
    ds.x.push_back(a);
    ds.x.push_back(b);
    ds.y.push_back(y);
  };
  add(1.0, 2.0, LabelClass::Normal);
  add(1.5, 1.8, LabelClass::Normal);
  add(0.8, 2.4, LabelClass::Normal);
  add(1.2, 2.1, LabelClass::Normal);
  add(6.0, -1.0, LabelClass::Botnet);
  add(6.5, -0.6, LabelClass::Botnet);

  // Independent oracle: means/variances/priors computed longhand.
  double m0[2] = {0, 0}, m1[2] = {0, 0}, v0[2] = {0, 0}, v1[2] = {0, 0};
  double max_var = 0;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 4; ++i) m0[j] += ds.row(i)[j] / 4.0;
    for (int i = 4; i < 6; ++i) m1[j] += ds.row(i)[j] / 2.0;
    for (int i = 0; i < 4; ++i)
      v0[j] += (ds.row(i)[j] - m0[j]) * (ds.row(i)[j] - m0[j]) / 4.0;
    for (int i = 4; i < 6; ++i)
      v1[j] += (ds.row(i)[j] - m1[j]) * (ds.row(i)[j] - m1[j]) / 2.0;
    max_var = std::max({max_var, v0[j], v1[j]});
  }
  double eps = 1e-9 * std::max(max_var, 1.0);
  auto oracle = [&](double x0, double x1) {
    auto logp = [&](const double* m, const double* v, double prior) {
      double x[2] = {x0, x1};
      double s = std::log(prior);
      for (int j = 0; j < 2; ++j) {
        double var = v[j] + eps;
        s += -0.5 * std::log(2 * M_PI * var) -
             (x[j] - m[j]) * (x[j] - m[j]) / (2 * var);
      }
      return s;
    };
    return logp(m1, v1, 2.0 / 6.0) > logp(m0, v0, 4.0 / 6.0)
               ? LabelClass::Botnet
               : LabelClass::Normal;
  };

  auto model = fit(default_spec(Kind::GaussianNB), ds, 0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 9);
  for (int q = 0; q < 20; ++q) {
    double x0 = u(rng), x1 = u(rng);
    CHECK(model->predict(std::vector<double>{x0, x1}) == oracle(x0, x1));
  }
}

TEST_CASE("unconstrained decision tree memorizes consistent data") {
  auto ds = random_dataset(120, 4, 3);
  auto model = fit(default_spec(Kind::DecisionTree), ds, 0);
  CHECK(training_accuracy(*model, ds) == doctest::Approx(1.0));
}

TEST_CASE("single-tree forest without bootstrap equals a decision tree") {
  auto ds = random_dataset(200, 5, 9);
  auto tree = fit(default_spec(Kind::DecisionTree), ds, 123);
  auto forest = fit(spec_of(Kind::RandomForest, {{"n_estimators", 1},
                                                 {"bootstrap", "false"}}),
                    ds, 123);
  for (std::size_t i = 0; i < ds.rows(); ++i)
    REQUIRE(tree->predict({ds.row(i), ds.cols()}) ==
            forest->predict({ds.row(i), ds.cols()}));
}

TEST_CASE("random forest is seed-deterministic") {
  auto ds = random_dataset(80, 4, 21);
  auto a = fit(default_spec(Kind::RandomForest), ds, 77);
  auto b = fit(default_spec(Kind::RandomForest), ds, 77);
  auto c = fit(default_spec(Kind::RandomForest), ds, 78);
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-12, 12);
  int differs = 0;
  for (int q = 0; q < 500; ++q) {
    std::vector<double> x(ds.cols());
    for (auto& xi : x) xi = u(rng);
    REQUIRE(a->predict(x) == b->predict(x));
    differs += a->predict(x) != c->predict(x);
  }
  // A different seed grows different trees; the models should not coincide
  // everywhere on out-of-sample queries.
  CHECK(differs > 0);
}

TEST_CASE("adaboost variants learn a separable set") {
  auto ds = testutil::synthetic_dataset(300, 0.3, 31);
  for (const char* algo : {"SAMME", "SAMME.R"}) {
    auto model = fit(spec_of(Kind::AdaBoost, {{"algorithm", algo},
                                              {"n_estimators", 20}}),
                     ds, 5);
    CHECK(training_accuracy(*model, ds) > 0.97);
  }
}

TEST_CASE("svm objective never exceeds its value at initialization") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto ds = testutil::synthetic_dataset(150, 0.4, seed);
    for (const char* loss : {"hinge", "squared_hinge"}) {
      auto model = fit(spec_of(Kind::LinearSVM, {{"loss", loss}}), ds, seed);
      auto* svm = dynamic_cast<impl::SvmModel*>(model.get());
      REQUIRE(svm != nullptr);
      CHECK(svm->final_objective <= svm->initial_objective + 1e-9);
    }
  }
}

TEST_CASE("knn k=1 returns the stored label of a training point") {
  auto ds = testutil::toy_dataset();
  auto model = fit(spec_of(Kind::KNN, {{"n_neighbors", 1}}), ds, 0);
  for (std::size_t i = 0; i < ds.rows(); ++i)
    CHECK(model->predict({ds.row(i), ds.cols()}) == ds.y[i]);
}

TEST_CASE("knn tree path equals brute force on 500 random rows") {
  auto ds = random_dataset(500, 6, 55);
  for (int k : {1, 3, 7}) {
    for (int p : {1, 2, 3}) {
      auto brute = fit(spec_of(Kind::KNN, {{"n_neighbors", k},
                                           {"p", p},
                                           {"algorithm", "brute"}}),
                       ds, 0);
      auto tree = fit(spec_of(Kind::KNN, {{"n_neighbors", k},
                                          {"p", p},
                                          {"algorithm", "kd_tree"},
                                          {"leaf_size", 4}}),
                      ds, 0);
      std::mt19937_64 rng(1000 + k + p);
      std::uniform_real_distribution<double> u(-12, 12);
      for (int q = 0; q < 500; ++q) {
        std::vector<double> x(ds.cols());
        for (auto& xi : x) xi = u(rng);
        REQUIRE(brute->predict(x) == tree->predict(x));
      }
    }
  }
}

TEST_CASE("knn distance weighting lets exact matches dominate") {
  dataset::LabeledDataset ds;
  ds.feature_names = {"f0"};
  ds.x = {0.0, 0.1, 0.2};
  ds.y = {LabelClass::Botnet, LabelClass::Normal, LabelClass::Normal};
  auto model = fit(spec_of(Kind::KNN, {{"n_neighbors", 3},
                                       {"weights", "distance"}}),
                   ds, 0);
  // Query at the stored Botnet point: zero distance beats two closer-by-mass
  // Normal neighbors.
  CHECK(model->predict(std::vector<double>{0.0}) == LabelClass::Botnet);
}

TEST_CASE("gnb and knn are invariant to training row order") {
  auto ds = random_dataset(60, 3, 66);
  dataset::LabeledDataset rev = ds;
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    for (std::size_t j = 0; j < ds.cols(); ++j)
      rev.x[i * ds.cols() + j] = ds.row(ds.rows() - 1 - i)[j];
    rev.y[i] = ds.y[ds.rows() - 1 - i];
  }
  for (Kind kind : {Kind::GaussianNB, Kind::KNN}) {
    auto a = fit(default_spec(kind), ds, 0);
    auto b = fit(default_spec(kind), rev, 0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-12, 12);
    for (int q = 0; q < 200; ++q) {
      std::vector<double> x(ds.cols());
      for (auto& xi : x) xi = u(rng);
      REQUIRE(a->predict(x) == b->predict(x));
    }
  }
}

// ---- importances ----

TEST_CASE("depth-1 tree puts all importance on the single informative split") {
  auto ds = testutil::toy_dataset();
  auto model = fit(default_spec(Kind::DecisionTree), ds, 0);
  auto imp = model->feature_importances();
  REQUIRE(imp.size() == 2);
  CHECK(imp[0] == doctest::Approx(1.0));
  CHECK(imp[1] == doctest::Approx(0.0));
}

TEST_CASE("importances are defined only for tree-family models") {
  auto ds = testutil::toy_dataset();
  CHECK_THROWS_AS(fit(default_spec(Kind::GaussianNB), ds, 0)->feature_importances(),
                  UnsupportedKind);
  CHECK_THROWS_AS(fit(default_spec(Kind::LinearSVM), ds, 0)->feature_importances(),
                  UnsupportedKind);
  CHECK_THROWS_AS(fit(default_spec(Kind::KNN), ds, 0)->feature_importances(),
                  UnsupportedKind);
  for (Kind k : {Kind::DecisionTree, Kind::RandomForest, Kind::AdaBoost}) {
    auto imp = fit(default_spec(k), ds, 0)->feature_importances();
    double sum = 0;
    for (double v : imp) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("rf ranks a planted informative feature first") {
  int informative_first = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-1, 1);
    dataset::LabeledDataset ds;
    ds.feature_names = {"planted", "noise1", "noise2"};
    for (int i = 0; i < 60; ++i) {
      bool botnet = i % 3 == 0;
      ds.x.push_back(botnet ? 5.0 + noise(rng) : -5.0 + noise(rng));
      ds.x.push_back(noise(rng));
      ds.x.push_back(noise(rng));
      ds.y.push_back(botnet ? LabelClass::Botnet : LabelClass::Normal);
    }
    auto spec = spec_of(Kind::RandomForest, {{"n_estimators", 20}});
    auto imp = fit(spec, ds, seed)->feature_importances();
    if (imp[0] > imp[1] && imp[0] > imp[2]) ++informative_first;
  }
  CHECK(informative_first >= 95);
}

// ---- serialization ----

TEST_CASE("serialization round trip for every kind") {
  auto ds = testutil::synthetic_dataset(120, 0.3, 8);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1e4, 1e5);
  for (Kind k : {Kind::GaussianNB, Kind::DecisionTree, Kind::RandomForest,
                 Kind::AdaBoost, Kind::LinearSVM, Kind::KNN}) {
    auto model = fit(default_spec(k), ds, 4);
    std::ostringstream first;
    model->save(first);
    std::istringstream in(first.str());
    auto back = load_model(in);
    // Bitwise-equal parameters: re-serialization is byte-identical.
    std::ostringstream second;
    back->save(second);
    CHECK(first.str() == second.str());
    CHECK(back->spec().kind == k);
    CHECK(back->feature_names() == model->feature_names());
    for (int q = 0; q < 1000; ++q) {
      std::vector<double> x(ds.cols());
      for (auto& xi : x) xi = u(rng);
      REQUIRE(model->predict(x) == back->predict(x));
    }
  }
}

TEST_CASE("foreign versions and damaged bytes are rejected") {
  auto model = fit(default_spec(Kind::GaussianNB), testutil::toy_dataset(), 0);
  std::ostringstream out;
  model->save(out);
  std::string bytes = out.str();

  std::string wrong_version = bytes;
  wrong_version[4] = static_cast<char>(0xe7);  // version 999 little-endian
  wrong_version[5] = 0x03;
  std::istringstream v(wrong_version);
  CHECK_THROWS_AS(load_model(v), VersionMismatch);

  std::istringstream trunc(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_model(trunc), Corrupt);

  std::istringstream garbage(std::string("XXXXGARBAGE"));
  CHECK_THROWS_AS(load_model(garbage), Corrupt);
}

TEST_CASE("golden model file stays loadable and stable") {
  const char* path = GOLDEN_DIR "/gnb_v1.model";
  auto model = load_model_file(path);
  CHECK(model->spec().kind == Kind::GaussianNB);
  REQUIRE(model->feature_names() ==
          std::vector<std::string>{"sTtl", "SrcBytes"});
  // Decision boundary of the frozen toy model.
  CHECK(model->predict(std::vector<double>{45.0, 120.0}) == LabelClass::Botnet);
  CHECK(model->predict(std::vector<double>{120.0, 6000.0}) == LabelClass::Normal);
  // Re-serialization reproduces the golden bytes exactly.
  std::ifstream in(path, std::ios::binary);
  std::string golden((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
  std::ostringstream out;
  model->save(out);
  CHECK(out.str() == golden);
}

TEST_CASE("fit time is recorded") {
  auto model = fit(default_spec(Kind::RandomForest),
                   testutil::synthetic_dataset(200, 0.3, 2), 0);
  CHECK(model->fit_time_s() >= 0.0);
  CHECK(model->fit_time_s() < 60.0);
}
