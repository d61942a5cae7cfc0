#pragma once
// Concrete model classes shared between fit, predict and serialization.

#include <array>
#include <cstdint>
#include <random>

#include "flowhawk/classifiers/model.hpp"

namespace flowhawk::classifiers::impl {

// ---- decision tree core (shared by DT, RF, AdaBoost stumps) ----

struct TreeNode {
  std::int32_t feature = -1;  // -1: leaf
  double threshold = 0.0;
  std::int32_t left = -1, right = -1;
  double w0 = 0.0, w1 = 0.0;  // class-weighted sample mass (Normal, Botnet)
  double weight = 0.0;        // total weighted mass at this node
  double imp = 0.0;           // node impurity at build time
};

struct Tree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(const double* x) const;
  LabelClass predict(const double* x) const;
  std::array<double, 2> leaf_proba(const double* x) const;
  // Unnormalized impurity-decrease importances.
  std::vector<double> raw_importances(std::size_t n_features) const;
};

struct TreeParams {
  std::string criterion = "gini";
  bool random_splitter = false;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  double min_weight_fraction_leaf = 0.0;
  int max_depth = -1;        // -1: unbounded
  std::size_t max_features = 0;  // 0: all features at every split
};

Tree build_tree(const dataset::LabeledDataset& ds,
                std::span<const double> sample_weights, const TreeParams& params,
                std::mt19937_64& rng);

// Per-class weights for class_weight='balanced': n / (2 * count_c).
std::array<double, 2> balanced_class_weights(const dataset::LabeledDataset& ds);

// ---- concrete models ----

class GnbModel final : public Model {
 public:
  std::vector<double> mean[2], var[2];
  double log_prior[2] = {0, 0};

 protected:
  LabelClass predict_checked(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  std::uint8_t kind_tag() const override { return 0; }
  friend ModelPtr fit_gnb(const ClassifierSpec&, const dataset::LabeledDataset&,
                          std::uint64_t);
};

class TreeModel final : public Model {
 public:
  Tree tree;
  std::vector<double> feature_importances() const override;

 protected:
  LabelClass predict_checked(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  std::uint8_t kind_tag() const override { return 1; }
};

class ForestModel final : public Model {
 public:
  std::vector<Tree> trees;
  std::vector<double> feature_importances() const override;

 protected:
  LabelClass predict_checked(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  std::uint8_t kind_tag() const override { return 2; }
};

class AdaBoostModel final : public Model {
 public:
  std::vector<Tree> learners;
  std::vector<double> alphas;  // SAMME stage weights; unused for SAMME.R
  bool real_boosting = false;  // SAMME.R
  std::vector<double> feature_importances() const override;

 protected:
  LabelClass predict_checked(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  std::uint8_t kind_tag() const override { return 3; }
};

class SvmModel final : public Model {
 public:
  std::vector<double> w;
  double b = 0.0;
  double final_objective = 0.0;
  double initial_objective = 0.0;

 protected:
  LabelClass predict_checked(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  std::uint8_t kind_tag() const override { return 4; }
};

class KnnModel final : public Model {
 public:
  // Stored training set, row-major.
  std::vector<double> train_x;
  std::vector<LabelClass> train_y;
  int k = 5;
  double p = 2.0;
  bool distance_weighted = false;
  std::string algorithm = "auto";
  int leaf_size = 30;
  std::string tie_break = "majority";
  LabelClass majority_class = LabelClass::Normal;

  std::size_t n_train() const { return train_y.size(); }
  const double* train_row(std::size_t i) const {
    return train_x.data() + i * feature_names_.size();
  }

  // (powsum distance, row index) of the k nearest, sorted ascending.
  std::vector<std::pair<double, std::size_t>> neighbors_brute(
      std::span<const double> x) const;
  std::vector<std::pair<double, std::size_t>> neighbors_tree(
      std::span<const double> x) const;

  void build_index();  // kd-tree; rebuilt after deserialization

 protected:
  LabelClass predict_checked(std::span<const double> x) const override;
  void save_params(std::ostream& out) const override;
  std::uint8_t kind_tag() const override { return 5; }

 private:
  struct KdNode {
    std::int32_t axis = -1;  // -1: leaf
    double split = 0.0;
    std::int32_t left = -1, right = -1;
    std::uint32_t begin = 0, end = 0;  // leaf range into order_
  };
  std::vector<KdNode> kd_nodes_;
  std::vector<std::uint32_t> order_;
  std::int32_t build_kd(std::uint32_t begin, std::uint32_t end, int depth);
  LabelClass vote(const std::vector<std::pair<double, std::size_t>>& nn) const;
  friend ModelPtr fit_knn(const ClassifierSpec&, const dataset::LabeledDataset&,
                          std::uint64_t);
};

// Per-kind fit entry points.
ModelPtr fit_gnb(const ClassifierSpec&, const dataset::LabeledDataset&, std::uint64_t);
ModelPtr fit_tree(const ClassifierSpec&, const dataset::LabeledDataset&, std::uint64_t);
ModelPtr fit_forest(const ClassifierSpec&, const dataset::LabeledDataset&, std::uint64_t);
ModelPtr fit_adaboost(const ClassifierSpec&, const dataset::LabeledDataset&, std::uint64_t);
ModelPtr fit_svm(const ClassifierSpec&, const dataset::LabeledDataset&, std::uint64_t);
ModelPtr fit_knn(const ClassifierSpec&, const dataset::LabeledDataset&, std::uint64_t);

}  // namespace flowhawk::classifiers::impl
