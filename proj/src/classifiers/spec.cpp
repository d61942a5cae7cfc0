#include "flowhawk/classifiers/spec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace flowhawk::classifiers {

const char* to_string(Kind k) {
  switch (k) {
    case Kind::GaussianNB: return "gaussian_nb";
    case Kind::DecisionTree: return "decision_tree";
    case Kind::RandomForest: return "random_forest";
    case Kind::AdaBoost: return "ada_boost";
    case Kind::LinearSVM: return "linear_svm";
    case Kind::KNN: return "knn";
  }
  return "?";
}

Kind kind_from_string(const std::string& name) {
  for (Kind k : {Kind::GaussianNB, Kind::DecisionTree, Kind::RandomForest,
                 Kind::AdaBoost, Kind::LinearSVM, Kind::KNN})
    if (name == to_string(k)) return k;
  throw InvalidHyperparameter("unknown classifier kind '" + name + "'");
}

std::string Value::repr() const {
  if (is_none()) return "None";
  if (is_int()) return std::to_string(as_int());
  if (is_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%f", std::get<double>(v));
    return buf;
  }
  return "'" + as_string() + "'";
}

bool GeneSpec::contains(const Value& val) const {
  if (val.is_none()) return allow_none;
  switch (type) {
    case GeneType::Categorical:
      return val.is_string() &&
             std::find(categories.begin(), categories.end(), val.as_string()) !=
                 categories.end();
    case GeneType::Integer:
      return val.is_int() && val.as_int() >= static_cast<std::int64_t>(low) &&
             val.as_int() <= static_cast<std::int64_t>(high);
    case GeneType::Float:
      return (val.is_float() || val.is_int()) && std::isfinite(val.as_float()) &&
             val.as_float() >= low && val.as_float() <= high;
  }
  return false;
}

namespace {

GeneSpec cat(const char* name, std::vector<std::string> cats, Value def,
             bool allow_none = false, bool in_pool = true) {
  GeneSpec g;
  g.name = name;
  g.type = GeneType::Categorical;
  g.categories = std::move(cats);
  g.allow_none = allow_none;
  g.default_value = std::move(def);
  g.in_gene_pool = in_pool;
  return g;
}

GeneSpec integer(const char* name, std::int64_t lo, std::int64_t hi, Value def,
                 bool allow_none = false) {
  GeneSpec g;
  g.name = name;
  g.type = GeneType::Integer;
  g.low = static_cast<double>(lo);
  g.high = static_cast<double>(hi);
  g.allow_none = allow_none;
  g.default_value = std::move(def);
  return g;
}

GeneSpec real(const char* name, double lo, double hi, Value def) {
  GeneSpec g;
  g.name = name;
  g.type = GeneType::Float;
  g.low = lo;
  g.high = hi;
  g.default_value = std::move(def);
  return g;
}

std::vector<GeneSpec> tree_genes() {
  return {
      cat("criterion", {"gini", "entropy"}, "gini"),
      cat("splitter", {"best", "random"}, "best"),
      integer("min_samples_split", 2, 5, 2),
      integer("min_samples_leaf", 1, 4, 1),
      real("min_weight_fraction_leaf", 0.0, 0.1, 0.0),
      cat("class_weight", {"balanced"}, Value::none(), /*allow_none=*/true),
  };
}

}  // namespace

const std::vector<GeneSpec>& schema(Kind kind) {
  static const std::vector<GeneSpec> gnb = {};
  static const std::vector<GeneSpec> dt = tree_genes();
  static const std::vector<GeneSpec> rf = [] {
    std::vector<GeneSpec> g;
    g.push_back(integer("n_estimators", 1, 200, 100));
    for (auto& t : tree_genes()) {
      // The forest search space has no splitter gene; keep it spec-only.
      if (t.name == "splitter") t.in_gene_pool = false;
      g.push_back(t);
    }
    // Spec-only knobs, not part of the search space.
    g.push_back(cat("bootstrap", {"true", "false"}, "true", false, false));
    g.push_back(cat("max_features", {"sqrt", "all"}, "sqrt", false, false));
    return g;
  }();
  static const std::vector<GeneSpec> ada = {
      integer("n_estimators", 5, 100, 50),
      real("learning_rate", 0.1, 1.0, 1.0),
      cat("algorithm", {"SAMME", "SAMME.R"}, "SAMME.R"),
      integer("random_state", 1, 50, Value::none(), /*allow_none=*/true),
  };
  static const std::vector<GeneSpec> svm = {
      cat("loss", {"hinge", "squared_hinge"}, "squared_hinge"),
      real("tol", 1e-5, 0.1, 1e-4),
      real("c", 1.0, 5.0, 1.0),
  };
  static const std::vector<GeneSpec> knn = {
      integer("n_neighbors", 1, 10, 5),
      cat("weights", {"uniform", "distance"}, "uniform"),
      // ball_tree and kd_tree are equivalent-result accelerators; auto lets
      // small datasets fall back to brute force.
      cat("algorithm", {"auto", "ball_tree", "kd_tree", "brute"}, "auto"),
      integer("leaf_size", 1, 50, 30),
      integer("p", 1, 5, 2),
      cat("tie_break", {"majority", "normal", "botnet"}, "majority", false,
          false),
  };
  switch (kind) {
    case Kind::GaussianNB: return gnb;
    case Kind::DecisionTree: return dt;
    case Kind::RandomForest: return rf;
    case Kind::AdaBoost: return ada;
    case Kind::LinearSVM: return svm;
    case Kind::KNN: return knn;
  }
  return gnb;
}

const GeneSpec& schema_entry(Kind kind, const std::string& name) {
  for (const auto& g : schema(kind))
    if (g.name == name) return g;
  throw InvalidHyperparameter(std::string(to_string(kind)) +
                              " has no hyperparameter '" + name + "'");
}

void validate_spec(const ClassifierSpec& spec) {
  for (const auto& [name, value] : spec.hyperparameters) {
    const GeneSpec& g = schema_entry(spec.kind, name);
    if (!g.contains(value))
      throw InvalidHyperparameter(std::string(to_string(spec.kind)) + "." +
                                  name + " = " + value.repr() +
                                  " is outside its domain");
  }
}

ClassifierSpec default_spec(Kind kind) {
  ClassifierSpec spec;
  spec.kind = kind;
  for (const auto& g : schema(kind)) spec.hyperparameters[g.name] = g.default_value;
  return spec;
}

Value ClassifierSpec::get(const std::string& name) const {
  auto it = hyperparameters.find(name);
  if (it != hyperparameters.end()) return it->second;
  return schema_entry(kind, name).default_value;
}

}  // namespace flowhawk::classifiers
