#pragma once
// Classifier kinds, typed hyperparameter values, and the per-kind schema
// registry. The same schemas back spec validation and the optimizer's gene
// pools.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace flowhawk::classifiers {

enum class Kind {
  GaussianNB,
  DecisionTree,
  RandomForest,
  AdaBoost,
  LinearSVM,
  KNN,
};

const char* to_string(Kind k);
Kind kind_from_string(const std::string& name);

// A hyperparameter value: absent ("None"), integer, float, or categorical.
struct Value {
  std::variant<std::monostate, std::int64_t, double, std::string> v;

  Value() = default;
  Value(std::int64_t i) : v(i) {}
  Value(int i) : v(static_cast<std::int64_t>(i)) {}
  Value(double d) : v(d) {}
  Value(const char* s) : v(std::string(s)) {}
  Value(std::string s) : v(std::move(s)) {}

  bool is_none() const { return std::holds_alternative<std::monostate>(v); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_float() const { return std::holds_alternative<double>(v); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v); }
  double as_float() const {
    return is_int() ? static_cast<double>(as_int()) : std::get<double>(v);
  }
  const std::string& as_string() const { return std::get<std::string>(v); }

  static Value none() { return Value(); }
  std::string repr() const;  // "None", "42", "0.100000", "'gini'"
  bool operator==(const Value&) const = default;
};

enum class GeneType { Categorical, Integer, Float };

// One hyperparameter's legal domain.
struct GeneSpec {
  std::string name;
  GeneType type = GeneType::Categorical;
  std::vector<std::string> categories;  // categorical domains
  double low = 0.0, high = 0.0;         // inclusive numeric range
  bool allow_none = false;
  Value default_value;
  bool in_gene_pool = true;  // false: spec-only knob, never searched

  bool contains(const Value& val) const;
};

struct ClassifierSpec {
  Kind kind = Kind::GaussianNB;
  std::map<std::string, Value> hyperparameters;

  // Value for name, falling back to the schema default.
  Value get(const std::string& name) const;
  bool operator==(const ClassifierSpec&) const = default;
};

struct ClassifierError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidHyperparameter : ClassifierError {
  using ClassifierError::ClassifierError;
};
struct SingleClassDataset : ClassifierError {
  SingleClassDataset() : ClassifierError("training data has a single class") {}
};
struct DimensionMismatch : ClassifierError {
  DimensionMismatch(std::size_t got, std::size_t want)
      : ClassifierError("feature vector length " + std::to_string(got) +
                        ", model expects " + std::to_string(want)) {}
};
struct NonFiniteInput : ClassifierError {
  NonFiniteInput() : ClassifierError("non-finite value in feature vector") {}
};
struct UnsupportedKind : ClassifierError {
  explicit UnsupportedKind(Kind k)
      : ClassifierError(std::string(to_string(k)) +
                        " does not define feature importances") {}
};
struct EmptyNode : ClassifierError {
  EmptyNode() : ClassifierError("impurity of an empty node") {}
};

// Ordered schema for a kind; the gene-pool subset mirrors the search-space
// tables, extra knobs (e.g. random forest bootstrap) are spec-only.
const std::vector<GeneSpec>& schema(Kind kind);

// The schema entry for one hyperparameter name.
const GeneSpec& schema_entry(Kind kind, const std::string& name);

// Throws InvalidHyperparameter on unknown names or out-of-domain values.
void validate_spec(const ClassifierSpec& spec);

// Spec with every hyperparameter at its default.
ClassifierSpec default_spec(Kind kind);

}  // namespace flowhawk::classifiers
