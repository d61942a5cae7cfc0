#pragma once
// Uniform fit/predict surface over the six classifier families, plus the
// versioned binary model serialization.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flowhawk/classifiers/spec.hpp"
#include "flowhawk/dataset.hpp"

namespace flowhawk::classifiers {

struct VersionMismatch : ClassifierError {
  explicit VersionMismatch(std::uint32_t got)
      : ClassifierError("unsupported model format version " +
                        std::to_string(got)) {}
};
struct Corrupt : ClassifierError {
  explicit Corrupt(const std::string& what)
      : ClassifierError("corrupt model data: " + what) {}
};

class Model {
 public:
  virtual ~Model() = default;

  const ClassifierSpec& spec() const { return spec_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::string& trained_on() const { return trained_on_; }
  double fit_time_s() const { return fit_time_s_; }

  LabelClass predict(std::span<const double> x) const;

  // Impurity-decrease importances, normalized to sum 1. Throws
  // UnsupportedKind for GNB, LinearSVM and kNN.
  virtual std::vector<double> feature_importances() const {
    throw UnsupportedKind(spec_.kind);
  }

  void save(std::ostream& out) const;

 protected:
  virtual LabelClass predict_checked(std::span<const double> x) const = 0;
  virtual void save_params(std::ostream& out) const = 0;
  virtual std::uint8_t kind_tag() const = 0;

  ClassifierSpec spec_;
  std::vector<std::string> feature_names_;
  std::string trained_on_;
  double fit_time_s_ = 0.0;

  friend std::shared_ptr<Model> fit(const ClassifierSpec&,
                                    const dataset::LabeledDataset&,
                                    std::uint64_t);
  friend std::shared_ptr<Model> load_model(std::istream&);
};

using ModelPtr = std::shared_ptr<Model>;

// Trains a model; deterministic given (spec, ds, seed).
ModelPtr fit(const ClassifierSpec& spec, const dataset::LabeledDataset& ds,
             std::uint64_t seed);

// Inverse of Model::save. Throws VersionMismatch / Corrupt.
ModelPtr load_model(std::istream& in);
ModelPtr load_model_file(const std::string& path);
void save_model_file(const Model& model, const std::string& path);

// Node impurity for the tree criteria; 0*log 0 := 0 for entropy.
double impurity(std::span<const double> class_counts, const std::string& criterion);

// Minkowski-family point distance (p=2 Euclidean, p=1 Manhattan).
double knn_distance(std::span<const double> x, std::span<const double> y, double p);

}  // namespace flowhawk::classifiers
