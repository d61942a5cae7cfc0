#pragma once
// Random-Forest feature importance ranking and top-k selection.

#include <string>
#include <vector>

#include "flowhawk/classifiers/model.hpp"
#include "flowhawk/dataset.hpp"

namespace flowhawk::featsel {

struct FeatselError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct KTooLarge : FeatselError {
  KTooLarge(std::size_t k, std::size_t n)
      : FeatselError("cannot select top " + std::to_string(k) + " of " +
                     std::to_string(n) + " ranked features") {}
};
struct NameSetMismatch : FeatselError {
  NameSetMismatch() : FeatselError("rankings cover different feature-name sets") {}
};

struct RankedFeature {
  std::string name;
  double importance = 0.0;
};

constexpr std::size_t kDefaultTopK = 15;

// Fits a Random Forest and returns (name, importance) descending; importances
// sum to 1. Ties break by lexicographic name order.
std::vector<RankedFeature> rank_features(const dataset::LabeledDataset& ds,
                                         const classifiers::ClassifierSpec& rf_spec,
                                         std::uint64_t seed);
std::vector<RankedFeature> rank_features(const dataset::LabeledDataset& ds,
                                         std::uint64_t seed);

// First k names in rank order.
std::vector<std::string> select_top_k(const std::vector<RankedFeature>& ranked,
                                      std::size_t k = kDefaultTopK);

// Arithmetic mean per feature across rankings, descending. All rankings must
// cover the same name set.
std::vector<RankedFeature> average_importances(
    const std::vector<std::vector<RankedFeature>>& per_dataset);

// Two-column text table: name, value to 6 decimals.
std::string importance_table(const std::vector<RankedFeature>& ranked);

}  // namespace flowhawk::featsel
