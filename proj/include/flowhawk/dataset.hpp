#pragma once
// Labeled flow files to model-ready numeric matrices, plus stratified k-fold
// split planning.

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowhawk/flowcore.hpp"

namespace flowhawk::dataset {

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonNumericFeature : DatasetError {
  explicit NonNumericFeature(const std::string& name)
      : DatasetError("feature '" + name +
                     "' is excluded from the numeric feature set") {}
};
struct TooFewSamples : DatasetError {
  TooFewSamples(const std::string& cls, std::size_t count, int k)
      : DatasetError("class " + cls + " has " + std::to_string(count) +
                     " samples, fewer than k=" + std::to_string(k)) {}
};
struct EmptyDataset : DatasetError {
  EmptyDataset() : DatasetError("dataset is empty") {}
};

// Row-major feature matrix with binary labels.
struct LabeledDataset {
  std::vector<double> x;  // rows * cols, row-major
  std::vector<LabelClass> y;
  std::vector<std::string> feature_names;
  std::string provenance;

  std::size_t rows() const { return y.size(); }
  std::size_t cols() const { return feature_names.size(); }
  const double* row(std::size_t i) const { return x.data() + i * cols(); }
};

struct ClassCounts {
  std::size_t normal_count = 0;
  std::size_t botnet_count = 0;
  double botnet_pct = 0.0;  // 100 * botnet / total, 2-decimal convention
};

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // per-row fold index in [0, k)
  std::uint64_t seed = 0;
};

// Labels each flow by infected-IP membership: Botnet iff either endpoint is
// in the set.
void label_by_ip(std::vector<FlowRecord>& flows,
                 const std::set<std::string>& infected_ips);

// Builds the numeric matrix from labeled flows. Background-labeled rows
// (neither Normal nor Botnet) are dropped; dropped count is reported through
// background_dropped when provided.
LabeledDataset build_matrix(const std::vector<FlowRecord>& flows,
                            const std::vector<std::string>& features =
                                numeric_feature_names(),
                            std::size_t* background_dropped = nullptr);

ClassCounts class_distribution(const LabeledDataset& ds);

// Seed-deterministic stratified split; per-fold class counts are within 1 of
// exact proportionality.
FoldPlan stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed);

// Reads a .binetflow file (header line + flow lines).
std::vector<FlowRecord> read_flow_file(const std::string& path);
void write_flow_file(const std::string& path,
                     const std::vector<FlowRecord>& flows,
                     const std::vector<std::string>& field_order =
                         extended_field_order());

// Newline-delimited infected-IP list; '#' comments and blank lines ignored.
std::set<std::string> read_ip_list(const std::string& path);

// Restriction of ds to the given rows (training split assembly).
LabeledDataset subset(const LabeledDataset& ds, const std::vector<std::size_t>& rows);

}  // namespace flowhawk::dataset
