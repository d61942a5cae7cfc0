#include "flowhawk/featsel.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace flowhawk::featsel {

namespace {

void sort_ranked(std::vector<RankedFeature>& ranked) {
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedFeature& a, const RankedFeature& b) {
              if (a.importance != b.importance) return a.importance > b.importance;
              return a.name < b.name;
            });
}

}  // namespace

std::vector<RankedFeature> rank_features(const dataset::LabeledDataset& ds,
                                         const classifiers::ClassifierSpec& rf_spec,
                                         std::uint64_t seed) {
  if (rf_spec.kind != classifiers::Kind::RandomForest)
    throw FeatselError("feature ranking requires a random_forest spec");
  auto model = classifiers::fit(rf_spec, ds, seed);
  auto importances = model->feature_importances();
  std::vector<RankedFeature> ranked;
  ranked.reserve(ds.cols());
  for (std::size_t j = 0; j < ds.cols(); ++j)
    ranked.push_back({ds.feature_names[j], importances[j]});
  sort_ranked(ranked);
  return ranked;
}

std::vector<RankedFeature> rank_features(const dataset::LabeledDataset& ds,
                                         std::uint64_t seed) {
  return rank_features(
      ds, classifiers::default_spec(classifiers::Kind::RandomForest), seed);
}

std::vector<std::string> select_top_k(const std::vector<RankedFeature>& ranked,
                                      std::size_t k) {
  if (k > ranked.size()) throw KTooLarge(k, ranked.size());
  std::vector<std::string> names;
  names.reserve(k);
  for (std::size_t i = 0; i < k; ++i) names.push_back(ranked[i].name);
  return names;
}

std::vector<RankedFeature> average_importances(
    const std::vector<std::vector<RankedFeature>>& per_dataset) {
  if (per_dataset.empty()) throw FeatselError("no rankings to average");
  std::map<std::string, double> sums;
  for (const auto& rf : per_dataset[0]) sums[rf.name] = 0.0;
  for (const auto& ranking : per_dataset) {
    if (ranking.size() != sums.size()) throw NameSetMismatch();
    for (const auto& rf : ranking) {
      auto it = sums.find(rf.name);
      if (it == sums.end()) throw NameSetMismatch();
      it->second += rf.importance;
    }
  }
  std::vector<RankedFeature> mean;
  mean.reserve(sums.size());
  for (const auto& [name, sum] : sums)
    mean.push_back({name, sum / static_cast<double>(per_dataset.size())});
  sort_ranked(mean);
  return mean;
}

std::string importance_table(const std::vector<RankedFeature>& ranked) {
  std::string out;
  char buf[128];
  for (const auto& rf : ranked) {
    std::snprintf(buf, sizeof(buf), "%s\t%.6f\n", rf.name.c_str(), rf.importance);
    out += buf;
  }
  return out;
}

}  // namespace flowhawk::featsel
