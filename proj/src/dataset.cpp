#include "flowhawk/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace flowhawk::dataset {

void label_by_ip(std::vector<FlowRecord>& flows,
                 const std::set<std::string>& infected_ips) {
  for (auto& f : flows) {
    bool hit = infected_ips.count(f.src_addr) || infected_ips.count(f.dst_addr);
    f.label = hit ? "Botnet" : "Normal";
  }
}

LabeledDataset build_matrix(const std::vector<FlowRecord>& flows,
                            const std::vector<std::string>& features,
                            std::size_t* background_dropped) {
  for (const auto& name : features)
    if (!is_numeric_feature(name)) throw NonNumericFeature(name);

  LabeledDataset ds;
  ds.feature_names = features;
  std::size_t dropped = 0;
  for (const auto& f : flows) {
    auto cls = f.label ? normalize_label(*f.label) : std::nullopt;
    if (!cls) {
      ++dropped;
      continue;
    }
    for (const auto& name : features) {
      double v = numeric_feature_value(f, name);
      ds.x.push_back(std::isfinite(v) ? v : 0.0);
    }
    ds.y.push_back(*cls);
  }
  if (background_dropped) *background_dropped = dropped;
  return ds;
}

ClassCounts class_distribution(const LabeledDataset& ds) {
  if (ds.rows() == 0) throw EmptyDataset();
  ClassCounts c;
  for (auto y : ds.y)
    (y == LabelClass::Botnet ? c.botnet_count : c.normal_count)++;
  double pct = 100.0 * static_cast<double>(c.botnet_count) /
               static_cast<double>(c.normal_count + c.botnet_count);
  c.botnet_pct = std::round(pct * 100.0) / 100.0;
  return c;
}

FoldPlan stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw DatasetError("k must be >= 2");
  if (ds.rows() == 0) throw EmptyDataset();

  std::vector<std::size_t> normal_rows, botnet_rows;
  for (std::size_t i = 0; i < ds.rows(); ++i)
    (ds.y[i] == LabelClass::Botnet ? botnet_rows : normal_rows).push_back(i);
  if (!normal_rows.empty() && normal_rows.size() < static_cast<std::size_t>(k))
    throw TooFewSamples("Normal", normal_rows.size(), k);
  if (!botnet_rows.empty() && botnet_rows.size() < static_cast<std::size_t>(k))
    throw TooFewSamples("Botnet", botnet_rows.size(), k);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(ds.rows(), 0);

  std::mt19937_64 rng(seed);
  for (auto* rows : {&normal_rows, &botnet_rows}) {
    std::shuffle(rows->begin(), rows->end(), rng);
    // Round-robin keeps each fold within 1 of exact proportionality.
    for (std::size_t i = 0; i < rows->size(); ++i)
      plan.assignments[(*rows)[i]] = static_cast<int>(i % k);
  }
  return plan;
}

std::vector<FlowRecord> read_flow_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open flow file: " + path);
  std::string line;
  if (!std::getline(in, line)) return {};
  std::vector<std::string> order;
  std::stringstream header(line);
  std::string name;
  while (std::getline(header, name, ',')) order.push_back(name);

  std::vector<FlowRecord> flows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    flows.push_back(parse_flow_line(line, order, line_no));
  }
  return flows;
}

void write_flow_file(const std::string& path,
                     const std::vector<FlowRecord>& flows,
                     const std::vector<std::string>& field_order) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot create flow file: " + path);
  for (std::size_t i = 0; i < field_order.size(); ++i) {
    if (i) out << ',';
    out << field_order[i];
  }
  out << '\n';
  for (const auto& f : flows) out << serialize_flow_line(f, field_order) << '\n';
}

std::set<std::string> read_ip_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open IP list: " + path);
  std::set<std::string> ips;
  std::string line;
  while (std::getline(in, line)) {
    auto end = line.find('#');
    if (end != std::string::npos) line.resize(end);
    // trim
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    ips.insert(line.substr(first, last - first + 1));
  }
  return ips;
}

LabeledDataset subset(const LabeledDataset& ds,
                      const std::vector<std::size_t>& rows) {
  LabeledDataset out;
  out.feature_names = ds.feature_names;
  out.provenance = ds.provenance;
  out.x.reserve(rows.size() * ds.cols());
  out.y.reserve(rows.size());
  for (std::size_t r : rows) {
    const double* src = ds.row(r);
    out.x.insert(out.x.end(), src, src + ds.cols());
    out.y.push_back(ds.y[r]);
  }
  return out;
}

}  // namespace flowhawk::dataset
