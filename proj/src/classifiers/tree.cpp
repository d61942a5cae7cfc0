#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "models_impl.hpp"

namespace flowhawk::classifiers {

double impurity(std::span<const double> class_counts, const std::string& criterion) {
  double total = 0.0;
  for (double c : class_counts) {
    if (c < 0) throw ClassifierError("negative class count");
    total += c;
  }
  if (total <= 0) throw EmptyNode();
  if (criterion == "gini") {
    double acc = 1.0;
    for (double c : class_counts) {
      double p = c / total;
      acc -= p * p;
    }
    return acc;
  }
  if (criterion == "entropy") {
    double acc = 0.0;
    for (double c : class_counts) {
      if (c == 0) continue;
      double p = c / total;
      acc -= p * std::log2(p);
    }
    return acc;
  }
  throw InvalidHyperparameter("unknown criterion '" + criterion + "'");
}

namespace impl {
namespace {

double node_impurity(double w0, double w1, const std::string& criterion) {
  const double counts[2] = {w0, w1};
  return impurity(counts, criterion);
}

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = -1.0;

  // Lowest feature index, then lowest threshold, on equal gain.
  bool better_than(const SplitCandidate& o) const {
    if (o.feature < 0) return feature >= 0;
    if (gain != o.gain) return gain > o.gain;
    if (feature != o.feature) return feature < o.feature;
    return threshold < o.threshold;
  }
};

struct Builder {
  const dataset::LabeledDataset& ds;
  std::span<const double> weights;
  const TreeParams& params;
  std::mt19937_64& rng;
  Tree tree;
  double root_weight = 0.0;

  int build(std::vector<std::uint32_t>& rows, int depth) {
    double w0 = 0.0, w1 = 0.0;
    for (auto r : rows)
      (ds.y[r] == LabelClass::Botnet ? w1 : w0) += weights[r];
    double w = w0 + w1;
    double imp = w > 0 ? node_impurity(w0, w1, params.criterion) : 0.0;

    int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    {
      TreeNode& n = tree.nodes[id];
      n.w0 = w0;
      n.w1 = w1;
      n.weight = w;
      n.imp = imp;
    }

    bool stop = imp <= 0.0 ||
                rows.size() < static_cast<std::size_t>(params.min_samples_split) ||
                (params.max_depth >= 0 && depth >= params.max_depth);
    if (stop) return id;

    SplitCandidate best = find_split(rows, w0, w1, imp);
    if (best.feature < 0) return id;

    std::vector<std::uint32_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    for (auto r : rows) {
      if (ds.row(r)[best.feature] <= best.threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    int left = build(left_rows, depth + 1);
    int right = build(right_rows, depth + 1);
    tree.nodes[id].feature = best.feature;
    tree.nodes[id].threshold = best.threshold;
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }

  std::vector<int> candidate_features() {
    std::size_t d = ds.cols();
    std::vector<int> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    if (params.max_features > 0 && params.max_features < d) {
      // Seeded partial Fisher-Yates; candidate order stays sorted for the
      // deterministic tie-break.
      for (std::size_t i = 0; i < params.max_features; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, d - 1);
        std::swap(feats[i], feats[pick(rng)]);
      }
      feats.resize(params.max_features);
      std::sort(feats.begin(), feats.end());
    }
    return feats;
  }

  SplitCandidate find_split(const std::vector<std::uint32_t>& rows, double w0,
                            double w1, double imp_parent) {
    SplitCandidate best;
    double w = w0 + w1;
    auto feats = candidate_features();

    std::vector<std::pair<double, std::uint32_t>> vals;
    vals.reserve(rows.size());
    for (int f : feats) {
      vals.clear();
      for (auto r : rows) vals.emplace_back(ds.row(r)[f], r);
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (vals.front().first == vals.back().first) continue;

      if (params.random_splitter) {
        std::uniform_real_distribution<double> u(vals.front().first,
                                                 vals.back().first);
        try_threshold(vals, f, u(rng), w, imp_parent, best);
      } else {
        // Exhaustive scan over midpoints of distinct consecutive values.
        double lw0 = 0.0, lw1 = 0.0;
        std::size_t lcount = 0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
          auto r = vals[i].second;
          (ds.y[r] == LabelClass::Botnet ? lw1 : lw0) += weights[r];
          ++lcount;
          if (vals[i].first == vals[i + 1].first) continue;
          double threshold = vals[i].first + (vals[i + 1].first - vals[i].first) / 2;
          consider(f, threshold, lw0, lw1, lcount, w0, w1, rows.size(), w,
                   imp_parent, best);
        }
      }
    }
    return best;
  }

  void try_threshold(const std::vector<std::pair<double, std::uint32_t>>& vals,
                     int f, double threshold, double w, double imp_parent,
                     SplitCandidate& best) {
    double lw0 = 0.0, lw1 = 0.0;
    std::size_t lcount = 0;
    double w0 = 0.0, w1 = 0.0;
    for (const auto& [v, r] : vals) {
      double wr = weights[r];
      (ds.y[r] == LabelClass::Botnet ? w1 : w0) += wr;
      if (v <= threshold) {
        (ds.y[r] == LabelClass::Botnet ? lw1 : lw0) += wr;
        ++lcount;
      }
    }
    consider(f, threshold, lw0, lw1, lcount, w0, w1, vals.size(), w, imp_parent,
             best);
  }

  void consider(int f, double threshold, double lw0, double lw1,
                std::size_t lcount, double w0, double w1, std::size_t count,
                double w, double imp_parent, SplitCandidate& best) {
    std::size_t rcount = count - lcount;
    double rw0 = w0 - lw0, rw1 = w1 - lw1;
    double lw = lw0 + lw1, rw = rw0 + rw1;
    auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
    if (lcount < min_leaf || rcount < min_leaf) return;
    if (lw <= 0 || rw <= 0) return;
    if (lw / root_weight < params.min_weight_fraction_leaf ||
        rw / root_weight < params.min_weight_fraction_leaf)
      return;
    double child_imp = (lw * node_impurity(lw0, lw1, params.criterion) +
                        rw * node_impurity(rw0, rw1, params.criterion)) /
                       w;
    SplitCandidate cand{f, threshold, imp_parent - child_imp};
    if (cand.gain > 1e-12 && cand.better_than(best)) best = cand;
  }
};

}  // namespace

const TreeNode& Tree::leaf_for(const double* x) const {
  const TreeNode* n = &nodes[0];
  while (n->feature >= 0)
    n = &nodes[x[n->feature] <= n->threshold ? n->left : n->right];
  return *n;
}

LabelClass Tree::predict(const double* x) const {
  const TreeNode& n = leaf_for(x);
  return n.w1 > n.w0 ? LabelClass::Botnet : LabelClass::Normal;
}

std::array<double, 2> Tree::leaf_proba(const double* x) const {
  const TreeNode& n = leaf_for(x);
  double w = n.w0 + n.w1;
  if (w <= 0) return {0.5, 0.5};
  return {n.w0 / w, n.w1 / w};
}

std::vector<double> Tree::raw_importances(std::size_t n_features) const {
  std::vector<double> imp(n_features, 0.0);
  double root_w = nodes.empty() ? 0.0 : nodes[0].weight;
  if (root_w <= 0) return imp;
  for (const auto& n : nodes) {
    if (n.feature < 0) continue;
    const TreeNode& l = nodes[n.left];
    const TreeNode& r = nodes[n.right];
    imp[n.feature] +=
        (n.weight * n.imp - l.weight * l.imp - r.weight * r.imp) / root_w;
  }
  return imp;
}

Tree build_tree(const dataset::LabeledDataset& ds,
                std::span<const double> sample_weights, const TreeParams& params,
                std::mt19937_64& rng) {
  Builder b{ds, sample_weights, params, rng, {}, 0.0};
  b.root_weight = std::accumulate(sample_weights.begin(), sample_weights.end(), 0.0);
  std::vector<std::uint32_t> rows;
  rows.reserve(ds.rows());
  for (std::size_t i = 0; i < ds.rows(); ++i)
    if (sample_weights[i] > 0) rows.push_back(static_cast<std::uint32_t>(i));
  if (rows.empty()) throw ClassifierError("no samples with positive weight");
  b.build(rows, 0);
  return std::move(b.tree);
}

std::array<double, 2> balanced_class_weights(const dataset::LabeledDataset& ds) {
  double n0 = 0, n1 = 0;
  for (auto y : ds.y) (y == LabelClass::Botnet ? n1 : n0) += 1.0;
  double n = n0 + n1;
  return {n0 > 0 ? n / (2.0 * n0) : 0.0, n1 > 0 ? n / (2.0 * n1) : 0.0};
}

}  // namespace impl
}  // namespace flowhawk::classifiers
