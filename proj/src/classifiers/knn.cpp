#include <algorithm>
#include <cmath>
#include <queue>

#include "flowhawk/kernels.hpp"
#include "models_impl.hpp"

namespace flowhawk::classifiers::impl {
namespace {

// Monotone distance surrogate: p-th power sum (squared L2 for p=2). Final
// distances take the root only where weighting needs them.
double powsum(const double* a, const double* b, std::size_t n, double p) {
  const auto& ops = kernels::active();
  if (p == 2.0) return ops.squared_l2(a, b, n);
  if (p == 1.0) return ops.l1(a, b, n);
  return ops.minkowski_pow_sum(a, b, n, p);
}

using Neighbor = std::pair<double, std::size_t>;  // (powsum, train row)

// Max-heap keyed by (dist, index): ties at the k boundary resolve to the
// lower training row index on both search paths.
struct NeighborHeap {
  std::size_t k;
  std::vector<Neighbor> heap;

  bool full() const { return heap.size() == k; }
  double worst() const { return heap.front().first; }

  void offer(Neighbor n) {
    if (heap.size() < k) {
      heap.push_back(n);
      std::push_heap(heap.begin(), heap.end());
    } else if (n < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = n;
      std::push_heap(heap.begin(), heap.end());
    }
  }

  std::vector<Neighbor> sorted() && {
    std::sort_heap(heap.begin(), heap.end());
    return std::move(heap);
  }
};

}  // namespace

std::vector<Neighbor> KnnModel::neighbors_brute(std::span<const double> x) const {
  NeighborHeap heap{static_cast<std::size_t>(k), {}};
  std::size_t d = feature_names().size();
  for (std::size_t i = 0; i < n_train(); ++i)
    heap.offer({powsum(x.data(), train_row(i), d, p), i});
  return std::move(heap).sorted();
}

std::int32_t KnnModel::build_kd(std::uint32_t begin, std::uint32_t end, int depth) {
  std::int32_t id = static_cast<std::int32_t>(kd_nodes_.size());
  kd_nodes_.push_back({});
  std::size_t d = feature_names().size();
  if (end - begin <= static_cast<std::uint32_t>(leaf_size) || d == 0) {
    kd_nodes_[id].begin = begin;
    kd_nodes_[id].end = end;
    return id;
  }
  // Axis with the largest spread over this range.
  int axis = 0;
  double best_spread = -1.0;
  for (std::size_t j = 0; j < d; ++j) {
    double lo = train_row(order_[begin])[j], hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      double v = train_row(order_[i])[j];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      axis = static_cast<int>(j);
    }
  }
  if (best_spread <= 0.0) {  // all points identical in range
    kd_nodes_[id].begin = begin;
    kd_nodes_[id].end = end;
    return id;
  }
  std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
                     return train_row(a)[axis] < train_row(b)[axis];
                   });
  double split = train_row(order_[mid])[axis];
  std::int32_t left = build_kd(begin, mid, depth + 1);
  std::int32_t right = build_kd(mid, end, depth + 1);
  kd_nodes_[id].axis = axis;
  kd_nodes_[id].split = split;
  kd_nodes_[id].left = left;
  kd_nodes_[id].right = right;
  return id;
}

void KnnModel::build_index() {
  kd_nodes_.clear();
  order_.resize(n_train());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) build_kd(0, static_cast<std::uint32_t>(order_.size()), 0);
}

std::vector<Neighbor> KnnModel::neighbors_tree(std::span<const double> x) const {
  NeighborHeap heap{static_cast<std::size_t>(k), {}};
  std::size_t d = feature_names().size();

  // Recursive descent with single-axis pruning: |x[axis]-split|^p lower
  // bounds the full powsum on the far side.
  auto visit = [&](auto&& self, std::int32_t id) -> void {
    const KdNode& node = kd_nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        std::size_t row = order_[i];
        heap.offer({powsum(x.data(), train_row(row), d, p), row});
      }
      return;
    }
    double diff = x[node.axis] - node.split;
    std::int32_t near = diff <= 0 ? node.left : node.right;
    std::int32_t far = diff <= 0 ? node.right : node.left;
    self(self, near);
    double bound = p == 1.0   ? std::fabs(diff)
                   : p == 2.0 ? diff * diff
                              : std::pow(std::fabs(diff), p);
    if (!heap.full() || bound <= heap.worst()) self(self, far);
  };
  if (!kd_nodes_.empty()) visit(visit, 0);
  return std::move(heap).sorted();
}

LabelClass KnnModel::vote(const std::vector<Neighbor>& nn) const {
  double votes[2] = {0, 0};
  bool any_zero = false;
  for (const auto& [ps, row] : nn)
    if (ps == 0.0) any_zero = true;
  for (const auto& [ps, row] : nn) {
    double weight = 1.0;
    if (distance_weighted) {
      if (any_zero) {
        // Exact matches dominate: vote only among zero-distance neighbors.
        if (ps != 0.0) continue;
      } else {
        weight = 1.0 / std::pow(ps, 1.0 / p);
      }
    }
    votes[train_y[row] == LabelClass::Botnet] += weight;
  }
  if (votes[0] == votes[1]) {
    if (tie_break == "normal") return LabelClass::Normal;
    if (tie_break == "botnet") return LabelClass::Botnet;
    return majority_class;
  }
  return votes[1] > votes[0] ? LabelClass::Botnet : LabelClass::Normal;
}

LabelClass KnnModel::predict_checked(std::span<const double> x) const {
  bool brute = algorithm == "brute" ||
               (algorithm == "auto" && n_train() < 64);
  auto nn = brute ? neighbors_brute(x) : neighbors_tree(x);
  return vote(nn);
}

ModelPtr fit_knn(const ClassifierSpec& spec, const dataset::LabeledDataset& ds,
                 std::uint64_t) {
  auto model = std::make_shared<KnnModel>();
  model->k = static_cast<int>(
      std::min<std::int64_t>(spec.get("n_neighbors").as_int(),
                             static_cast<std::int64_t>(ds.rows())));
  model->p = static_cast<double>(spec.get("p").as_int());
  model->distance_weighted = spec.get("weights").as_string() == "distance";
  model->algorithm = spec.get("algorithm").as_string();
  model->leaf_size = static_cast<int>(spec.get("leaf_size").as_int());
  model->tie_break = spec.get("tie_break").as_string();
  model->train_x = ds.x;
  model->train_y = ds.y;
  model->feature_names_ = ds.feature_names;  // needed before build_index
  std::size_t n1 = 0;
  for (auto y : ds.y) n1 += y == LabelClass::Botnet;
  model->majority_class =
      n1 * 2 > ds.rows() ? LabelClass::Botnet : LabelClass::Normal;
  model->build_index();
  return model;
}

}  // namespace flowhawk::classifiers::impl
