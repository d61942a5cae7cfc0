// Model wire format: "FHWK" magic, u32 format version, kind tag, spec,
// feature names, provenance, then kind-specific parameters. All integers
// little-endian, all strings and lists length-prefixed.

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "models_impl.hpp"

namespace flowhawk::classifiers {
namespace {

constexpr char kMagic[4] = {'F', 'H', 'W', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void put_u8(std::ostream& out, std::uint8_t v) { put_bytes(out, &v, 1); }
void put_u32(std::ostream& out, std::uint32_t v) { put_bytes(out, &v, 4); }
void put_u64(std::ostream& out, std::uint64_t v) { put_bytes(out, &v, 8); }
void put_f64(std::ostream& out, double v) { put_bytes(out, &v, 8); }
void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  put_bytes(out, s.data(), s.size());
}
void put_f64_vec(std::ostream& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  put_bytes(out, v.data(), v.size() * 8);
}

void get_bytes(std::istream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw Corrupt("truncated");
}
std::uint8_t get_u8(std::istream& in) {
  std::uint8_t v;
  get_bytes(in, &v, 1);
  return v;
}
std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v;
  get_bytes(in, &v, 4);
  return v;
}
std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v;
  get_bytes(in, &v, 8);
  return v;
}
double get_f64(std::istream& in) {
  double v;
  get_bytes(in, &v, 8);
  return v;
}
std::string get_str(std::istream& in) {
  std::uint32_t n = get_u32(in);
  if (n > (1u << 24)) throw Corrupt("oversized string");
  std::string s(n, '\0');
  get_bytes(in, s.data(), n);
  return s;
}
std::vector<double> get_f64_vec(std::istream& in) {
  std::uint64_t n = get_u64(in);
  if (n > (1ull << 32)) throw Corrupt("oversized vector");
  std::vector<double> v(n);
  get_bytes(in, v.data(), n * 8);
  return v;
}

void put_value(std::ostream& out, const Value& v) {
  if (v.is_none()) {
    put_u8(out, 0);
  } else if (v.is_int()) {
    put_u8(out, 1);
    put_u64(out, static_cast<std::uint64_t>(v.as_int()));
  } else if (v.is_float()) {
    put_u8(out, 2);
    put_f64(out, v.as_float());
  } else {
    put_u8(out, 3);
    put_str(out, v.as_string());
  }
}

Value get_value(std::istream& in) {
  switch (get_u8(in)) {
    case 0: return Value::none();
    case 1: return Value(static_cast<std::int64_t>(get_u64(in)));
    case 2: return Value(get_f64(in));
    case 3: return Value(get_str(in));
    default: throw Corrupt("bad value tag");
  }
}

void put_tree(std::ostream& out, const impl::Tree& t) {
  put_u64(out, t.nodes.size());
  for (const auto& n : t.nodes) {
    put_u32(out, static_cast<std::uint32_t>(n.feature));
    put_f64(out, n.threshold);
    put_u32(out, static_cast<std::uint32_t>(n.left));
    put_u32(out, static_cast<std::uint32_t>(n.right));
    put_f64(out, n.w0);
    put_f64(out, n.w1);
    put_f64(out, n.weight);
    put_f64(out, n.imp);
  }
}

impl::Tree get_tree(std::istream& in) {
  impl::Tree t;
  std::uint64_t n = get_u64(in);
  if (n > (1ull << 28)) throw Corrupt("oversized tree");
  t.nodes.resize(n);
  for (auto& node : t.nodes) {
    node.feature = static_cast<std::int32_t>(get_u32(in));
    node.threshold = get_f64(in);
    node.left = static_cast<std::int32_t>(get_u32(in));
    node.right = static_cast<std::int32_t>(get_u32(in));
    node.w0 = get_f64(in);
    node.w1 = get_f64(in);
    node.weight = get_f64(in);
    node.imp = get_f64(in);
    if (node.feature >= 0 &&
        (node.left < 0 || node.right < 0 ||
         node.left >= static_cast<std::int32_t>(n) ||
         node.right >= static_cast<std::int32_t>(n)))
      throw Corrupt("bad tree topology");
  }
  return t;
}

}  // namespace

void Model::save(std::ostream& out) const {
  put_bytes(out, kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u8(out, kind_tag());
  put_u32(out, static_cast<std::uint32_t>(spec_.hyperparameters.size()));
  for (const auto& [name, value] : spec_.hyperparameters) {
    put_str(out, name);
    put_value(out, value);
  }
  put_u32(out, static_cast<std::uint32_t>(feature_names_.size()));
  for (const auto& f : feature_names_) put_str(out, f);
  put_str(out, trained_on_);
  put_f64(out, fit_time_s_);
  save_params(out);
}

namespace impl {

void GnbModel::save_params(std::ostream& out) const {
  for (int c : {0, 1}) {
    put_f64_vec(out, mean[c]);
    put_f64_vec(out, var[c]);
    put_f64(out, log_prior[c]);
  }
}

void TreeModel::save_params(std::ostream& out) const { put_tree(out, tree); }

void ForestModel::save_params(std::ostream& out) const {
  put_u32(out, static_cast<std::uint32_t>(trees.size()));
  for (const auto& t : trees) put_tree(out, t);
}

void AdaBoostModel::save_params(std::ostream& out) const {
  put_u8(out, real_boosting ? 1 : 0);
  put_u32(out, static_cast<std::uint32_t>(learners.size()));
  for (const auto& t : learners) put_tree(out, t);
  put_f64_vec(out, alphas);
}

void SvmModel::save_params(std::ostream& out) const {
  put_f64_vec(out, w);
  put_f64(out, b);
  put_f64(out, initial_objective);
  put_f64(out, final_objective);
}

void KnnModel::save_params(std::ostream& out) const {
  put_u32(out, static_cast<std::uint32_t>(k));
  put_f64(out, p);
  put_u8(out, distance_weighted ? 1 : 0);
  put_str(out, algorithm);
  put_u32(out, static_cast<std::uint32_t>(leaf_size));
  put_str(out, tie_break);
  put_u8(out, majority_class == LabelClass::Botnet ? 1 : 0);
  put_u64(out, train_y.size());
  for (auto y : train_y) put_u8(out, y == LabelClass::Botnet ? 1 : 0);
  put_f64_vec(out, train_x);
}

}  // namespace impl

ModelPtr load_model(std::istream& in) {
  char magic[4];
  get_bytes(in, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Corrupt("bad magic");
  std::uint32_t version = get_u32(in);
  if (version != kFormatVersion) throw VersionMismatch(version);
  std::uint8_t tag = get_u8(in);

  std::shared_ptr<Model> model;
  switch (tag) {
    case 0: model = std::make_shared<impl::GnbModel>(); break;
    case 1: model = std::make_shared<impl::TreeModel>(); break;
    case 2: model = std::make_shared<impl::ForestModel>(); break;
    case 3: model = std::make_shared<impl::AdaBoostModel>(); break;
    case 4: model = std::make_shared<impl::SvmModel>(); break;
    case 5: model = std::make_shared<impl::KnnModel>(); break;
    default: throw Corrupt("unknown kind tag");
  }
  static const Kind kKinds[] = {Kind::GaussianNB,  Kind::DecisionTree,
                                Kind::RandomForest, Kind::AdaBoost,
                                Kind::LinearSVM,    Kind::KNN};
  model->spec_.kind = kKinds[tag];
  std::uint32_t n_params = get_u32(in);
  if (n_params > 1024) throw Corrupt("oversized spec");
  for (std::uint32_t i = 0; i < n_params; ++i) {
    std::string name = get_str(in);
    model->spec_.hyperparameters[name] = get_value(in);
  }
  std::uint32_t n_feat = get_u32(in);
  if (n_feat > 4096) throw Corrupt("oversized feature list");
  model->feature_names_.resize(n_feat);
  for (auto& f : model->feature_names_) f = get_str(in);
  model->trained_on_ = get_str(in);
  model->fit_time_s_ = get_f64(in);

  switch (tag) {
    case 0: {
      auto& m = static_cast<impl::GnbModel&>(*model);
      for (int c : {0, 1}) {
        m.mean[c] = get_f64_vec(in);
        m.var[c] = get_f64_vec(in);
        m.log_prior[c] = get_f64(in);
      }
      break;
    }
    case 1:
      static_cast<impl::TreeModel&>(*model).tree = get_tree(in);
      break;
    case 2: {
      auto& m = static_cast<impl::ForestModel&>(*model);
      std::uint32_t n = get_u32(in);
      if (n > 100000) throw Corrupt("oversized forest");
      m.trees.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) m.trees.push_back(get_tree(in));
      break;
    }
    case 3: {
      auto& m = static_cast<impl::AdaBoostModel&>(*model);
      m.real_boosting = get_u8(in) != 0;
      std::uint32_t n = get_u32(in);
      if (n > 100000) throw Corrupt("oversized ensemble");
      m.learners.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) m.learners.push_back(get_tree(in));
      m.alphas = get_f64_vec(in);
      if (m.alphas.size() != m.learners.size()) throw Corrupt("alpha count");
      break;
    }
    case 4: {
      auto& m = static_cast<impl::SvmModel&>(*model);
      m.w = get_f64_vec(in);
      m.b = get_f64(in);
      m.initial_objective = get_f64(in);
      m.final_objective = get_f64(in);
      break;
    }
    case 5: {
      auto& m = static_cast<impl::KnnModel&>(*model);
      m.k = static_cast<int>(get_u32(in));
      m.p = get_f64(in);
      m.distance_weighted = get_u8(in) != 0;
      m.algorithm = get_str(in);
      m.leaf_size = static_cast<int>(get_u32(in));
      m.tie_break = get_str(in);
      m.majority_class = get_u8(in) ? LabelClass::Botnet : LabelClass::Normal;
      std::uint64_t n = get_u64(in);
      if (n > (1ull << 32)) throw Corrupt("oversized training set");
      m.train_y.resize(n);
      for (auto& y : m.train_y)
        y = get_u8(in) ? LabelClass::Botnet : LabelClass::Normal;
      m.train_x = get_f64_vec(in);
      if (m.train_x.size() != n * model->feature_names_.size())
        throw Corrupt("training matrix shape");
      m.build_index();
      break;
    }
  }
  return model;
}

ModelPtr load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ClassifierError("cannot open model file: " + path);
  return load_model(in);
}

void save_model_file(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ClassifierError("cannot create model file: " + path);
  model.save(out);
}

}  // namespace flowhawk::classifiers
