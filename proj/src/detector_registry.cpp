#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "flowhawk/detector.hpp"

namespace flowhawk::detector {

using nlohmann::json;

std::vector<ModelMetadata> read_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MetadataParse("cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw MetadataParse(e.what());
  }
  if (!doc.is_object() || !doc.contains("models") || !doc["models"].is_array())
    throw MetadataParse("expected an object with a 'models' array");
  std::vector<ModelMetadata> models;
  try {
    for (const auto& entry : doc["models"]) {
      ModelMetadata m;
      m.model_id = entry.at("model_id").get<std::string>();
      m.file_name = entry.at("file_name").get<std::string>();
      m.kind = entry.at("kind").get<std::string>();
      m.trained_on = entry.value("trained_on", "");
      m.features = entry.at("features").get<std::vector<std::string>>();
      m.created_at = entry.value("created_at", "");
      m.format_version = entry.value("format_version", kMetadataFormatVersion);
      models.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw MetadataParse(e.what());
  }
  return models;
}

void write_metadata(const std::string& path,
                    const std::vector<ModelMetadata>& models) {
  json doc;
  doc["version"] = kMetadataFormatVersion;
  doc["models"] = json::array();
  for (const auto& m : models) {
    doc["models"].push_back({{"model_id", m.model_id},
                             {"file_name", m.file_name},
                             {"kind", m.kind},
                             {"trained_on", m.trained_on},
                             {"features", m.features},
                             {"created_at", m.created_at},
                             {"format_version", m.format_version}});
  }
  std::ofstream out(path);
  if (!out) throw DetectorError("cannot write metadata file: " + path);
  out << doc.dump(2) << '\n';
}

Registry load_registry(const std::string& models_dir,
                       const std::string& metadata_path) {
  auto entries = read_metadata(metadata_path);
  Registry registry;
  for (auto& meta : entries) {
    auto model_path = std::filesystem::path(models_dir) / meta.file_name;
    try {
      auto model = classifiers::load_model_file(model_path.string());
      if (meta.features.empty()) meta.features = model->feature_names();
      if (meta.features != model->feature_names())
        throw DetectorError("metadata feature list does not match the model");
      registry.loaded.push_back({std::move(meta), std::move(model)});
    } catch (const std::exception& e) {
      registry.skipped.push_back({meta.model_id, e.what()});
    }
  }
  if (registry.loaded.empty()) throw NoValidModels();
  return registry;
}

Detection classify_flow(const FlowRecord& flow,
                        const std::vector<LoadedModel>& models) {
  Detection result;
  std::vector<double> x;
  for (const auto& lm : models) {
    x.clear();
    for (const auto& feature : lm.metadata.features) {
      if (!is_numeric_feature(feature))
        throw FeatureMissing(lm.metadata.model_id, feature);
      x.push_back(numeric_feature_value(flow, feature));
    }
    if (lm.model->predict(x) == LabelClass::Botnet)
      result.triggering_model_ids.push_back(lm.metadata.model_id);
  }
  result.label = result.triggering_model_ids.empty() ? LabelClass::Normal
                                                     : LabelClass::Botnet;
  return result;
}

}  // namespace flowhawk::detector
