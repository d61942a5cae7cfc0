#pragma once
// Detection engine: model registry, per-flow OR-combined classification,
// alert/flow logging, and the streaming feed.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "flowhawk/classifiers/model.hpp"
#include "flowhawk/flowcore.hpp"

namespace flowhawk::detector {

struct DetectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MetadataParse : DetectorError {
  explicit MetadataParse(const std::string& why)
      : DetectorError("cannot parse model metadata: " + why) {}
};
struct NoValidModels : DetectorError {
  NoValidModels() : DetectorError("no valid models could be loaded") {}
};
struct FeatureMissing : DetectorError {
  FeatureMissing(const std::string& model_id, const std::string& feature)
      : DetectorError("model '" + model_id + "' requires feature '" + feature +
                      "' which this flow source cannot supply") {}
};
struct BindFailed : DetectorError {
  explicit BindFailed(const std::string& addr)
      : DetectorError("cannot bind streaming listener on " + addr) {}
};

inline constexpr int kMetadataFormatVersion = 1;

struct ModelMetadata {
  std::string model_id;
  std::string file_name;
  std::string kind;
  std::string trained_on;
  std::vector<std::string> features;
  std::string created_at;
  int format_version = kMetadataFormatVersion;
};

struct LoadedModel {
  ModelMetadata metadata;
  classifiers::ModelPtr model;
};

struct SkippedModel {
  std::string model_id;
  std::string reason;
};

struct Registry {
  std::vector<LoadedModel> loaded;
  std::vector<SkippedModel> skipped;
};

// Metadata document IO (JSON: {"version": 1, "models": [...]}).
std::vector<ModelMetadata> read_metadata(const std::string& path);
void write_metadata(const std::string& path,
                    const std::vector<ModelMetadata>& models);

// Loads every metadata entry whose model file exists and deserializes;
// failures are recorded as skipped, never fatal. Throws NoValidModels when
// nothing loads.
Registry load_registry(const std::string& models_dir,
                       const std::string& metadata_path);

struct Detection {
  LabelClass label = LabelClass::Normal;
  std::vector<std::string> triggering_model_ids;
};

// OR-combination: Botnet iff any model predicts Botnet. Feature vectors are
// assembled per model from that model's recorded feature list.
Detection classify_flow(const FlowRecord& flow,
                        const std::vector<LoadedModel>& models);

class StreamServer;

struct DetectionConfig {
  std::string alert_log_path;  // empty: no alert log
  std::string flow_log_path;   // empty: no flow log
  StreamServer* stream = nullptr;
  const std::atomic<bool>* stop = nullptr;  // live mode cancellation
};

struct RunSummary {
  std::uint64_t flows = 0;
  std::uint64_t alerts = 0;
  double duration_s = 0.0;
  std::uint64_t sink_failures = 0;
};

enum class SourceMode { FlowFile, Pcap, Live };

// Distinguishes pcap files from flow files by magic/header.
SourceMode detect_source_mode(const std::string& path);

RunSummary run_detection_flow_file(const std::string& path, const Registry& registry,
                                   const DetectionConfig& cfg);
RunSummary run_detection_pcap(const std::string& path, const Registry& registry,
                              const DetectionConfig& cfg);
RunSummary run_detection_live(const std::string& interface_name,
                              const Registry& registry, const DetectionConfig& cfg);

// Websocket streaming sink. Broadcasts one message per labeled flow and per
// alert; clients may request the retained history. Slow or dead clients are
// disconnected rather than back-pressuring detection.
class StreamServer {
 public:
  static constexpr std::size_t kFlowRetention = 10000;
  static constexpr std::size_t kAlertRetention = 1000;

  // bind_address is "host:port"; port 0 picks an ephemeral port.
  explicit StreamServer(const std::string& bind_address);
  ~StreamServer();
  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  std::uint16_t port() const;

  void publish_flow(const FlowRecord& flow, LabelClass label);
  void publish_alert(const std::string& timestamp,
                     const std::vector<std::string>& model_ids,
                     const FlowRecord& flow);

  std::size_t client_count() const;
  void stop();  // idempotent; joins all workers

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ISO-8601 UTC rendering of a flow timestamp, used in alert logs and
// streamed alert messages.
std::string iso8601_us(std::int64_t us);

}  // namespace flowhawk::detector
