#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <thread>

#include "flowhawk/dataset.hpp"
#include "flowhawk/detector.hpp"
#include "flowhawk/ingest.hpp"

namespace flowhawk::detector {

std::string iso8601_us(std::int64_t us) {
  std::int64_t secs = us / 1000000;
  std::int64_t frac = us % 1000000;
  if (frac < 0) {
    frac += 1000000;
    secs -= 1;
  }
  std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<long long>(frac));
  return buf;
}

SourceMode detect_source_mode(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DetectorError("cannot open input: " + path);
  std::uint32_t magic = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  if (in.gcount() == 4 &&
      (magic == 0xa1b2c3d4u || magic == 0xd4c3b2a1u || magic == 0xa1b23c4du ||
       magic == 0x4d3cb2a1u))
    return SourceMode::Pcap;
  return SourceMode::FlowFile;
}

namespace {

// Shared per-flow pipeline: classify, log, stream.
class Pipeline {
 public:
  Pipeline(const Registry& registry, const DetectionConfig& cfg)
      : registry_(registry), cfg_(cfg), start_(std::chrono::steady_clock::now()) {
    if (!cfg.flow_log_path.empty()) {
      flow_log_.open(cfg.flow_log_path);
      if (!flow_log_)
        throw DetectorError("cannot open flow log: " + cfg.flow_log_path);
    }
    if (!cfg.alert_log_path.empty()) {
      alert_log_.open(cfg.alert_log_path);
      if (!alert_log_)
        throw DetectorError("cannot open alert log: " + cfg.alert_log_path);
    }
  }

  void process(const FlowRecord& flow) {
    auto detection = classify_flow(flow, registry_.loaded);
    ++summary_.flows;
    std::string line = serialize_flow_line(flow, extended_field_order());

    if (flow_log_.is_open()) {
      flow_log_ << line << '\t' << to_string(detection.label) << '\n';
      if (!flow_log_) ++summary_.sink_failures;
    }
    if (cfg_.stream) cfg_.stream->publish_flow(flow, detection.label);

    if (detection.label == LabelClass::Botnet) {
      ++summary_.alerts;
      std::string stamp = iso8601_us(flow.start_time_us);
      if (alert_log_.is_open()) {
        alert_log_ << stamp << '\t';
        for (std::size_t i = 0; i < detection.triggering_model_ids.size(); ++i) {
          if (i) alert_log_ << ',';
          alert_log_ << detection.triggering_model_ids[i];
        }
        alert_log_ << '\t' << line << '\n';
        if (!alert_log_) ++summary_.sink_failures;
      }
      if (cfg_.stream)
        cfg_.stream->publish_alert(stamp, detection.triggering_model_ids, flow);
    }
  }

  RunSummary finish() {
    if (flow_log_.is_open()) flow_log_.flush();
    if (alert_log_.is_open()) alert_log_.flush();
    summary_.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    return summary_;
  }

 private:
  const Registry& registry_;
  const DetectionConfig& cfg_;
  std::ofstream flow_log_, alert_log_;
  RunSummary summary_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

RunSummary run_detection_flow_file(const std::string& path, const Registry& registry,
                                   const DetectionConfig& cfg) {
  Pipeline pipeline(registry, cfg);
  for (const auto& flow : dataset::read_flow_file(path)) pipeline.process(flow);
  return pipeline.finish();
}

RunSummary run_detection_pcap(const std::string& path, const Registry& registry,
                              const DetectionConfig& cfg) {
  Pipeline pipeline(registry, cfg);
  ingest::FlowAggregator agg({}, [&](FlowRecord&& flow) { pipeline.process(flow); });
  std::uint64_t skipped = 0;
  for (const auto& pkt : ingest::read_pcap(path, &skipped)) agg.add(pkt);
  agg.flush();
  return pipeline.finish();
}

RunSummary run_detection_live(const std::string& interface_name,
                              const Registry& registry, const DetectionConfig& cfg) {
  Pipeline pipeline(registry, cfg);
  ingest::FlowAggregator agg({}, [&](FlowRecord&& flow) { pipeline.process(flow); });
  {
    // Packets arrive on the capture worker; the aggregator is fed only from
    // that worker, and stop() joins it before flush.
    ingest::LiveCapture capture(interface_name,
                                [&](const ingest::PacketSummary& pkt) { agg.add(pkt); });
    while (!cfg.stop || !cfg.stop->load())
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    capture.stop();
  }
  agg.flush();
  return pipeline.finish();
}

}  // namespace flowhawk::detector
