#pragma once
// Raw packets to extended FlowRecords: frame decoding, pcap file I/O, live
// capture, and bidirectional flow aggregation.

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowhawk/flowcore.hpp"

namespace flowhawk::ingest {

struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TruncatedFrame : IngestError {
  TruncatedFrame() : IngestError("frame shorter than declared headers") {}
};
struct BadMagic : IngestError {
  BadMagic() : IngestError("not a pcap file (bad magic)") {}
};
struct TruncatedRecord : IngestError {
  TruncatedRecord() : IngestError("truncated pcap record") {}
};
struct NoSuchInterface : IngestError {
  explicit NoSuchInterface(const std::string& name)
      : IngestError("no such interface: " + name) {}
};
struct PermissionDenied : IngestError {
  PermissionDenied() : IngestError("capture requires raw-socket privileges") {}
};

enum class LinkType { Ethernet, RawIP };

namespace tcp_flags {
inline constexpr std::uint8_t FIN = 0x01;
inline constexpr std::uint8_t SYN = 0x02;
inline constexpr std::uint8_t RST = 0x04;
inline constexpr std::uint8_t PSH = 0x08;
inline constexpr std::uint8_t ACK = 0x10;
inline constexpr std::uint8_t URG = 0x20;
}  // namespace tcp_flags

// Decoded header view of one IPv4 packet.
struct PacketSummary {
  std::int64_t timestamp_us = 0;
  std::string src_addr;
  std::string dst_addr;
  std::string proto;  // "tcp", "udp", "icmp", or "ip-<n>"
  std::optional<std::uint32_t> sport;
  std::optional<std::uint32_t> dport;
  std::uint8_t ttl = 0;
  std::uint8_t tos = 0;
  std::uint32_t ip_total_len = 0;
  std::uint32_t l4_payload_len = 0;
  std::uint8_t tcp_flags = 0;
  std::uint16_t tcp_window = 0;
};

// Estimated hops: distance from the nearest standard initial TTL
// ({32, 64, 128, 255}) at or above the observed value.
int estimate_hops(int observed_ttl);

// Decodes one link-layer frame; nullopt for non-IPv4 frames (ARP, IPv6, ...).
// The returned summary has timestamp 0; callers stamp it from the capture.
std::optional<PacketSummary> decode_packet(std::span<const std::uint8_t> raw,
                                           LinkType link_type);

struct AggregatorConfig {
  double idle_timeout_s = 60.0;
  double active_timeout_s = 3600.0;
  double status_interval_s = 5.0;
};

// Single-writer bidirectional flow aggregator. Feed packets in timestamp
// order; completed flows are handed to the sink. flush() emits everything
// still open (end of stream).
class FlowAggregator {
 public:
  using Sink = std::function<void(FlowRecord&&)>;

  FlowAggregator(AggregatorConfig cfg, Sink sink);
  ~FlowAggregator();

  void add(const PacketSummary& pkt);
  void flush();

  std::uint64_t packets_seen() const { return packets_seen_; }
  std::uint64_t skipped_non_ip() const { return skipped_non_ip_; }
  void count_skip() { ++skipped_non_ip_; }

 private:
  struct FlowState;
  struct Key {
    std::string a_addr, b_addr;  // lexicographically ordered endpoints
    std::uint32_t a_port, b_port;
    std::string proto;
    bool operator<(const Key& o) const;
  };
  void expire(std::int64_t now_us);
  void emit(FlowState& st);

  AggregatorConfig cfg_;
  Sink sink_;
  std::map<Key, std::unique_ptr<FlowState>> flows_;
  std::uint64_t packets_seen_ = 0;
  std::uint64_t skipped_non_ip_ = 0;
  std::uint64_t next_flow_seq_ = 0;
};

// Classic pcap reader; handles both endiannesses and usec/nsec timestamps.
class PcapReader {
 public:
  explicit PcapReader(const std::string& path);
  ~PcapReader();
  PcapReader(const PcapReader&) = delete;
  PcapReader& operator=(const PcapReader&) = delete;

  // Next raw record, or false at EOF. Timestamp is normalized to microseconds.
  bool next(std::vector<std::uint8_t>& frame, std::int64_t& timestamp_us);
  LinkType link_type() const { return link_type_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  LinkType link_type_ = LinkType::Ethernet;
};

// Minimal classic pcap writer (little-endian, microsecond timestamps).
class PcapWriter {
 public:
  PcapWriter(const std::string& path, LinkType link_type);
  ~PcapWriter();
  void write(std::span<const std::uint8_t> frame, std::int64_t timestamp_us);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Reads a pcap file into decoded packets, in file order. Non-IP frames are
// counted through skip_counter when provided.
std::vector<PacketSummary> read_pcap(const std::string& path,
                                     std::uint64_t* skip_counter = nullptr);

// Live capture on a dedicated worker. Packets are delivered to the callback
// on that worker; stop() cancels and joins it (no orphaned workers).
class LiveCapture {
 public:
  using Callback = std::function<void(const PacketSummary&)>;

  // Throws NoSuchInterface / PermissionDenied before the worker starts.
  LiveCapture(const std::string& interface_name, Callback cb);
  ~LiveCapture();

  void stop();  // idempotent; joins the worker

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Helpers for building test frames; also used by the extract command's
// self-checks.
std::vector<std::uint8_t> build_ipv4_frame(
    const std::string& src, const std::string& dst, std::uint8_t proto_num,
    std::span<const std::uint8_t> l4, std::uint8_t ttl = 64,
    std::uint8_t tos = 0, LinkType link = LinkType::Ethernet);
std::vector<std::uint8_t> build_tcp_segment(std::uint16_t sport,
                                            std::uint16_t dport,
                                            std::uint8_t flags,
                                            std::uint16_t window,
                                            std::span<const std::uint8_t> payload = {});
std::vector<std::uint8_t> build_udp_segment(std::uint16_t sport,
                                            std::uint16_t dport,
                                            std::span<const std::uint8_t> payload = {});

}  // namespace flowhawk::ingest
