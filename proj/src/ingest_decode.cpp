#include "flowhawk/ingest.hpp"

#include <arpa/inet.h>

#include <cstring>

namespace flowhawk::ingest {
namespace {

std::string ipv4_to_string(const std::uint8_t* p) {
  char buf[INET_ADDRSTRLEN];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", p[0], p[1], p[2], p[3]);
  return buf;
}

std::uint16_t rd16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
}

}  // namespace

int estimate_hops(int observed_ttl) {
  for (int initial : {32, 64, 128, 255})
    if (observed_ttl <= initial) return initial - observed_ttl;
  return 0;
}

std::optional<PacketSummary> decode_packet(std::span<const std::uint8_t> raw,
                                           LinkType link_type) {
  std::size_t off = 0;
  if (link_type == LinkType::Ethernet) {
    if (raw.size() < 14) throw TruncatedFrame();
    std::uint16_t ethertype = rd16(raw.data() + 12);
    if (ethertype != 0x0800) return std::nullopt;  // ARP, IPv6, ... -> Skip
    off = 14;
  }
  if (raw.size() < off + 20) throw TruncatedFrame();
  const std::uint8_t* ip = raw.data() + off;
  if ((ip[0] >> 4) != 4) return std::nullopt;
  std::size_t ihl = (ip[0] & 0x0f) * 4u;
  std::uint16_t total_len = rd16(ip + 2);
  if (ihl < 20 || raw.size() < off + ihl || total_len < ihl) throw TruncatedFrame();

  PacketSummary pkt;
  pkt.tos = ip[1];
  pkt.ttl = ip[8];
  pkt.ip_total_len = total_len;
  pkt.src_addr = ipv4_to_string(ip + 12);
  pkt.dst_addr = ipv4_to_string(ip + 16);

  std::uint8_t proto = ip[9];
  const std::uint8_t* l4 = ip + ihl;
  std::size_t l4_avail = raw.size() - off - ihl;
  std::size_t l4_len = total_len - ihl;

  switch (proto) {
    case 6: {  // TCP
      if (l4_avail < 20 || l4_len < 20) throw TruncatedFrame();
      pkt.proto = "tcp";
      pkt.sport = rd16(l4);
      pkt.dport = rd16(l4 + 2);
      std::size_t data_off = (l4[12] >> 4) * 4u;
      if (data_off < 20 || l4_len < data_off) throw TruncatedFrame();
      pkt.tcp_flags = l4[13] & 0x3f;
      pkt.tcp_window = rd16(l4 + 14);
      pkt.l4_payload_len = static_cast<std::uint32_t>(l4_len - data_off);
      break;
    }
    case 17: {  // UDP
      if (l4_avail < 8 || l4_len < 8) throw TruncatedFrame();
      pkt.proto = "udp";
      pkt.sport = rd16(l4);
      pkt.dport = rd16(l4 + 2);
      std::uint16_t udp_len = rd16(l4 + 4);
      pkt.l4_payload_len = udp_len >= 8 ? udp_len - 8 : 0;
      break;
    }
    case 1: {  // ICMP
      if (l4_avail < 8 || l4_len < 8) throw TruncatedFrame();
      pkt.proto = "icmp";
      pkt.l4_payload_len = static_cast<std::uint32_t>(l4_len - 8);
      break;
    }
    default:
      pkt.proto = "ip-" + std::to_string(proto);
      pkt.l4_payload_len = static_cast<std::uint32_t>(l4_len);
      break;
  }
  return pkt;
}

std::vector<std::uint8_t> build_tcp_segment(std::uint16_t sport,
                                            std::uint16_t dport,
                                            std::uint8_t flags,
                                            std::uint16_t window,
                                            std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> seg(20 + payload.size(), 0);
  seg[0] = sport >> 8;
  seg[1] = sport & 0xff;
  seg[2] = dport >> 8;
  seg[3] = dport & 0xff;
  seg[12] = 5 << 4;  // data offset: 5 words
  seg[13] = flags;
  seg[14] = window >> 8;
  seg[15] = window & 0xff;
  std::memcpy(seg.data() + 20, payload.data(), payload.size());
  return seg;
}

std::vector<std::uint8_t> build_udp_segment(std::uint16_t sport,
                                            std::uint16_t dport,
                                            std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> seg(8 + payload.size(), 0);
  std::uint16_t len = static_cast<std::uint16_t>(seg.size());
  seg[0] = sport >> 8;
  seg[1] = sport & 0xff;
  seg[2] = dport >> 8;
  seg[3] = dport & 0xff;
  seg[4] = len >> 8;
  seg[5] = len & 0xff;
  std::memcpy(seg.data() + 8, payload.data(), payload.size());
  return seg;
}

std::vector<std::uint8_t> build_ipv4_frame(const std::string& src,
                                           const std::string& dst,
                                           std::uint8_t proto_num,
                                           std::span<const std::uint8_t> l4,
                                           std::uint8_t ttl, std::uint8_t tos,
                                           LinkType link) {
  std::vector<std::uint8_t> frame;
  if (link == LinkType::Ethernet) {
    frame.resize(14, 0);
    frame[12] = 0x08;  // ethertype IPv4
    frame[13] = 0x00;
  }
  std::size_t ip_off = frame.size();
  std::uint16_t total_len = static_cast<std::uint16_t>(20 + l4.size());
  frame.resize(ip_off + 20, 0);
  std::uint8_t* ip = frame.data() + ip_off;
  ip[0] = 0x45;
  ip[1] = tos;
  ip[2] = total_len >> 8;
  ip[3] = total_len & 0xff;
  ip[8] = ttl;
  ip[9] = proto_num;
  in_addr a{};
  inet_pton(AF_INET, src.c_str(), &a);
  std::memcpy(ip + 12, &a, 4);
  inet_pton(AF_INET, dst.c_str(), &a);
  std::memcpy(ip + 16, &a, 4);
  frame.insert(frame.end(), l4.begin(), l4.end());
  return frame;
}

}  // namespace flowhawk::ingest
