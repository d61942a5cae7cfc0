#include "flowhawk/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace flowhawk::ingest {

struct FlowAggregator::FlowState {
  std::uint64_t seq = 0;
  // The initiator (source) is whoever sent the chronologically first packet.
  std::string src_addr, dst_addr;
  std::optional<std::uint32_t> sport, dport;
  std::string proto;
  std::int64_t start_us = 0, last_us = 0;
  std::uint64_t src_pkts = 0, dst_pkts = 0;
  std::uint64_t src_bytes = 0, dst_bytes = 0;
  std::uint64_t s_app = 0, d_app = 0;
  std::uint8_t s_tos = 0, d_tos = 0;
  std::uint16_t src_win = 0, dst_win = 0;
  bool src_win_set = false, dst_win_set = false;
  std::uint8_t s_ttl = 0, d_ttl = 0;
  bool s_ttl_set = false, d_ttl_set = false;
  // Handshake timing.
  std::int64_t syn_us = -1, synack_us = -1, ack_us = -1;
  bool saw_syn = false, saw_synack = false, saw_est_ack = false;
  bool fin_src = false, fin_dst = false, saw_rst = false;
  bool closed = false;
};

bool FlowAggregator::Key::operator<(const Key& o) const {
  return std::tie(a_addr, a_port, b_addr, b_port, proto) <
         std::tie(o.a_addr, o.a_port, o.b_addr, o.b_port, o.proto);
}

FlowAggregator::FlowAggregator(AggregatorConfig cfg, Sink sink)
    : cfg_(std::move(cfg)), sink_(std::move(sink)) {}

FlowAggregator::~FlowAggregator() = default;

void FlowAggregator::add(const PacketSummary& pkt) {
  expire(pkt.timestamp_us);
  ++packets_seen_;

  std::uint32_t p1 = pkt.sport.value_or(0), p2 = pkt.dport.value_or(0);
  Key key;
  key.proto = pkt.proto;
  if (std::tie(pkt.src_addr, p1) <= std::tie(pkt.dst_addr, p2)) {
    key.a_addr = pkt.src_addr;
    key.a_port = p1;
    key.b_addr = pkt.dst_addr;
    key.b_port = p2;
  } else {
    key.a_addr = pkt.dst_addr;
    key.a_port = p2;
    key.b_addr = pkt.src_addr;
    key.b_port = p1;
  }

  auto it = flows_.find(key);
  if (it == flows_.end()) {
    auto st = std::make_unique<FlowState>();
    st->seq = next_flow_seq_++;
    st->src_addr = pkt.src_addr;
    st->dst_addr = pkt.dst_addr;
    st->sport = pkt.sport;
    st->dport = pkt.dport;
    st->proto = pkt.proto;
    st->start_us = st->last_us = pkt.timestamp_us;
    it = flows_.emplace(key, std::move(st)).first;
  }
  FlowState& st = *it->second;
  bool forward = pkt.src_addr == st.src_addr &&
                 pkt.sport.value_or(0) == st.sport.value_or(0);
  st.last_us = std::max(st.last_us, pkt.timestamp_us);
  if (forward) {
    ++st.src_pkts;
    st.src_bytes += pkt.ip_total_len;
    st.s_app += pkt.l4_payload_len;
    st.s_tos = st.src_pkts == 1 ? pkt.tos : st.s_tos;
    if (!st.s_ttl_set) {
      st.s_ttl = pkt.ttl;
      st.s_ttl_set = true;
    }
    if (!st.src_win_set && pkt.proto == "tcp") {
      st.src_win = pkt.tcp_window;
      st.src_win_set = true;
    }
  } else {
    ++st.dst_pkts;
    st.dst_bytes += pkt.ip_total_len;
    st.d_app += pkt.l4_payload_len;
    st.d_tos = st.dst_pkts == 1 ? pkt.tos : st.d_tos;
    if (!st.d_ttl_set) {
      st.d_ttl = pkt.ttl;
      st.d_ttl_set = true;
    }
    if (!st.dst_win_set && pkt.proto == "tcp") {
      st.dst_win = pkt.tcp_window;
      st.dst_win_set = true;
    }
  }

  if (pkt.proto == "tcp") {
    using namespace tcp_flags;
    bool syn = pkt.tcp_flags & SYN, ack = pkt.tcp_flags & ACK;
    if (syn && !ack && !st.saw_syn) {
      st.saw_syn = true;
      st.syn_us = pkt.timestamp_us;
    } else if (syn && ack && st.saw_syn && !st.saw_synack) {
      st.saw_synack = true;
      st.synack_us = pkt.timestamp_us;
    } else if (!syn && ack && st.saw_synack && !st.saw_est_ack) {
      st.saw_est_ack = true;
      st.ack_us = pkt.timestamp_us;
    }
    if (pkt.tcp_flags & FIN) (forward ? st.fin_src : st.fin_dst) = true;
    if (pkt.tcp_flags & RST) st.saw_rst = true;
    if (st.saw_rst || (st.fin_src && st.fin_dst)) {
      emit(st);
      flows_.erase(it);
    }
  }
}

void FlowAggregator::expire(std::int64_t now_us) {
  std::vector<std::pair<Key, FlowState*>> expired;
  for (auto& [key, st] : flows_) {
    double idle_s = (now_us - st->last_us) / 1e6;
    double age_s = (now_us - st->start_us) / 1e6;
    if (idle_s > cfg_.idle_timeout_s || age_s > cfg_.active_timeout_s)
      expired.emplace_back(key, st.get());
  }
  std::sort(expired.begin(), expired.end(),
            [](const auto& a, const auto& b) { return a.second->seq < b.second->seq; });
  for (auto& [key, st] : expired) {
    emit(*st);
    flows_.erase(key);
  }
}

void FlowAggregator::flush() {
  std::vector<FlowState*> rest;
  rest.reserve(flows_.size());
  for (auto& [key, st] : flows_) rest.push_back(st.get());
  std::sort(rest.begin(), rest.end(),
            [](const FlowState* a, const FlowState* b) { return a->seq < b->seq; });
  for (FlowState* st : rest) emit(*st);
  flows_.clear();
}

void FlowAggregator::emit(FlowState& st) {
  if (st.closed) return;
  st.closed = true;

  FlowRecord f;
  f.src_addr = st.src_addr;
  f.dst_addr = st.dst_addr;
  f.proto = st.proto;
  f.sport = st.sport;
  f.dport = st.dport;
  f.s_tos = st.s_tos;
  f.d_tos = st.d_tos;
  f.src_win = st.src_win;
  f.dst_win = st.dst_win;
  f.s_ttl = st.s_ttl;
  f.d_ttl = st.d_ttl;
  f.s_hops = st.s_ttl_set ? estimate_hops(st.s_ttl) : 0;
  f.d_hops = st.d_ttl_set ? estimate_hops(st.d_ttl) : 0;
  f.start_time_us = st.start_us;
  f.last_time_us = st.last_us;
  f.src_pkts = st.src_pkts;
  f.dst_pkts = st.dst_pkts;
  f.tot_pkts = st.src_pkts + st.dst_pkts;
  f.src_bytes = st.src_bytes;
  f.dst_bytes = st.dst_bytes;
  f.tot_bytes = st.src_bytes + st.dst_bytes;
  f.s_app_bytes = st.s_app;
  f.d_app_bytes = st.d_app;
  f.tot_app_bytes = st.s_app + st.d_app;
  f.dur = (st.last_us - st.start_us) / 1e6;
  f.rate = f.dur > 0 ? f.tot_pkts / f.dur : 0.0;
  f.src_rate = f.dur > 0 ? f.src_pkts / f.dur : 0.0;
  f.dst_rate = f.dur > 0 ? f.dst_pkts / f.dur : 0.0;
  if (st.syn_us >= 0 && st.synack_us >= 0)
    f.syn_ack = (st.synack_us - st.syn_us) / 1e6;
  if (st.synack_us >= 0 && st.ack_us >= 0)
    f.ack_dat = (st.ack_us - st.synack_us) / 1e6;
  f.tcp_rtt = f.syn_ack + f.ack_dat;

  if (st.proto != "tcp")
    f.state = "INT";
  else if (st.saw_rst)
    f.state = "RST";
  else if (st.fin_src && st.fin_dst)
    f.state = "FIN";
  else if (st.saw_est_ack)
    f.state = "EST";
  else
    f.state = "SYN";

  sink_(std::move(f));
}

}  // namespace flowhawk::ingest
