#include "flowhawk/flowcore.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <functional>
#include <unordered_map>

namespace flowhawk {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view tok, std::size_t line_no, std::size_t col) {
  if (tok.empty()) return 0;
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw NumericParse(line_no, col, std::string(tok));
  return v;
}

double parse_f64(std::string_view tok, std::size_t line_no, std::size_t col) {
  if (tok.empty()) return 0.0;
  std::string s(tok);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v))
    throw NumericParse(line_no, col, s);
  return v;
}

std::optional<std::uint32_t> parse_port(std::string_view tok, std::size_t line_no,
                                        std::size_t col) {
  if (tok.empty()) return std::nullopt;
  // CTU files carry ICMP type/code ports in hex (e.g. 0x0303).
  int base = 10;
  std::string_view digits = tok;
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
    base = 16;
    digits = tok.substr(2);
  }
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
  if (ec != std::errc() || p != digits.data() + digits.size())
    throw NumericParse(line_no, col, std::string(tok));
  return v;
}

std::string format_f64(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

using Getter = std::function<std::string(const FlowRecord&)>;
using Setter = std::function<void(FlowRecord&, std::string_view, std::size_t, std::size_t)>;

struct FieldCodec {
  Getter get;
  Setter set;
};

const std::unordered_map<std::string, FieldCodec>& field_codecs() {
  static const std::unordered_map<std::string, FieldCodec> table = [] {
    std::unordered_map<std::string, FieldCodec> t;
    auto u64 = [&t](const char* name, std::uint64_t FlowRecord::*m) {
      t[name] = {[m](const FlowRecord& f) { return std::to_string(f.*m); },
                 [m](FlowRecord& f, std::string_view s, std::size_t ln, std::size_t c) {
                   f.*m = parse_u64(s, ln, c);
                 }};
    };
    auto u32 = [&t](const char* name, std::uint32_t FlowRecord::*m) {
      t[name] = {[m](const FlowRecord& f) { return std::to_string(f.*m); },
                 [m](FlowRecord& f, std::string_view s, std::size_t ln, std::size_t c) {
                   f.*m = static_cast<std::uint32_t>(parse_u64(s, ln, c));
                 }};
    };
    auto f64 = [&t](const char* name, double FlowRecord::*m) {
      t[name] = {[m](const FlowRecord& f) { return format_f64(f.*m); },
                 [m](FlowRecord& f, std::string_view s, std::size_t ln, std::size_t c) {
                   f.*m = parse_f64(s, ln, c);
                 }};
    };
    auto str = [&t](const char* name, std::string FlowRecord::*m) {
      t[name] = {[m](const FlowRecord& f) { return f.*m; },
                 [m](FlowRecord& f, std::string_view s, std::size_t, std::size_t) {
                   f.*m = std::string(s);
                 }};
    };
    auto port = [&t](const char* name, std::optional<std::uint32_t> FlowRecord::*m) {
      t[name] = {[m](const FlowRecord& f) {
                   return (f.*m) ? std::to_string(*(f.*m)) : std::string();
                 },
                 [m](FlowRecord& f, std::string_view s, std::size_t ln, std::size_t c) {
                   f.*m = parse_port(s, ln, c);
                 }};
    };
    auto ts = [&t](const char* name, std::int64_t FlowRecord::*m) {
      t[name] = {[m](const FlowRecord& f) { return format_timestamp_us(f.*m); },
                 [m](FlowRecord& f, std::string_view s, std::size_t ln, std::size_t c) {
                   f.*m = parse_timestamp_us(s, ln, c);
                 }};
    };
    str("SrcAddr", &FlowRecord::src_addr);
    str("DstAddr", &FlowRecord::dst_addr);
    str("Proto", &FlowRecord::proto);
    port("Sport", &FlowRecord::sport);
    port("Dport", &FlowRecord::dport);
    str("State", &FlowRecord::state);
    u32("sTos", &FlowRecord::s_tos);
    u32("dTos", &FlowRecord::d_tos);
    u64("SrcWin", &FlowRecord::src_win);
    u64("DstWin", &FlowRecord::dst_win);
    u32("sHops", &FlowRecord::s_hops);
    u32("dHops", &FlowRecord::d_hops);
    ts("StartTime", &FlowRecord::start_time_us);
    ts("LastTime", &FlowRecord::last_time_us);
    u32("sTtl", &FlowRecord::s_ttl);
    u32("dTtl", &FlowRecord::d_ttl);
    f64("TcpRtt", &FlowRecord::tcp_rtt);
    f64("SynAck", &FlowRecord::syn_ack);
    f64("AckDat", &FlowRecord::ack_dat);
    u64("SrcPkts", &FlowRecord::src_pkts);
    u64("DstPkts", &FlowRecord::dst_pkts);
    u64("SrcBytes", &FlowRecord::src_bytes);
    u64("DstBytes", &FlowRecord::dst_bytes);
    u64("SAppBytes", &FlowRecord::s_app_bytes);
    u64("DAppBytes", &FlowRecord::d_app_bytes);
    f64("Dur", &FlowRecord::dur);
    u64("TotPkts", &FlowRecord::tot_pkts);
    u64("TotBytes", &FlowRecord::tot_bytes);
    u64("TotAppByte", &FlowRecord::tot_app_bytes);
    f64("Rate", &FlowRecord::rate);
    f64("SrcRate", &FlowRecord::src_rate);
    f64("DstRate", &FlowRecord::dst_rate);
    t["Label"] = {[](const FlowRecord& f) { return f.label.value_or(""); },
                  [](FlowRecord& f, std::string_view s, std::size_t, std::size_t) {
                    if (s.empty())
                      f.label.reset();
                    else
                      f.label = std::string(s);
                  }};
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> extended_field_order() {
  std::vector<std::string> out;
  out.reserve(kExtendedFieldOrder.size());
  for (auto name : kExtendedFieldOrder) out.emplace_back(name);
  return out;
}

std::optional<LabelClass> normalize_label(std::string_view raw) {
  std::string l = lower(raw);
  if (l.find("botnet") != std::string::npos) return LabelClass::Botnet;
  if (l.find("normal") != std::string::npos) return LabelClass::Normal;
  return std::nullopt;
}

FlowRecord parse_flow_line(std::string_view line,
                           const std::vector<std::string>& field_order,
                           std::size_t line_no) {
  auto tokens = split_csv(line);
  if (tokens.size() != field_order.size())
    throw FieldCountMismatch(line_no, tokens.size(), field_order.size());
  const auto& codecs = field_codecs();
  FlowRecord flow;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = codecs.find(field_order[i]);
    if (it == codecs.end()) throw UnknownField(field_order[i]);
    it->second.set(flow, tokens[i], line_no, i + 1);
  }
  return flow;
}

std::string serialize_flow_line(const FlowRecord& flow,
                                const std::vector<std::string>& field_order) {
  const auto& codecs = field_codecs();
  std::string out;
  for (std::size_t i = 0; i < field_order.size(); ++i) {
    auto it = codecs.find(field_order[i]);
    if (it == codecs.end()) throw UnknownField(field_order[i]);
    if (i) out += ',';
    out += it->second.get(flow);
  }
  return out;
}

std::string format_timestamp_us(std::int64_t us) {
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
  std::snprintf(buf, sizeof buf, "%04d/%02d/%02d %02d:%02d:%02d.%06" PRId64,
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, frac);
  return buf;
}

std::int64_t parse_timestamp_us(std::string_view text, std::size_t line_no,
                                std::size_t col) {
  if (text.empty()) return 0;
  std::tm tm{};
  int micros = 0;
  if (std::sscanf(std::string(text).c_str(), "%d/%d/%d %d:%d:%d.%6d",
                  &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                  &tm.tm_sec, &micros) >= 6) {
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    std::time_t secs = timegm(&tm);
    return static_cast<std::int64_t>(secs) * 1000000 + micros;
  }
  // Fallback: raw epoch seconds as a float.
  double v = parse_f64(text, line_no, col);
  return static_cast<std::int64_t>(std::llround(v * 1e6));
}

bool is_numeric_feature(std::string_view name) {
  static const std::vector<std::string> numeric = numeric_feature_names();
  return std::find(numeric.begin(), numeric.end(), name) != numeric.end();
}

std::vector<std::string> numeric_feature_names() {
  return {"sTos",      "dTos",      "SrcWin",  "DstWin",   "sHops",
          "dHops",     "sTtl",      "dTtl",    "TcpRtt",   "SynAck",
          "AckDat",    "SrcPkts",   "DstPkts", "SrcBytes", "DstBytes",
          "SAppBytes", "DAppBytes", "Dur",     "TotPkts",  "TotBytes",
          "TotAppByte", "Rate",     "SrcRate", "DstRate"};
}

double numeric_feature_value(const FlowRecord& f, std::string_view name) {
  if (name == "sTos") return f.s_tos;
  if (name == "dTos") return f.d_tos;
  if (name == "SrcWin") return static_cast<double>(f.src_win);
  if (name == "DstWin") return static_cast<double>(f.dst_win);
  if (name == "sHops") return f.s_hops;
  if (name == "dHops") return f.d_hops;
  if (name == "sTtl") return f.s_ttl;
  if (name == "dTtl") return f.d_ttl;
  if (name == "TcpRtt") return f.tcp_rtt;
  if (name == "SynAck") return f.syn_ack;
  if (name == "AckDat") return f.ack_dat;
  if (name == "SrcPkts") return static_cast<double>(f.src_pkts);
  if (name == "DstPkts") return static_cast<double>(f.dst_pkts);
  if (name == "SrcBytes") return static_cast<double>(f.src_bytes);
  if (name == "DstBytes") return static_cast<double>(f.dst_bytes);
  if (name == "SAppBytes") return static_cast<double>(f.s_app_bytes);
  if (name == "DAppBytes") return static_cast<double>(f.d_app_bytes);
  if (name == "Dur") return f.dur;
  if (name == "TotPkts") return static_cast<double>(f.tot_pkts);
  if (name == "TotBytes") return static_cast<double>(f.tot_bytes);
  if (name == "TotAppByte") return static_cast<double>(f.tot_app_bytes);
  if (name == "Rate") return f.rate;
  if (name == "SrcRate") return f.src_rate;
  if (name == "DstRate") return f.dst_rate;
  throw UnknownField(std::string(name));
}

}  // namespace flowhawk
