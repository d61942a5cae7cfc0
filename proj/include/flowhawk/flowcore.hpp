#pragma once
// Canonical bidirectional flow record and its comma-delimited text format.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flowhawk {

enum class LabelClass { Normal, Botnet };

inline const char* to_string(LabelClass c) {
  return c == LabelClass::Normal ? "Normal" : "Botnet";
}

struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FieldCountMismatch : FlowError {
  FieldCountMismatch(std::size_t line_no, std::size_t got, std::size_t want)
      : FlowError("line " + std::to_string(line_no) + ": expected " +
                  std::to_string(want) + " fields, got " + std::to_string(got)) {}
};
struct NumericParse : FlowError {
  NumericParse(std::size_t line_no, std::size_t col, const std::string& tok)
      : FlowError("line " + std::to_string(line_no) + ", column " +
                  std::to_string(col) + ": cannot parse '" + tok + "'") {}
};
struct UnknownField : FlowError {
  explicit UnknownField(const std::string& name)
      : FlowError("unknown flow field '" + name + "'") {}
};

// One bidirectional network flow, extended feature set. Timestamps are
// microseconds since the Unix epoch; durations and TCP setup times are seconds.
struct FlowRecord {
  std::string src_addr;
  std::string dst_addr;
  std::string proto;
  std::optional<std::uint32_t> sport;  // empty for portless protocols
  std::optional<std::uint32_t> dport;
  std::string state;
  std::uint32_t s_tos = 0;
  std::uint32_t d_tos = 0;
  std::uint64_t src_win = 0;
  std::uint64_t dst_win = 0;
  std::uint32_t s_hops = 0;
  std::uint32_t d_hops = 0;
  std::int64_t start_time_us = 0;
  std::int64_t last_time_us = 0;
  std::uint32_t s_ttl = 0;
  std::uint32_t d_ttl = 0;
  double tcp_rtt = 0.0;
  double syn_ack = 0.0;
  double ack_dat = 0.0;
  std::uint64_t src_pkts = 0;
  std::uint64_t dst_pkts = 0;
  std::uint64_t src_bytes = 0;
  std::uint64_t dst_bytes = 0;
  std::uint64_t s_app_bytes = 0;
  std::uint64_t d_app_bytes = 0;
  double dur = 0.0;
  std::uint64_t tot_pkts = 0;
  std::uint64_t tot_bytes = 0;
  std::uint64_t tot_app_bytes = 0;
  double rate = 0.0;
  double src_rate = 0.0;
  double dst_rate = 0.0;
  std::optional<std::string> label;

  bool operator==(const FlowRecord&) const = default;
};

// The canonical 33-column order of the extended feature set.
inline constexpr std::array<std::string_view, 33> kExtendedFieldOrder = {
    "SrcAddr",   "DstAddr",   "Proto",    "Sport",     "Dport",    "State",
    "sTos",      "dTos",      "SrcWin",   "DstWin",    "sHops",    "dHops",
    "StartTime", "LastTime",  "sTtl",     "dTtl",      "TcpRtt",   "SynAck",
    "AckDat",    "SrcPkts",   "DstPkts",  "SrcBytes",  "DstBytes", "SAppBytes",
    "DAppBytes", "Dur",       "TotPkts",  "TotBytes",  "TotAppByte", "Rate",
    "SrcRate",   "DstRate",   "Label"};

std::vector<std::string> extended_field_order();

// Maps a raw dataset label to a class; labels that are neither botnet nor
// normal (CTU "Background" traffic) return nullopt.
std::optional<LabelClass> normalize_label(std::string_view raw);

// Parses one comma-delimited flow line. field_order names the columns; empty
// numeric fields become 0, an empty Sport/Dport/Label becomes absent.
// line_no is used for diagnostics only.
FlowRecord parse_flow_line(std::string_view line,
                           const std::vector<std::string>& field_order,
                           std::size_t line_no = 0);

// Inverse of parse_flow_line. Floats render with 6 fixed decimals, timestamps
// as "YYYY/MM/DD HH:MM:SS.ffffff".
std::string serialize_flow_line(const FlowRecord& flow,
                                const std::vector<std::string>& field_order);

// Timestamp helpers shared with the log formats. Parsing accepts the fixed
// textual format and raw epoch-seconds floats.
std::string format_timestamp_us(std::int64_t us);
std::int64_t parse_timestamp_us(std::string_view text, std::size_t line_no = 0,
                                std::size_t col = 0);

// True for the 24 retained numeric features; addresses, ports, state,
// timestamps and the label are non-numeric for modelling purposes.
bool is_numeric_feature(std::string_view name);

// The 24 checkmarked numeric features, in canonical order.
std::vector<std::string> numeric_feature_names();

// Numeric view of a flow field, defined only for numeric features.
double numeric_feature_value(const FlowRecord& flow, std::string_view name);

}  // namespace flowhawk
