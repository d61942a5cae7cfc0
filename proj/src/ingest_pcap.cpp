#include "flowhawk/ingest.hpp"

#include <cstdio>
#include <cstring>

namespace flowhawk::ingest {
namespace {

constexpr std::uint32_t kMagicUsec = 0xa1b2c3d4;
constexpr std::uint32_t kMagicUsecSwap = 0xd4c3b2a1;
constexpr std::uint32_t kMagicNsec = 0xa1b23c4d;
constexpr std::uint32_t kMagicNsecSwap = 0x4d3cb2a1;

std::uint32_t bswap32(std::uint32_t v) { return __builtin_bswap32(v); }

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

struct PcapReader::Impl {
  std::unique_ptr<std::FILE, FileCloser> file;
  bool swapped = false;
  bool nsec = false;
};

PcapReader::PcapReader(const std::string& path) : impl_(new Impl) {
  impl_->file.reset(std::fopen(path.c_str(), "rb"));
  if (!impl_->file) throw IngestError("cannot open pcap file: " + path);
  std::uint8_t hdr[24];
  if (std::fread(hdr, 1, sizeof hdr, impl_->file.get()) != sizeof hdr)
    throw BadMagic();
  std::uint32_t magic;
  std::memcpy(&magic, hdr, 4);
  switch (magic) {
    case kMagicUsec: break;
    case kMagicNsec: impl_->nsec = true; break;
    case kMagicUsecSwap: impl_->swapped = true; break;
    case kMagicNsecSwap: impl_->swapped = true; impl_->nsec = true; break;
    default: throw BadMagic();
  }
  std::uint32_t linktype;
  std::memcpy(&linktype, hdr + 20, 4);
  if (impl_->swapped) linktype = bswap32(linktype);
  link_type_ = (linktype == 101 || linktype == 12 || linktype == 14)
                   ? LinkType::RawIP
                   : LinkType::Ethernet;
}

PcapReader::~PcapReader() = default;

bool PcapReader::next(std::vector<std::uint8_t>& frame, std::int64_t& timestamp_us) {
  std::uint8_t rec[16];
  std::size_t got = std::fread(rec, 1, sizeof rec, impl_->file.get());
  if (got == 0) return false;
  if (got != sizeof rec) throw TruncatedRecord();
  std::uint32_t ts_sec, ts_frac, incl_len;
  std::memcpy(&ts_sec, rec, 4);
  std::memcpy(&ts_frac, rec + 4, 4);
  std::memcpy(&incl_len, rec + 8, 4);
  if (impl_->swapped) {
    ts_sec = bswap32(ts_sec);
    ts_frac = bswap32(ts_frac);
    incl_len = bswap32(incl_len);
  }
  frame.resize(incl_len);
  if (incl_len &&
      std::fread(frame.data(), 1, incl_len, impl_->file.get()) != incl_len)
    throw TruncatedRecord();
  std::int64_t frac_us = impl_->nsec ? ts_frac / 1000 : ts_frac;
  timestamp_us = static_cast<std::int64_t>(ts_sec) * 1000000 + frac_us;
  return true;
}

struct PcapWriter::Impl {
  std::unique_ptr<std::FILE, FileCloser> file;
};

PcapWriter::PcapWriter(const std::string& path, LinkType link_type)
    : impl_(new Impl) {
  impl_->file.reset(std::fopen(path.c_str(), "wb"));
  if (!impl_->file) throw IngestError("cannot create pcap file: " + path);
  std::uint32_t hdr[6] = {kMagicUsec, 0, 0, 0, 65535,
                          link_type == LinkType::RawIP ? 101u : 1u};
  std::uint16_t* ver = reinterpret_cast<std::uint16_t*>(&hdr[1]);
  ver[0] = 2;
  ver[1] = 4;
  std::fwrite(hdr, sizeof hdr, 1, impl_->file.get());
}

PcapWriter::~PcapWriter() = default;

void PcapWriter::write(std::span<const std::uint8_t> frame,
                       std::int64_t timestamp_us) {
  std::uint32_t rec[4] = {
      static_cast<std::uint32_t>(timestamp_us / 1000000),
      static_cast<std::uint32_t>(timestamp_us % 1000000),
      static_cast<std::uint32_t>(frame.size()),
      static_cast<std::uint32_t>(frame.size())};
  std::fwrite(rec, sizeof rec, 1, impl_->file.get());
  std::fwrite(frame.data(), 1, frame.size(), impl_->file.get());
}

std::vector<PacketSummary> read_pcap(const std::string& path,
                                     std::uint64_t* skip_counter) {
  PcapReader reader(path);
  std::vector<PacketSummary> out;
  std::vector<std::uint8_t> frame;
  std::int64_t ts;
  while (reader.next(frame, ts)) {
    auto pkt = decode_packet(frame, reader.link_type());
    if (!pkt) {
      if (skip_counter) ++*skip_counter;
      continue;
    }
    pkt->timestamp_us = ts;
    out.push_back(std::move(*pkt));
  }
  return out;
}

}  // namespace flowhawk::ingest
