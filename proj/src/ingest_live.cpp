#include "flowhawk/ingest.hpp"

#include <net/if.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#if defined(__linux__)
#include <linux/if_ether.h>
#include <linux/if_packet.h>
#endif

namespace flowhawk::ingest {

struct LiveCapture::Impl {
  int fd = -1;
  std::atomic<bool> stop_requested{false};
  std::thread worker;
  Callback cb;
};

LiveCapture::LiveCapture(const std::string& interface_name, Callback cb)
    : impl_(new Impl) {
  impl_->cb = std::move(cb);
#if defined(__linux__)
  unsigned idx = if_nametoindex(interface_name.c_str());
  if (idx == 0) throw NoSuchInterface(interface_name);

  impl_->fd = ::socket(AF_PACKET, SOCK_RAW, htons(ETH_P_ALL));
  if (impl_->fd < 0) {
    if (errno == EPERM || errno == EACCES) throw PermissionDenied();
    throw IngestError(std::string("socket: ") + std::strerror(errno));
  }
  sockaddr_ll addr{};
  addr.sll_family = AF_PACKET;
  addr.sll_protocol = htons(ETH_P_ALL);
  addr.sll_ifindex = static_cast<int>(idx);
  if (::bind(impl_->fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    int e = errno;
    ::close(impl_->fd);
    if (e == EPERM || e == EACCES) throw PermissionDenied();
    throw IngestError(std::string("bind: ") + std::strerror(e));
  }
  // Short receive timeout so the worker notices cancellation promptly.
  timeval tv{0, 100000};
  setsockopt(impl_->fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);

  impl_->worker = std::thread([impl = impl_.get()] {
    std::vector<std::uint8_t> buf(65536);
    while (!impl->stop_requested.load(std::memory_order_relaxed)) {
      ssize_t n = ::recv(impl->fd, buf.data(), buf.size(), 0);
      if (n <= 0) continue;  // timeout or transient error
      std::int64_t ts = std::chrono::duration_cast<std::chrono::microseconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count();
      try {
        auto pkt = decode_packet(
            std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)),
            LinkType::Ethernet);
        if (pkt) {
          pkt->timestamp_us = ts;
          impl->cb(*pkt);
        }
      } catch (const TruncatedFrame&) {
        // malformed frame off the wire; drop it
      }
    }
  });
#else
  (void)interface_name;
  throw IngestError("live capture is only supported on Linux");
#endif
}

LiveCapture::~LiveCapture() { stop(); }

void LiveCapture::stop() {
  if (!impl_) return;
  impl_->stop_requested.store(true, std::memory_order_relaxed);
  if (impl_->worker.joinable()) impl_->worker.join();
  if (impl_->fd >= 0) {
    ::close(impl_->fd);
    impl_->fd = -1;
  }
}

}  // namespace flowhawk::ingest
