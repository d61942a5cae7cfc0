// Minimal RFC 6455 websocket server for the detection feed. Text frames
// only; each message is a JSON object with "type" of "flow" or "alert". A
// client text message containing "get_all_data" (or a JSON object with type
// "all_data") triggers a replay of the retained history to that client.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/sha.h>

#include <atomic>
#include <cstring>
#include <deque>
#include <list>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "flowhawk/detector.hpp"

namespace flowhawk::detector {

using nlohmann::json;

namespace {

constexpr const char* kWsGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string base64(const unsigned char* data, std::size_t n) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  for (std::size_t i = 0; i < n; i += 3) {
    std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
    if (i + 1 < n) v |= static_cast<std::uint32_t>(data[i + 1]) << 8;
    if (i + 2 < n) v |= data[i + 2];
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += i + 1 < n ? alphabet[(v >> 6) & 63] : '=';
    out += i + 2 < n ? alphabet[v & 63] : '=';
  }
  return out;
}

std::string accept_key(const std::string& client_key) {
  std::string joined = client_key + kWsGuid;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(joined.data()), joined.size(),
       digest);
  return base64(digest, SHA_DIGEST_LENGTH);
}

// Full frame: FIN set, no masking (server to client).
std::string encode_frame(std::uint8_t opcode, const std::string& payload) {
  std::string frame;
  frame.push_back(static_cast<char>(0x80 | opcode));
  std::size_t n = payload.size();
  if (n < 126) {
    frame.push_back(static_cast<char>(n));
  } else if (n < 65536) {
    frame.push_back(126);
    frame.push_back(static_cast<char>((n >> 8) & 0xff));
    frame.push_back(static_cast<char>(n & 0xff));
  } else {
    frame.push_back(127);
    for (int shift = 56; shift >= 0; shift -= 8)
      frame.push_back(static_cast<char>((n >> shift) & 0xff));
  }
  frame += payload;
  return frame;
}

bool send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

bool recv_exact(int fd, void* buf, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    ssize_t r = ::recv(fd, static_cast<char*>(buf) + off, n - off, 0);
    if (r <= 0) return false;
    off += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace

struct StreamServer::Impl {
  int listen_fd = -1;
  std::uint16_t port = 0;
  std::atomic<bool> stopping{false};

  struct Client {
    int fd = -1;
    std::thread reader;
    bool dead = false;
  };
  std::mutex mu;                    // guards clients and the ring buffers
  std::list<Client> clients;
  std::deque<std::string> flow_history;
  std::deque<std::string> alert_history;
  std::thread acceptor;

  void broadcast(const std::string& message) {
    std::string frame = encode_frame(0x1, message);
    std::lock_guard<std::mutex> lock(mu);
    for (auto& c : clients)
      if (!c.dead && !send_all(c.fd, frame)) drop(c);
  }

  // Called with mu held. Wakes the reader; reaping happens in stop()/accept.
  void drop(Client& c) {
    if (!c.dead) {
      c.dead = true;
      ::shutdown(c.fd, SHUT_RDWR);
    }
  }

  void replay(int fd) {
    std::vector<std::string> frames;
    {
      std::lock_guard<std::mutex> lock(mu);
      frames.reserve(flow_history.size() + alert_history.size());
      for (const auto& m : flow_history) frames.push_back(encode_frame(0x1, m));
      for (const auto& m : alert_history) frames.push_back(encode_frame(0x1, m));
    }
    for (const auto& f : frames)
      if (!send_all(fd, f)) break;
  }

  bool handshake(int fd) {
    std::string request;
    char buf[1024];
    while (request.find("\r\n\r\n") == std::string::npos) {
      if (request.size() > 8192) return false;
      ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
      if (n <= 0) return false;
      request.append(buf, static_cast<std::size_t>(n));
    }
    auto pos = request.find("Sec-WebSocket-Key:");
    if (pos == std::string::npos) return false;
    pos += std::strlen("Sec-WebSocket-Key:");
    auto end = request.find("\r\n", pos);
    std::string key = request.substr(pos, end - pos);
    key.erase(0, key.find_first_not_of(' '));
    key.erase(key.find_last_not_of(" \t") + 1);

    std::string response =
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        "Sec-WebSocket-Accept: " + accept_key(key) + "\r\n\r\n";
    return send_all(fd, response);
  }

  void reader_loop(Client* client) {
    int fd = client->fd;
    while (!stopping.load()) {
      std::uint8_t header[2];
      if (!recv_exact(fd, header, 2)) break;
      std::uint8_t opcode = header[0] & 0x0f;
      bool masked = header[1] & 0x80;
      std::uint64_t len = header[1] & 0x7f;
      if (len == 126) {
        std::uint8_t ext[2];
        if (!recv_exact(fd, ext, 2)) break;
        len = (static_cast<std::uint64_t>(ext[0]) << 8) | ext[1];
      } else if (len == 127) {
        std::uint8_t ext[8];
        if (!recv_exact(fd, ext, 8)) break;
        len = 0;
        for (int i = 0; i < 8; ++i) len = (len << 8) | ext[i];
      }
      if (len > (1u << 20)) break;  // oversized client frame
      std::uint8_t mask[4] = {0, 0, 0, 0};
      if (masked && !recv_exact(fd, mask, 4)) break;
      std::string payload(len, '\0');
      if (len > 0 && !recv_exact(fd, payload.data(), len)) break;
      if (masked)
        for (std::uint64_t i = 0; i < len; ++i)
          payload[i] = static_cast<char>(payload[i] ^ mask[i % 4]);

      if (opcode == 0x8) break;  // close
      if (opcode == 0x9) {       // ping -> pong
        if (!send_all(fd, encode_frame(0xA, payload))) break;
        continue;
      }
      if (opcode == 0x1 && payload.find("all_data") != std::string::npos)
        replay(fd);
    }
    std::lock_guard<std::mutex> lock(mu);
    drop(*client);
  }

  void accept_loop() {
    while (!stopping.load()) {
      pollfd pfd{listen_fd, POLLIN, 0};
      int r = ::poll(&pfd, 1, 100);
      if (r <= 0) continue;
      int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) continue;
      // A stalled send must not hold up broadcasting to other clients.
      timeval tv{0, 200000};
      ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      if (!handshake(fd)) {
        ::close(fd);
        continue;
      }
      std::lock_guard<std::mutex> lock(mu);
      clients.emplace_back();
      Client* c = &clients.back();
      c->fd = fd;
      c->reader = std::thread([this, c] { reader_loop(c); });
    }
  }
};

StreamServer::StreamServer(const std::string& bind_address) : impl_(new Impl) {
  auto colon = bind_address.rfind(':');
  if (colon == std::string::npos) throw BindFailed(bind_address);
  std::string host = bind_address.substr(0, colon);
  int port = std::stoi(bind_address.substr(colon + 1));
  if (host.empty()) host = "127.0.0.1";

  impl_->listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (impl_->listen_fd < 0) throw BindFailed(bind_address);
  int one = 1;
  ::setsockopt(impl_->listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
      ::bind(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(impl_->listen_fd, 16) != 0) {
    ::close(impl_->listen_fd);
    impl_->listen_fd = -1;
    throw BindFailed(bind_address);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(impl_->listen_fd, reinterpret_cast<sockaddr*>(&addr), &len);
  impl_->port = ntohs(addr.sin_port);
  impl_->acceptor = std::thread([this] { impl_->accept_loop(); });
}

StreamServer::~StreamServer() { stop(); }

std::uint16_t StreamServer::port() const { return impl_->port; }

void StreamServer::publish_flow(const FlowRecord& flow, LabelClass label) {
  json msg = {{"type", "flow"},
              {"flow", serialize_flow_line(flow, extended_field_order())},
              {"label", to_string(label)}};
  std::string text = msg.dump();
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->flow_history.push_back(text);
    if (impl_->flow_history.size() > kFlowRetention)
      impl_->flow_history.pop_front();
  }
  impl_->broadcast(text);
}

void StreamServer::publish_alert(const std::string& timestamp,
                                 const std::vector<std::string>& model_ids,
                                 const FlowRecord& flow) {
  json msg = {{"type", "alert"},
              {"timestamp", timestamp},
              {"model_ids", model_ids},
              {"severity", "botnet"},
              {"flow", serialize_flow_line(flow, extended_field_order())}};
  std::string text = msg.dump();
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->alert_history.push_back(text);
    if (impl_->alert_history.size() > kAlertRetention)
      impl_->alert_history.pop_front();
  }
  impl_->broadcast(text);
}

std::size_t StreamServer::client_count() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  std::size_t n = 0;
  for (const auto& c : impl_->clients)
    if (!c.dead) ++n;
  return n;
}

void StreamServer::stop() {
  if (impl_->stopping.exchange(true)) return;
  if (impl_->acceptor.joinable()) impl_->acceptor.join();
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    for (auto& c : impl_->clients) impl_->drop(c);
  }
  for (auto& c : impl_->clients) {
    if (c.reader.joinable()) c.reader.join();
    if (c.fd >= 0) ::close(c.fd);
  }
  impl_->clients.clear();
  if (impl_->listen_fd >= 0) {
    ::close(impl_->listen_fd);
    impl_->listen_fd = -1;
  }
}

}  // namespace flowhawk::detector
