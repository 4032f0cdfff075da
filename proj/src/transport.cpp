#include "secagg/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>

#include "secagg/error.hpp"

namespace secagg {

namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text(std::string_view what) {
  return std::string(what) + ": " + std::strerror(errno);
}

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

// Validates a header once its 9 bytes are available; returns the length field.
std::uint32_t check_header(const std::uint8_t* p) {
  const std::uint32_t len = read_be32(p);
  if (len < 5) fail(Errc::Truncated, "frame length shorter than its header");
  if (len > kMaxFrameLength) fail(Errc::FrameTooLarge, "frame length exceeds 16 MiB");
  if (!is_registered_msg_type(p[4]))
    fail(Errc::UnknownMsgType, "unregistered msg_type " + std::to_string(p[4]));
  return len;
}

Frame parse_complete(const std::uint8_t* p, std::uint32_t len) {
  Frame f;
  f.type = static_cast<MsgType>(p[4]);
  f.round_id = read_be32(p + 5);
  f.body.assign(p + kFrameHeaderBytes, p + 4 + len);
  return f;
}

}  // namespace

bool is_registered_msg_type(std::uint8_t v) noexcept { return v >= 1 && v <= 12; }

std::string_view msg_type_name(MsgType t) noexcept {
  switch (t) {
    case MsgType::Query: return "QUERY";
    case MsgType::EncQuery: return "ENC_QUERY";
    case MsgType::Subresult: return "SUBRESULT";
    case MsgType::EncAggregate: return "ENC_AGGREGATE";
    case MsgType::PartialDec: return "PARTIAL_DEC";
    case MsgType::FinalResult: return "FINAL_RESULT";
    case MsgType::OtAnnounce: return "OT_ANNOUNCE";
    case MsgType::OtResponse: return "OT_RESPONSE";
    case MsgType::OtPayloads: return "OT_PAYLOADS";
    case MsgType::AttestReq: return "ATTEST_REQ";
    case MsgType::AttestReport: return "ATTEST_REPORT";
    case MsgType::Setup: return "SETUP";
  }
  return "?";
}

Bytes frame_encode(MsgType type, std::uint32_t round_id, ByteView body) {
  if (body.size() > kMaxBodyBytes) fail(Errc::FrameTooLarge, "frame body exceeds 16 MiB - 5");
  ByteWriter w(kFrameHeaderBytes + body.size());
  w.u32_be(static_cast<std::uint32_t>(5 + body.size()))
      .u8(static_cast<std::uint8_t>(type))
      .u32_be(round_id)
      .raw(body);
  return std::move(w).take();
}

Frame frame_decode(ByteView wire) {
  if (wire.size() < kFrameHeaderBytes) fail(Errc::Truncated, "frame shorter than its header");
  const std::uint32_t len = check_header(wire.data());
  if (wire.size() < 4 + std::size_t{len}) fail(Errc::Truncated, "frame body cut short");
  if (wire.size() > 4 + std::size_t{len}) fail(Errc::LengthMismatch, "bytes after frame end");
  return parse_complete(wire.data(), len);
}

void FrameDecoder::feed(ByteView chunk) {
  if (pos_ > 0 && pos_ == buf_.size()) {
    buf_.clear();
    pos_ = 0;
  }
  buf_.insert(buf_.end(), chunk.begin(), chunk.end());
}

std::optional<Frame> FrameDecoder::next() {
  if (buffered() < kFrameHeaderBytes) return std::nullopt;
  const std::uint8_t* p = buf_.data() + pos_;
  const std::uint32_t len = check_header(p);
  if (buffered() < 4 + std::size_t{len}) return std::nullopt;
  Frame f = parse_complete(p, len);
  pos_ += 4 + len;
  if (pos_ > (1u << 20) && pos_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
    pos_ = 0;
  }
  return f;
}

StatsSnapshot StatsSnapshot::operator-(const StatsSnapshot& o) const {
  return {bytes_sent - o.bytes_sent, bytes_received - o.bytes_received,
          messages_sent - o.messages_sent, messages_received - o.messages_received,
          wall_time_blocked - o.wall_time_blocked};
}

StatsSnapshot& StatsSnapshot::operator+=(const StatsSnapshot& o) {
  bytes_sent += o.bytes_sent;
  bytes_received += o.bytes_received;
  messages_sent += o.messages_sent;
  messages_received += o.messages_received;
  wall_time_blocked += o.wall_time_blocked;
  return *this;
}

StatsSnapshot ChannelStats::snapshot() const {
  return {bytes_sent_.load(), bytes_received_.load(), messages_sent_.load(),
          messages_received_.load(), std::chrono::nanoseconds(blocked_ns_.load())};
}

void Channel::send(MsgType type, std::uint32_t round_id, ByteView body) {
  Frame f{type, round_id, Bytes(body.begin(), body.end())};
  if (f.body.size() > kMaxBodyBytes) fail(Errc::FrameTooLarge, "frame body exceeds 16 MiB - 5");
  if (observer_) observer_(Direction::Sent, f);
  do_send(f);
}

Frame Channel::recv() {
  Frame f = do_recv();
  if (observer_) observer_(Direction::Received, f);
  return f;
}

std::string_view transport_name(TransportKind k) noexcept {
  return k == TransportKind::Tcp ? "tcp" : "inproc";
}

TransportKind parse_transport(std::string_view s) {
  if (s == "inproc") return TransportKind::InProc;
  if (s == "tcp") return TransportKind::Tcp;
  fail(Errc::InvalidConfig, "unknown transport '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- in-process

namespace {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> q;
  bool closed = false;
};

struct PipePair {
  Pipe dir[2];

  void close_all() {
    for (auto& p : dir) {
      std::lock_guard lock(p.mu);
      p.closed = true;
      p.cv.notify_all();
    }
  }
};

class InProcChannel final : public Channel {
 public:
  InProcChannel(std::shared_ptr<PipePair> pipes, int side) : pipes_(std::move(pipes)), side_(side) {}
  ~InProcChannel() override { close(); }

  void close() override { pipes_->close_all(); }

 protected:
  void do_send(const Frame& f) override {
    Bytes wire = frame_encode(f.type, f.round_id, f.body);
    const std::size_t n = wire.size();
    Pipe& out = pipes_->dir[1 - side_];
    {
      std::lock_guard lock(out.mu);
      if (out.closed) fail(Errc::ChannelClosed, "send on closed channel");
      out.q.push_back(std::move(wire));
    }
    out.cv.notify_one();
    stats_.on_send(n);
  }

  Frame do_recv() override {
    Pipe& in = pipes_->dir[side_];
    std::unique_lock lock(in.mu);
    const auto start = Clock::now();
    in.cv.wait(lock, [&] { return !in.q.empty() || in.closed; });
    stats_.on_blocked(Clock::now() - start);
    if (in.q.empty()) fail(Errc::ChannelClosed, "peer closed the channel");
    Bytes wire = std::move(in.q.front());
    in.q.pop_front();
    lock.unlock();
    stats_.on_receive(wire.size());
    return frame_decode(wire);
  }

 private:
  std::shared_ptr<PipePair> pipes_;
  int side_;
};

// ---------------------------------------------------------------------- TCP

class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpChannel() override {
    close();
    ::close(fd_);
  }

  void close() override {
    if (!shut_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
  }

 protected:
  void do_send(const Frame& f) override {
    const Bytes wire = frame_encode(f.type, f.round_id, f.body);
    std::lock_guard lock(send_mu_);
    std::size_t off = 0;
    const auto start = Clock::now();
    while (off < wire.size()) {
      const ssize_t w = ::send(fd_, wire.data() + off, wire.size() - off, MSG_NOSIGNAL);
      if (w < 0) {
        if (errno == EINTR) continue;
        if (shut_) fail(Errc::ChannelClosed, "send on closed channel");
        fail(Errc::ConnectionError, errno_text("send"));
      }
      off += static_cast<std::size_t>(w);
    }
    stats_.on_blocked(Clock::now() - start);
    stats_.on_send(wire.size());
  }

  Frame do_recv() override {
    std::uint8_t buf[64 * 1024];
    for (;;) {
      if (auto f = decoder_.next()) {
        stats_.on_receive(f->wire_size());
        return std::move(*f);
      }
      const auto start = Clock::now();
      const ssize_t r = ::recv(fd_, buf, sizeof buf, 0);
      stats_.on_blocked(Clock::now() - start);
      if (r < 0) {
        if (errno == EINTR) continue;
        if (shut_) fail(Errc::ChannelClosed, "channel closed");
        fail(Errc::ConnectionError, errno_text("recv"));
      }
      if (r == 0) {
        if (decoder_.buffered() > 0) fail(Errc::Truncated, "stream ended mid-frame");
        fail(Errc::ChannelClosed, "peer closed the connection");
      }
      decoder_.feed(ByteView(buf, static_cast<std::size_t>(r)));
    }
  }

 private:
  int fd_;
  std::atomic<bool> shut_{false};
  std::mutex send_mu_;
  FrameDecoder decoder_;
};

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string h = host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1)
    fail(Errc::ConnectionError, "not an IPv4 address: " + host);
  return addr;
}

}  // namespace

std::pair<ChannelPtr, ChannelPtr> inproc_channel_pair() {
  auto pipes = std::make_shared<PipePair>();
  return {std::make_unique<InProcChannel>(pipes, 0), std::make_unique<InProcChannel>(pipes, 1)};
}

TcpListener::TcpListener(std::uint16_t port, const std::string& host) {
  const sockaddr_in addr = make_addr(host, port);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) fail(Errc::ConnectionError, errno_text("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(fd_, 512) != 0) {
    const std::string msg = errno_text("bind/listen on port " + std::to_string(port));
    ::close(fd_);
    fd_ = -1;
    fail(Errc::ConnectionError, msg);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() { close(); }

void TcpListener::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

ChannelPtr TcpListener::accept(std::chrono::milliseconds timeout) {
  if (fd_ < 0) fail(Errc::ConnectionError, "listener closed");
  pollfd p{fd_, POLLIN, 0};
  int rc;
  do {
    rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
  } while (rc < 0 && errno == EINTR);
  if (rc == 0) fail(Errc::ConnectionError, "accept timed out");
  if (rc < 0) fail(Errc::ConnectionError, errno_text("poll"));
  const int c = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (c < 0) fail(Errc::ConnectionError, errno_text("accept"));
  return std::make_unique<TcpChannel>(c);
}

ChannelPtr tcp_connect(const std::string& host, std::uint16_t port) {
  const sockaddr_in addr = make_addr(host, port);
  const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) fail(Errc::ConnectionError, errno_text("socket"));
  int rc;
  do {
    rc = ::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
  } while (rc != 0 && errno == EINTR);
  if (rc != 0) {
    const std::string msg = errno_text("connect to " + host + ":" + std::to_string(port));
    ::close(fd);
    fail(Errc::ConnectionError, msg);
  }
  return std::make_unique<TcpChannel>(fd);
}

std::pair<ChannelPtr, ChannelPtr> channel_pair(TransportKind kind) {
  if (kind == TransportKind::InProc) return inproc_channel_pair();
  TcpListener listener(0);
  ChannelPtr client = tcp_connect("127.0.0.1", listener.port());
  ChannelPtr server = listener.accept(std::chrono::seconds(5));
  return {std::move(client), std::move(server)};
}

}  // namespace secagg
