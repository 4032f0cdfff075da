#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "secagg/bytes.hpp"

namespace secagg {

enum class MsgType : std::uint8_t {
  Query = 1,
  EncQuery = 2,
  Subresult = 3,
  EncAggregate = 4,
  PartialDec = 5,
  FinalResult = 6,
  OtAnnounce = 7,
  OtResponse = 8,
  OtPayloads = 9,
  AttestReq = 10,
  AttestReport = 11,
  Setup = 12,
};

bool is_registered_msg_type(std::uint8_t v) noexcept;
std::string_view msg_type_name(MsgType t) noexcept;

/// Length field covers type + round_id + body.
inline constexpr std::size_t kFrameHeaderBytes = 9;
inline constexpr std::uint32_t kMaxFrameLength = 16u << 20;
inline constexpr std::size_t kMaxBodyBytes = kMaxFrameLength - 5;

struct Frame {
  MsgType type{};
  std::uint32_t round_id = 0;
  Bytes body;

  std::size_t wire_size() const { return kFrameHeaderBytes + body.size(); }
  bool operator==(const Frame&) const = default;
};

/// Raises FrameTooLarge if the body exceeds kMaxBodyBytes.
Bytes frame_encode(MsgType type, std::uint32_t round_id, ByteView body);

/// Decodes exactly one complete frame. Raises Truncated, UnknownMsgType,
/// FrameTooLarge, or LengthMismatch on trailing bytes.
Frame frame_decode(ByteView wire);

/// Incremental decoder for stream transports: feed arbitrary chunks, pull
/// complete frames. Header errors surface from next().
class FrameDecoder {
 public:
  void feed(ByteView chunk);
  std::optional<Frame> next();
  std::size_t buffered() const { return buf_.size() - pos_; }

 private:
  Bytes buf_;
  std::size_t pos_ = 0;
};

struct StatsSnapshot {
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_received = 0;
  std::chrono::nanoseconds wall_time_blocked{0};

  StatsSnapshot operator-(const StatsSnapshot& o) const;
  StatsSnapshot& operator+=(const StatsSnapshot& o);
};

/// Monotone counters, readable from any thread while the owner runs.
class ChannelStats {
 public:
  void on_send(std::size_t bytes) {
    bytes_sent_ += bytes;
    ++messages_sent_;
  }
  void on_receive(std::size_t bytes) {
    bytes_received_ += bytes;
    ++messages_received_;
  }
  void on_blocked(std::chrono::nanoseconds d) { blocked_ns_ += static_cast<std::uint64_t>(d.count()); }

  StatsSnapshot snapshot() const;

 private:
  std::atomic<std::uint64_t> bytes_sent_{0};
  std::atomic<std::uint64_t> bytes_received_{0};
  std::atomic<std::uint64_t> messages_sent_{0};
  std::atomic<std::uint64_t> messages_received_{0};
  std::atomic<std::uint64_t> blocked_ns_{0};
};

enum class Direction { Sent, Received };

/// Sees every frame in plaintext form as it crosses this endpoint. Called on
/// the sending or receiving thread; must be thread-safe.
using FrameObserver = std::function<void(Direction, const Frame&)>;

/// Ordered, reliable, duplex frame channel. One owner task per endpoint;
/// a second thread may call close() to unblock a pending recv().
class Channel {
 public:
  virtual ~Channel() = default;

  void send(MsgType type, std::uint32_t round_id, ByteView body);
  /// Blocks. Raises ChannelClosed once the peer has closed and nothing is
  /// left to read, ConnectionError on I/O failure.
  Frame recv();

  /// Idempotent; wakes any blocked recv() on either endpoint.
  virtual void close() = 0;

  virtual StatsSnapshot stats() const { return stats_.snapshot(); }
  void set_observer(FrameObserver obs) { observer_ = std::move(obs); }

 protected:
  virtual void do_send(const Frame& f) = 0;
  virtual Frame do_recv() = 0;

  ChannelStats stats_;

 private:
  FrameObserver observer_;
};

using ChannelPtr = std::unique_ptr<Channel>;

enum class TransportKind { InProc, Tcp };

std::string_view transport_name(TransportKind k) noexcept;
TransportKind parse_transport(std::string_view s);

/// In-process pair. Frames travel as encoded bytes so counters match TCP.
std::pair<ChannelPtr, ChannelPtr> inproc_channel_pair();

class TcpListener {
 public:
  /// Port 0 picks an ephemeral port. Raises ConnectionError on bind failure.
  explicit TcpListener(std::uint16_t port = 0, const std::string& host = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  /// Raises ConnectionError on timeout or failure.
  ChannelPtr accept(std::chrono::milliseconds timeout = std::chrono::seconds(30));
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Raises ConnectionError if nothing accepts on host:port.
ChannelPtr tcp_connect(const std::string& host, std::uint16_t port);

/// Connected pair of the given kind; TCP goes over loopback.
std::pair<ChannelPtr, ChannelPtr> channel_pair(TransportKind kind);

}  // namespace secagg
