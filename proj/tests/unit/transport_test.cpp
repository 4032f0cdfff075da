#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "secagg/error.hpp"
#include "secagg/random.hpp"
#include "secagg/tee.hpp"
#include "secagg/transport.hpp"

using namespace secagg;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::IoError;
}

const Bytes kGolden = from_hex("000000050100000000");

class BothTransports : public ::testing::TestWithParam<TransportKind> {};

}  // namespace

TEST(FrameEncode, GoldenEmptyFrame) {
  EXPECT_EQ(frame_encode(MsgType::Query, 0, {}), kGolden);
  const auto f = frame_decode(kGolden);
  EXPECT_EQ(f.type, MsgType::Query);
  EXPECT_EQ(f.round_id, 0u);
  EXPECT_TRUE(f.body.empty());
}

TEST(FrameEncode, BigEndianHeader) {
  const auto w = frame_encode(MsgType::OtPayloads, 0x01020304, Bytes{0xaa, 0xbb});
  EXPECT_EQ(to_hex(w), "00000007" "09" "01020304" "aabb");
}

TEST(FrameEncode, RandomBodiesRoundTrip) {
  DeterministicRandom rng(1);
  for (int i = 0; i < 200; ++i) {
    Bytes body(rng.uniform(64 * 1024 + 1));
    rng.fill(body);
    const auto type = static_cast<MsgType>(1 + rng.uniform(12));
    const auto round = static_cast<std::uint32_t>(rng.next_u64());
    const auto wire = frame_encode(type, round, body);
    ASSERT_EQ(wire.size(), kFrameHeaderBytes + body.size());
    const auto f = frame_decode(wire);
    EXPECT_EQ(f, (Frame{type, round, body}));
  }
}

TEST(FrameEncode, SizeLimits) {
  const Bytes limit(kMaxBodyBytes, 0);
  EXPECT_EQ(frame_encode(MsgType::Subresult, 1, limit).size(), kMaxFrameLength + 4u);
  const Bytes big(17u << 20, 0);
  EXPECT_EQ(code_of([&] { frame_encode(MsgType::Subresult, 1, big); }), Errc::FrameTooLarge);
  Bytes huge_header = from_hex("0100000101000000");
  huge_header.push_back(0);
  EXPECT_EQ(code_of([&] { frame_decode(huge_header); }), Errc::FrameTooLarge);
}

TEST(FrameDecode, Errors) {
  auto wire = frame_encode(MsgType::Subresult, 3, Bytes{1, 2, 3, 4});
  EXPECT_EQ(code_of([&] { frame_decode(ByteView(wire).first(wire.size() - 2)); }), Errc::Truncated);
  EXPECT_EQ(code_of([&] { frame_decode(ByteView(wire).first(3)); }), Errc::Truncated);
  auto unknown = wire;
  unknown[4] = 255;
  EXPECT_EQ(code_of([&] { frame_decode(unknown); }), Errc::UnknownMsgType);
  unknown[4] = 0;
  EXPECT_EQ(code_of([&] { frame_decode(unknown); }), Errc::UnknownMsgType);
  auto trailing = wire;
  trailing.push_back(0);
  EXPECT_EQ(code_of([&] { frame_decode(trailing); }), Errc::LengthMismatch);
  const auto short_len = from_hex("000000040100000000");
  EXPECT_THROW(frame_decode(short_len), Error);
}

TEST(FrameDecoder, ResumesAcrossPartialReads) {
  Bytes stream;
  std::vector<Frame> frames;
  for (std::uint32_t i = 0; i < 20; ++i) {
    Frame f{MsgType::PartialDec, i, Bytes(i * 7, static_cast<std::uint8_t>(i))};
    const auto w = frame_encode(f.type, f.round_id, f.body);
    stream.insert(stream.end(), w.begin(), w.end());
    frames.push_back(f);
  }
  FrameDecoder dec;
  std::vector<Frame> got;
  for (std::size_t i = 0; i < stream.size(); i += 3) {
    dec.feed(ByteView(stream).subspan(i, std::min<std::size_t>(3, stream.size() - i)));
    while (auto f = dec.next()) got.push_back(*f);
  }
  EXPECT_EQ(got, frames);
  EXPECT_EQ(dec.buffered(), 0u);
  dec.feed(Bytes{0, 0, 0, 5, 0xee, 0, 0, 0, 0});
  EXPECT_EQ(code_of([&] { dec.next(); }), Errc::UnknownMsgType);
}

TEST(MsgType, Registry) {
  for (int v = 1; v <= 12; ++v) EXPECT_TRUE(is_registered_msg_type(static_cast<std::uint8_t>(v)));
  EXPECT_FALSE(is_registered_msg_type(0));
  EXPECT_FALSE(is_registered_msg_type(13));
  EXPECT_EQ(msg_type_name(MsgType::OtAnnounce), "OT_ANNOUNCE");
}

TEST_P(BothTransports, GoldenFrameByteIdenticalAndCounted) {
  auto [a, b] = channel_pair(GetParam());
  a->send(MsgType::Query, 0, {});
  const auto f = b->recv();
  EXPECT_EQ(frame_encode(f.type, f.round_id, f.body), kGolden);
  b->send(f.type, f.round_id, f.body);  // echo
  const auto echo = a->recv();
  EXPECT_EQ(frame_encode(echo.type, echo.round_id, echo.body), kGolden);
  EXPECT_EQ(a->stats().bytes_sent, 9u);
  EXPECT_EQ(b->stats().bytes_received, 9u);
  EXPECT_EQ(a->stats().messages_received, 1u);
}

TEST_P(BothTransports, AttestationReportRoundTrip) {
  const auto platform = Platform::from_seed(3);
  const auto enclave = Enclave::create(platform, as_bytes("x"), 1);
  const auto report = enclave.attest().serialize();
  auto [a, b] = channel_pair(GetParam());
  a->send(MsgType::AttestReport, 0, report);
  const auto f = b->recv();
  EXPECT_EQ(f.body, report);
  EXPECT_TRUE(AttestationReport::parse(f.body).verify(platform->verification_key()));
  EXPECT_EQ(b->stats().bytes_received, kFrameHeaderBytes + AttestationReport::kBytes);
}

TEST_P(BothTransports, ThousandFramesInOrder) {
  auto [a, b] = channel_pair(GetParam());
  std::thread sender([&a = a] {
    for (std::uint32_t i = 0; i < 1000; ++i) {
      ByteWriter w;
      w.u32(i);
      a->send(MsgType::Subresult, i, w.bytes());
    }
  });
  std::uint64_t bytes = 0;
  for (std::uint32_t i = 0; i < 1000; ++i) {
    const auto f = b->recv();
    ASSERT_EQ(f.round_id, i);
    ByteReader r(f.body);
    ASSERT_EQ(r.u32(), i);
    bytes += f.wire_size();
  }
  sender.join();
  EXPECT_EQ(a->stats().bytes_sent, b->stats().bytes_received);
  EXPECT_EQ(b->stats().bytes_received, bytes);
  EXPECT_EQ(b->stats().messages_received, 1000u);
}

TEST_P(BothTransports, CloseUnblocksPeer) {
  auto [a, b] = channel_pair(GetParam());
  auto pending = std::async(std::launch::async, [&b = b] { return code_of([&] { b->recv(); }); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  a->close();
  const auto code = pending.get();
  EXPECT_TRUE(code == Errc::ChannelClosed || code == Errc::ConnectionError);
}

TEST_P(BothTransports, LargeBodyAcrossChannel) {
  auto [a, b] = channel_pair(GetParam());
  Bytes body(3u << 20);
  DeterministicRandom(4).fill(body);
  std::thread t([&a = a, &body] { a->send(MsgType::OtPayloads, 9, body); });
  const auto f = b->recv();
  t.join();
  EXPECT_EQ(f.body, body);
}

INSTANTIATE_TEST_SUITE_P(Transports, BothTransports,
                         ::testing::Values(TransportKind::InProc, TransportKind::Tcp),
                         [](const auto& info) { return std::string(transport_name(info.param)); });

TEST(Tcp, ConnectToUnboundPortFails) {
  std::uint16_t port = 0;
  {
    TcpListener l;
    port = l.port();
  }
  EXPECT_EQ(code_of([&] { tcp_connect("127.0.0.1", port); }), Errc::ConnectionError);
}

TEST(Tcp, AcceptTimesOut) {
  TcpListener l;
  EXPECT_EQ(code_of([&] { l.accept(std::chrono::milliseconds(50)); }), Errc::ConnectionError);
}

TEST(Transport, NamesParse) {
  EXPECT_EQ(parse_transport("inproc"), TransportKind::InProc);
  EXPECT_EQ(parse_transport("tcp"), TransportKind::Tcp);
  EXPECT_EQ(code_of([] { parse_transport("udp"); }), Errc::InvalidConfig);
}

TEST(StatsSnapshot, Arithmetic) {
  StatsSnapshot a{10, 20, 1, 2, std::chrono::nanoseconds(5)};
  StatsSnapshot b{4, 5, 1, 1, std::chrono::nanoseconds(2)};
  const auto d = a - b;
  EXPECT_EQ(d.bytes_sent, 6u);
  EXPECT_EQ(d.messages_received, 1u);
  EXPECT_EQ(d.wall_time_blocked.count(), 3);
  a += b;
  EXPECT_EQ(a.bytes_received, 25u);
}
