#include "secagg/secure_channel.hpp"

#include <sodium.h>

#include "secagg/error.hpp"

namespace secagg {

namespace {

constexpr std::uint8_t kHandshakeVersion = 1;

std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_NPUBBYTES> nonce_for(std::uint64_t c) {
  std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_NPUBBYTES> n{};
  for (int i = 0; i < 8; ++i) n[i] = static_cast<std::uint8_t>(c >> (8 * i));
  return n;
}

std::array<std::uint8_t, 5> header_ad(const Frame& f) {
  return {static_cast<std::uint8_t>(f.type), static_cast<std::uint8_t>(f.round_id >> 24),
          static_cast<std::uint8_t>(f.round_id >> 16), static_cast<std::uint8_t>(f.round_id >> 8),
          static_cast<std::uint8_t>(f.round_id)};
}

std::array<std::uint8_t, 32> exchange(Channel& ch, const NodeKeypair& self,
                                      const std::optional<std::array<std::uint8_t, 32>>& expected,
                                      bool send_first) {
  ByteWriter w(33);
  w.u8(kHandshakeVersion).raw(self.public_key);
  const Bytes hello = std::move(w).take();
  if (send_first) ch.send(MsgType::Setup, 0, hello);
  const Frame peer = ch.recv();
  if (!send_first) ch.send(MsgType::Setup, 0, hello);
  if (peer.type != MsgType::Setup)
    fail(Errc::ProtocolViolation, "expected SETUP handshake frame");
  ByteReader in(peer.body);
  if (in.u8() != kHandshakeVersion) fail(Errc::ProtocolViolation, "handshake version mismatch");
  auto pk = in.fixed<32>();
  in.expect_done("handshake");
  if (expected && sodium_memcmp(expected->data(), pk.data(), pk.size()) != 0)
    fail(Errc::AuthenticationFailure, "peer key does not match the expected key");
  return pk;
}

}  // namespace

NodeKeypair NodeKeypair::generate(RandomSource& rng) {
  crypto_init();
  std::array<std::uint8_t, crypto_kx_SEEDBYTES> seed{};
  rng.fill(seed);
  NodeKeypair kp;
  crypto_kx_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
  sodium_memzero(seed.data(), seed.size());
  return kp;
}

NodeKeypair::~NodeKeypair() { sodium_memzero(secret_key.data(), secret_key.size()); }

ChannelPtr SecureChannel::client(ChannelPtr inner, const NodeKeypair& self,
                                 std::optional<std::array<std::uint8_t, 32>> expected_peer) {
  const auto peer = exchange(*inner, self, expected_peer, true);
  std::unique_ptr<SecureChannel> sc(new SecureChannel(std::move(inner)));
  if (crypto_kx_client_session_keys(sc->rx_key_.data(), sc->tx_key_.data(), self.public_key.data(),
                                    self.secret_key.data(), peer.data()) != 0)
    fail(Errc::AuthenticationFailure, "invalid peer key");
  return sc;
}

ChannelPtr SecureChannel::server(ChannelPtr inner, const NodeKeypair& self,
                                 std::optional<std::array<std::uint8_t, 32>> expected_peer) {
  const auto peer = exchange(*inner, self, expected_peer, false);
  std::unique_ptr<SecureChannel> sc(new SecureChannel(std::move(inner)));
  if (crypto_kx_server_session_keys(sc->rx_key_.data(), sc->tx_key_.data(), self.public_key.data(),
                                    self.secret_key.data(), peer.data()) != 0)
    fail(Errc::AuthenticationFailure, "invalid peer key");
  return sc;
}

SecureChannel::~SecureChannel() {
  sodium_memzero(rx_key_.data(), rx_key_.size());
  sodium_memzero(tx_key_.data(), tx_key_.size());
}

void SecureChannel::do_send(const Frame& f) {
  if (f.body.size() + kSecureChannelOverhead > kMaxBodyBytes)
    fail(Errc::FrameTooLarge, "sealed body exceeds frame limit");
  const auto ad = header_ad(f);
  const auto nonce = nonce_for(tx_counter_++);
  Bytes ct(f.body.size() + kSecureChannelOverhead);
  unsigned long long ct_len = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(ct.data(), &ct_len, f.body.data(), f.body.size(),
                                             ad.data(), ad.size(), nullptr, nonce.data(),
                                             tx_key_.data());
  inner_->send(f.type, f.round_id, ct);
}

Frame SecureChannel::do_recv() {
  Frame f = inner_->recv();
  if (f.body.size() < kSecureChannelOverhead)
    fail(Errc::AuthenticationFailure, "sealed body shorter than its tag");
  const auto ad = header_ad(f);
  const auto nonce = nonce_for(rx_counter_);
  Bytes pt(f.body.size() - kSecureChannelOverhead);
  unsigned long long pt_len = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(pt.data(), &pt_len, nullptr, f.body.data(),
                                                 f.body.size(), ad.data(), ad.size(), nonce.data(),
                                                 rx_key_.data()) != 0)
    fail(Errc::AuthenticationFailure, "frame failed authentication");
  ++rx_counter_;
  f.body = std::move(pt);
  return f;
}

}  // namespace secagg
