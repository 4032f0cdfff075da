#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "secagg/random.hpp"
#include "secagg/transport.hpp"

namespace secagg {

/// Per-node Curve25519 key-exchange keypair.
struct NodeKeypair {
  std::array<std::uint8_t, 32> public_key{};
  std::array<std::uint8_t, 32> secret_key{};

  static NodeKeypair generate(RandomSource& rng = system_random());
  ~NodeKeypair();
};

inline constexpr std::size_t kSecureChannelOverhead = 16;

/// Authenticated-encryption wrapper over any channel. Frame type and
/// round_id stay in clear and are bound as associated data; bodies are
/// XChaCha20-Poly1305 under per-direction keys with implicit counter
/// nonces. Reordering, replay or tampering raises AuthenticationFailure.
///
/// The handshake exchanges public keys in one SETUP frame each way. With
/// `expected_peer` set, any other peer key raises AuthenticationFailure.
class SecureChannel final : public Channel {
 public:
  static ChannelPtr client(ChannelPtr inner, const NodeKeypair& self,
                           std::optional<std::array<std::uint8_t, 32>> expected_peer = {});
  static ChannelPtr server(ChannelPtr inner, const NodeKeypair& self,
                           std::optional<std::array<std::uint8_t, 32>> expected_peer = {});

  ~SecureChannel() override;
  void close() override { inner_->close(); }
  /// Counters of the underlying channel, i.e. ciphertext on the wire.
  StatsSnapshot stats() const override { return inner_->stats(); }

 protected:
  void do_send(const Frame& f) override;
  Frame do_recv() override;

 private:
  SecureChannel(ChannelPtr inner) : inner_(std::move(inner)) {}

  ChannelPtr inner_;
  std::array<std::uint8_t, 32> rx_key_{};
  std::array<std::uint8_t, 32> tx_key_{};
  std::uint64_t rx_counter_ = 0;
  std::uint64_t tx_counter_ = 0;
};

}  // namespace secagg
