#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "secagg/bytes.hpp"
#include "secagg/datastore.hpp"
#include "secagg/random.hpp"

namespace secagg {

using Measurement = std::array<std::uint8_t, 32>;
using EnclavePublicKey = std::array<std::uint8_t, 32>;
using VerificationKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

/// Ciphertext expansion of pk_enc: ephemeral X25519 key plus Poly1305 tag.
inline constexpr std::size_t kPkEncOverhead = 48;

/// SHA-256 of the enclave's declared code identity.
Measurement measure(ByteView code_identity);

/// Simulated platform root of trust. Signs attestation reports for the
/// enclaves it hosts; its verification key is the PKI anchor distributed
/// at setup.
class Platform {
 public:
  static std::shared_ptr<const Platform> create(RandomSource& rng = system_random());
  /// Same seed, same root key; lets separate processes share one platform.
  static std::shared_ptr<const Platform> from_seed(std::uint64_t seed);

  const VerificationKey& verification_key() const { return verify_key_; }

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;
  ~Platform();

 private:
  friend class Enclave;
  explicit Platform(const std::array<std::uint8_t, 32>& seed);
  Signature sign(ByteView message) const;

  VerificationKey verify_key_{};
  std::array<std::uint8_t, 64> signing_key_{};
};

/// measurement(32) || public key(32) || signature(64) over the first 64 bytes.
struct AttestationReport {
  static constexpr std::size_t kBytes = 128;

  Measurement measurement{};
  EnclavePublicKey enclave_public_key{};
  Signature signature{};

  Bytes serialize() const;
  static AttestationReport parse(ByteView b);

  /// Signature check against the platform root only.
  bool verify(const VerificationKey& root) const;
};

/// Signature check plus measurement match.
bool verify_attestation(const AttestationReport& report, const VerificationKey& root,
                        const Measurement& expected);

/// Hybrid public-key encryption to an enclave (sealed box); usable outside
/// any enclave.
Bytes pk_enc(ByteView plaintext, const EnclavePublicKey& pk);

enum class SubmitStatus { Accepted, Duplicate };

/// In-process enclave. The X25519 private key and buffered subresults
/// never leave this object: no accessor, serializer or error message
/// exposes them. Plaintext produced by decryption is only visible to
/// callbacks that run "inside".
///
/// submit_subresult / aggregate / reset_round are serialised by an internal
/// mutex; the remaining members are const and freely concurrent.
class Enclave {
 public:
  static Enclave create(std::shared_ptr<const Platform> platform, ByteView code_identity,
                        std::uint32_t threshold, RandomSource& rng = system_random());

  Enclave(Enclave&&) noexcept;
  Enclave& operator=(Enclave&&) noexcept;
  ~Enclave();

  const Measurement& measurement() const;
  const EnclavePublicKey& public_key() const;
  std::uint32_t threshold() const;

  AttestationReport attest() const;

  /// Decrypts `ciphertext` and runs `inside` on the plaintext, which is wiped
  /// afterwards. Raises DecryptionFailure.
  template <class F>
  decltype(auto) with_plaintext(ByteView ciphertext, F&& inside) const {
    SecretBuffer plain = sk_dec(ciphertext);
    struct Wipe {
      SecretBuffer& b;
      ~Wipe() { b.wipe(); }
    } wipe{plain};
    return std::forward<F>(inside)(ByteView(plain.data));
  }

  /// f_q evaluated on the trusted side; same semantics as eval_query.
  Subresult eval(const Query& q, const Dataset& data) const;

  /// Party-enclave path: decrypt the query, evaluate it, and encrypt the
  /// subresult with `seal_inside`, all on the trusted side. Only the sealed
  /// output is returned.
  Bytes evaluate_confidential(ByteView encrypted_query, const Dataset& data,
                              const std::function<Bytes(std::int64_t)>& seal_inside) const;

  /// Aggregator-enclave path: decrypt a pk_enc'd 8-byte subresult and buffer
  /// it. A second submission from the same party is reported as Duplicate
  /// and changes nothing. Raises DecryptionFailure.
  SubmitStatus submit_subresult(std::uint32_t party_id, ByteView ciphertext);

  /// Threshold gate: with fewer than t buffered entries raises
  /// ThresholdNotReached ("Threshold not reached") and releases nothing;
  /// otherwise returns the sum and clears the buffer.
  std::int64_t aggregate();

  std::size_t buffered_count() const;
  /// Drops buffered entries at the start of a round.
  void reset_round();

 private:
  struct SecretBuffer {
    Bytes data;
    void wipe();
  };
  struct State;

  explicit Enclave(std::unique_ptr<State> state);
  SecretBuffer sk_dec(ByteView ciphertext) const;

  std::unique_ptr<State> state_;
};

/// Fixed 8-byte little-endian encoding of a subresult plaintext.
Bytes encode_subresult(std::int64_t v);
std::int64_t decode_subresult(ByteView b);

}  // namespace secagg
