#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "secagg/bytes.hpp"
#include "secagg/group.hpp"
#include "secagg/random.hpp"

namespace secagg {

/// Default magnitude bound on a single encrypted value.
inline constexpr std::uint64_t kDefaultPlaintextBound = std::uint64_t{1} << 20;

struct ThfheParams {
  std::string group_id{kGroupId};
  std::uint64_t plaintext_bound = kDefaultPlaintextBound;
  std::uint32_t n_parties = 1;
  std::uint32_t threshold = 1;

  /// Largest |aggregate| the combiner can decode: n_parties * plaintext_bound.
  std::uint64_t decode_bound() const { return plaintext_bound * n_parties; }

  /// Raises InvalidThreshold or BoundTooLarge.
  void validate() const;

  Bytes serialize() const;
  static ThfheParams parse(ByteReader& in);

  bool operator==(const ThfheParams&) const = default;
};

struct JointPublicKey {
  Point element;
  ThfheParams params;

  Bytes serialize() const;
  static JointPublicKey parse(ByteView b);
};

/// Shamir share f(party_index) of the joint secret; indices start at 1.
struct SecretKeyShare {
  std::uint32_t party_index = 0;
  Scalar scalar_share;

  Bytes serialize() const;
  static SecretKeyShare parse(ByteView b);
};

/// Exponential ElGamal pair (g^r, g^m * pk^r).
struct Ciphertext {
  static constexpr std::size_t kBytes = 2 * kElementBytes;

  Point c1;
  Point c2;

  Bytes serialize() const;
  static Ciphertext parse(ByteView b);
  bool operator==(const Ciphertext&) const = default;
};

struct PartialDecryption {
  static constexpr std::size_t kBytes = 4 + kElementBytes;

  std::uint32_t party_index = 0;
  Point share_element;

  Bytes serialize() const;
  static PartialDecryption parse(ByteView b);
  bool operator==(const PartialDecryption&) const = default;
};

struct ThfheKeys {
  JointPublicKey public_key;
  std::vector<SecretKeyShare> shares;
};

/// Trusted-dealer key generation: a random degree-(t-1) polynomial f,
/// pk = g^f(0), share i = f(i).
ThfheKeys thfhe_setup(std::uint32_t n, std::uint32_t t,
                      std::uint64_t bound = kDefaultPlaintextBound,
                      RandomSource& rng = system_random());

Ciphertext thfhe_enc(std::int64_t m, const JointPublicKey& pk,
                     RandomSource& rng = system_random());

/// Encryption with caller-chosen randomness, for known-answer vectors.
Ciphertext thfhe_enc_with_randomness(std::int64_t m, const Scalar& r,
                                     const JointPublicKey& pk);

/// Homomorphic sum: component-wise group operation.
Ciphertext thfhe_eval(const JointPublicKey& pk, std::span<const Ciphertext> cts);

PartialDecryption thfhe_partial_dec(const Ciphertext& ct, const SecretKeyShare& share);

/// Lagrange-combines the partials at x = 0, strips the mask and decodes the
/// exponent over [-decode_bound, decode_bound]. Requires at least
/// `threshold` distinct indices in [1, n_parties].
std::int64_t thfhe_combine(const Ciphertext& ct, std::span<const PartialDecryption> partials,
                           const ThfheParams& params);

/// lambda_i(0) = prod_{j != i} j / (j - i) over the given index set.
Scalar lagrange_at_zero(std::uint32_t index, std::span<const std::uint32_t> indices);

}  // namespace secagg
