#include "secagg/thfhe.hpp"

#include <algorithm>
#include <set>

#include "secagg/discrete_log.hpp"
#include "secagg/error.hpp"

namespace secagg {

namespace {

// ceil(log2) of the ristretto255 group order is 253; the order exceeds 2^252.
constexpr unsigned kOrderBitsFloor = 252;

bool exceeds_order(std::uint64_t bound, std::uint32_t n) {
  // 2 * bound * n < 2^97 for any 64-bit bound and 32-bit n, far below the
  // order; kept explicit so a smaller group would be caught here.
  UInt128 range = static_cast<UInt128>(bound) * n * 2;
  unsigned bits = 0;
  while (range > 0) {
    ++bits;
    range >>= 1;
  }
  return bits > kOrderBitsFloor;
}

}  // namespace

void ThfheParams::validate() const {
  if (group_id != kGroupId) fail(Errc::InvalidConfig, "unsupported group '" + group_id + "'");
  if (threshold < 1 || threshold > n_parties)
    fail(Errc::InvalidThreshold, "threshold must satisfy 1 <= t <= n (t=" +
                                     std::to_string(threshold) + ", n=" +
                                     std::to_string(n_parties) + ")");
  if (plaintext_bound < 1) fail(Errc::BoundTooLarge, "plaintext bound must be at least 1");
  if (exceeds_order(plaintext_bound, n_parties))
    fail(Errc::BoundTooLarge, "2 * bound * n must stay below the group order");
  UInt128 decode = static_cast<UInt128>(plaintext_bound) * n_parties;
  if (decode > kMaxDecodeMagnitude)
    fail(Errc::BoundTooLarge, "n * bound exceeds the discrete-log decode window");
}

Bytes ThfheParams::serialize() const {
  ByteWriter w;
  w.blob(as_bytes(group_id)).u64(plaintext_bound).u32(n_parties).u32(threshold);
  return std::move(w).take();
}

ThfheParams ThfheParams::parse(ByteReader& in) {
  ThfheParams p;
  auto id = in.blob();
  p.group_id.assign(id.begin(), id.end());
  p.plaintext_bound = in.u64();
  p.n_parties = in.u32();
  p.threshold = in.u32();
  p.validate();
  return p;
}

Bytes JointPublicKey::serialize() const {
  ByteWriter w;
  w.raw(params.serialize()).raw(element.bytes());
  return std::move(w).take();
}

JointPublicKey JointPublicKey::parse(ByteView b) {
  ByteReader in(b);
  JointPublicKey pk;
  pk.params = ThfheParams::parse(in);
  pk.element = Point::from_bytes(in.raw(kElementBytes));
  in.expect_done("joint public key");
  if (pk.element.is_identity()) fail(Errc::MalformedGroupElement, "public key is the identity");
  return pk;
}

Bytes SecretKeyShare::serialize() const {
  ByteWriter w;
  w.u32(party_index).raw(scalar_share.bytes());
  return std::move(w).take();
}

SecretKeyShare SecretKeyShare::parse(ByteView b) {
  ByteReader in(b);
  SecretKeyShare s;
  s.party_index = in.u32();
  s.scalar_share = Scalar::from_bytes(in.raw(kScalarBytes));
  in.expect_done("secret key share");
  return s;
}

Bytes Ciphertext::serialize() const {
  ByteWriter w(kBytes);
  w.raw(c1.bytes()).raw(c2.bytes());
  return std::move(w).take();
}

Ciphertext Ciphertext::parse(ByteView b) {
  if (b.size() != kBytes) fail(Errc::LengthMismatch, "ciphertext must be 64 bytes");
  return {Point::from_bytes(b.subspan(0, kElementBytes)),
          Point::from_bytes(b.subspan(kElementBytes, kElementBytes))};
}

Bytes PartialDecryption::serialize() const {
  ByteWriter w(kBytes);
  w.u32(party_index).raw(share_element.bytes());
  return std::move(w).take();
}

PartialDecryption PartialDecryption::parse(ByteView b) {
  if (b.size() != kBytes) fail(Errc::LengthMismatch, "partial decryption must be 36 bytes");
  ByteReader in(b);
  PartialDecryption p;
  p.party_index = in.u32();
  p.share_element = Point::from_bytes(in.raw(kElementBytes));
  return p;
}

ThfheKeys thfhe_setup(std::uint32_t n, std::uint32_t t, std::uint64_t bound, RandomSource& rng) {
  ThfheParams params;
  params.plaintext_bound = bound;
  params.n_parties = n;
  params.threshold = t;
  params.validate();

  std::vector<Scalar> coeffs(t);
  do {
    coeffs[0] = Scalar::random(rng);
  } while (coeffs[0].is_zero());
  for (std::uint32_t i = 1; i < t; ++i) coeffs[i] = Scalar::random(rng);

  ThfheKeys keys;
  keys.public_key = {Point::base_mul(coeffs[0]), params};
  keys.shares.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) {
    // Horner evaluation of f(i).
    const Scalar x = Scalar::from_u64(i);
    Scalar y;
    for (std::uint32_t c = t; c-- > 0;) y = y * x + coeffs[c];
    keys.shares.push_back({i, y});
  }
  return keys;
}

Ciphertext thfhe_enc_with_randomness(std::int64_t m, const Scalar& r, const JointPublicKey& pk) {
  const auto bound = pk.params.plaintext_bound;
  const bool in_range = m >= 0 ? static_cast<std::uint64_t>(m) <= bound
                               : m != INT64_MIN && static_cast<std::uint64_t>(-m) <= bound;
  if (!in_range)
    fail(Errc::PlaintextOutOfRange,
         "plaintext " + std::to_string(m) + " exceeds bound " + std::to_string(bound));
  return {Point::base_mul(r), Point::from_int(m) + pk.element * r};
}

Ciphertext thfhe_enc(std::int64_t m, const JointPublicKey& pk, RandomSource& rng) {
  return thfhe_enc_with_randomness(m, Scalar::random(rng), pk);
}

Ciphertext thfhe_eval(const JointPublicKey&, std::span<const Ciphertext> cts) {
  if (cts.empty()) fail(Errc::EmptyInput, "aggregation over an empty ciphertext list");
  Ciphertext acc = cts.front();
  for (const auto& ct : cts.subspan(1)) {
    acc.c1 = acc.c1 + ct.c1;
    acc.c2 = acc.c2 + ct.c2;
  }
  return acc;
}

PartialDecryption thfhe_partial_dec(const Ciphertext& ct, const SecretKeyShare& share) {
  return {share.party_index, ct.c1 * share.scalar_share};
}

Scalar lagrange_at_zero(std::uint32_t index, std::span<const std::uint32_t> indices) {
  Scalar num = Scalar::from_u64(1);
  Scalar den = Scalar::from_u64(1);
  const Scalar xi = Scalar::from_u64(index);
  for (auto j : indices) {
    if (j == index) continue;
    const Scalar xj = Scalar::from_u64(j);
    num = num * xj;
    den = den * (xj - xi);
  }
  return num * den.inverse();
}

std::int64_t thfhe_combine(const Ciphertext& ct, std::span<const PartialDecryption> partials,
                           const ThfheParams& params) {
  std::vector<std::uint32_t> indices;
  indices.reserve(partials.size());
  std::set<std::uint32_t> seen;
  for (const auto& p : partials) {
    if (p.party_index < 1 || p.party_index > params.n_parties)
      fail(Errc::InvalidPartyIndex, "party index " + std::to_string(p.party_index) +
                                        " outside [1, " + std::to_string(params.n_parties) + "]");
    if (!seen.insert(p.party_index).second)
      fail(Errc::DuplicatePartyIndex, "duplicate partial decryption from party " +
                                          std::to_string(p.party_index));
    indices.push_back(p.party_index);
  }
  if (indices.size() < params.threshold)
    fail(Errc::ThresholdNotMet, "need " + std::to_string(params.threshold) +
                                    " partial decryptions, got " +
                                    std::to_string(indices.size()));

  Point mask;
  for (const auto& p : partials) mask = mask + p.share_element * lagrange_at_zero(p.party_index, indices);

  auto solver = DiscreteLogSolver::for_range(params.decode_bound());
  auto m = solver->solve(ct.c2 - mask);
  if (!m)
    fail(Errc::DiscreteLogOutOfRange,
         "decrypted exponent outside [-" + std::to_string(params.decode_bound()) + ", " +
             std::to_string(params.decode_bound()) + "]");
  return *m;
}

}  // namespace secagg
