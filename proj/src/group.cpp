#include "secagg/group.hpp"

#include <sodium.h>

#include <algorithm>

#include "secagg/error.hpp"

namespace secagg {

namespace {

Scalar one() { return Scalar::from_u64(1); }

}  // namespace

Scalar Scalar::from_u64(std::uint64_t v) {
  Scalar s;
  for (int i = 0; i < 8; ++i) s.b_[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return s;
}

Scalar Scalar::from_int(std::int64_t v) {
  if (v >= 0) return from_u64(static_cast<std::uint64_t>(v));
  // Magnitude without overflowing on INT64_MIN.
  auto mag = static_cast<std::uint64_t>(-(v + 1)) + 1;
  return -from_u64(mag);
}

Scalar Scalar::random(RandomSource& rng) {
  std::uint8_t wide[crypto_core_ristretto255_NONREDUCEDSCALARBYTES];
  rng.fill(wide);
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.b_.data(), wide);
  sodium_memzero(wide, sizeof wide);
  return s;
}

Scalar Scalar::from_bytes(ByteView b) {
  if (b.size() != kScalarBytes) fail(Errc::MalformedGroupElement, "scalar must be 32 bytes");
  std::uint8_t wide[crypto_core_ristretto255_NONREDUCEDSCALARBYTES] = {};
  std::copy(b.begin(), b.end(), wide);
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.b_.data(), wide);
  if (!std::equal(b.begin(), b.end(), s.b_.begin()))
    fail(Errc::MalformedGroupElement, "non-canonical scalar encoding");
  return s;
}

Scalar Scalar::operator+(const Scalar& o) const {
  Scalar r;
  crypto_core_ristretto255_scalar_add(r.b_.data(), b_.data(), o.b_.data());
  return r;
}

Scalar Scalar::operator-(const Scalar& o) const {
  Scalar r;
  crypto_core_ristretto255_scalar_sub(r.b_.data(), b_.data(), o.b_.data());
  return r;
}

Scalar Scalar::operator*(const Scalar& o) const {
  Scalar r;
  crypto_core_ristretto255_scalar_mul(r.b_.data(), b_.data(), o.b_.data());
  return r;
}

Scalar Scalar::operator-() const {
  Scalar r;
  crypto_core_ristretto255_scalar_negate(r.b_.data(), b_.data());
  return r;
}

Scalar Scalar::inverse() const {
  Scalar r;
  crypto_core_ristretto255_scalar_invert(r.b_.data(), b_.data());
  return r;
}

bool Scalar::is_zero() const { return sodium_is_zero(b_.data(), b_.size()) == 1; }

const Point& Point::generator() {
  static const Point g = base_mul(one());
  return g;
}

Point Point::base_mul(const Scalar& s) {
  Point p;
  // A zero result comes back as -1 with the identity (all-zero) encoding.
  (void)crypto_scalarmult_ristretto255_base(p.b_.data(), s.bytes().data());
  return p;
}

Point Point::random(RandomSource& rng) {
  std::uint8_t h[crypto_core_ristretto255_HASHBYTES];
  rng.fill(h);
  Point p;
  crypto_core_ristretto255_from_hash(p.b_.data(), h);
  return p;
}

Point Point::from_bytes(ByteView b) {
  if (b.size() != kElementBytes) fail(Errc::MalformedGroupElement, "group element must be 32 bytes");
  if (crypto_core_ristretto255_is_valid_point(b.data()) != 1 && sodium_is_zero(b.data(), b.size()) != 1)
    fail(Errc::MalformedGroupElement, "invalid ristretto255 encoding");
  Point p;
  std::copy(b.begin(), b.end(), p.b_.begin());
  return p;
}

Point Point::operator+(const Point& o) const {
  Point r;
  crypto_core_ristretto255_add(r.b_.data(), b_.data(), o.b_.data());
  return r;
}

Point Point::operator-(const Point& o) const {
  Point r;
  crypto_core_ristretto255_sub(r.b_.data(), b_.data(), o.b_.data());
  return r;
}

Point Point::operator*(const Scalar& s) const {
  Point r;
  // Returns -1 when the product is the identity; r is then all zeros, which
  // is this type's identity encoding.
  if (crypto_scalarmult_ristretto255(r.b_.data(), s.bytes().data(), b_.data()) != 0) r = Point();
  return r;
}

bool Point::is_identity() const { return sodium_is_zero(b_.data(), b_.size()) == 1; }

std::uint64_t Point::prefix64() const {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b_[i];
  return v;
}

}  // namespace secagg
