#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>

#include "secagg/bytes.hpp"
#include "secagg/random.hpp"

namespace secagg {

/// Prime-order group used by the threshold scheme and the OT: ristretto255
/// (order 2^252 + 27742317777372353535851937790883648493).
inline constexpr std::string_view kGroupId = "ristretto255";
inline constexpr std::size_t kElementBytes = 32;
inline constexpr std::size_t kScalarBytes = 32;

/// Integer modulo the group order, little-endian fixed-width encoding.
class Scalar {
 public:
  Scalar() = default;  // zero

  static Scalar from_int(std::int64_t v);
  static Scalar from_u64(std::uint64_t v);
  static Scalar random(RandomSource& rng);
  /// Canonical 32-byte encoding; non-canonical input raises MalformedGroupElement.
  static Scalar from_bytes(ByteView b);

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator-() const;
  /// Multiplicative inverse; undefined for zero.
  Scalar inverse() const;

  bool is_zero() const;
  bool operator==(const Scalar& o) const = default;

  const std::array<std::uint8_t, kScalarBytes>& bytes() const { return b_; }

 private:
  std::array<std::uint8_t, kScalarBytes> b_{};
};

/// Group element held in its canonical compressed encoding.
class Point {
 public:
  Point() = default;  // identity

  static Point identity() { return {}; }
  static const Point& generator();
  static Point base_mul(const Scalar& s);
  /// g^v for a signed small integer.
  static Point from_int(std::int64_t v) { return base_mul(Scalar::from_int(v)); }
  static Point random(RandomSource& rng);
  /// Validates the encoding; raises MalformedGroupElement otherwise.
  static Point from_bytes(ByteView b);

  Point operator+(const Point& o) const;
  Point operator-(const Point& o) const;
  Point operator*(const Scalar& s) const;

  bool is_identity() const;
  bool operator==(const Point& o) const = default;

  const std::array<std::uint8_t, kElementBytes>& bytes() const { return b_; }
  /// First eight encoding bytes as an integer; used as a hash key.
  std::uint64_t prefix64() const;

 private:
  std::array<std::uint8_t, kElementBytes> b_{};
};

}  // namespace secagg

template <>
struct std::hash<secagg::Point> {
  std::size_t operator()(const secagg::Point& p) const noexcept { return p.prefix64(); }
};
