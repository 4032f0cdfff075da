#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace secagg {

__extension__ using Int128 = __int128;
__extension__ using UInt128 = unsigned __int128;

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// True if `needle` occurs anywhere in `haystack`.
bool contains(ByteView haystack, ByteView needle);

/// Appends fixed-width integers. Little-endian unless the `_be` variant
/// is used; frame headers are the only big-endian fields on the wire.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(std::size_t reserve) { out_.reserve(reserve); }

  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }
  ByteWriter& u32_be(std::uint32_t v);
  ByteWriter& raw(ByteView v);
  /// u32 length prefix followed by the bytes.
  ByteWriter& blob(ByteView v);

  template <std::size_t N>
  ByteWriter& raw(const std::array<std::uint8_t, N>& v) {
    return raw(ByteView(v));
  }

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

/// Bounds-checked reader; underflow raises Errc::Truncated.
class ByteReader {
 public:
  explicit ByteReader(ByteView in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  std::uint32_t u32_be();
  ByteView raw(std::size_t n);
  ByteView blob();

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    std::array<std::uint8_t, N> out{};
    auto v = raw(N);
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return remaining() == 0; }
  /// Raises Errc::LengthMismatch if unread bytes remain.
  void expect_done(std::string_view what) const;

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace secagg
