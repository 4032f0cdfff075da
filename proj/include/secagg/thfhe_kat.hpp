#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "secagg/thfhe.hpp"

namespace secagg {

/// Fixed-randomness encryption vector: Enc(m; r) under pk = g^secret.
struct KatVector {
  std::int64_t m = 0;
  std::uint64_t r = 0;
  Point c1;
  Point c2;
};

/// Line-oriented text format:
///
///   # comment
///   secret <decimal>
///   <m> <r> -> <c1_hex> <c2_hex>
struct KatFile {
  std::uint64_t secret = 0;
  std::vector<KatVector> vectors;
};

KatFile read_kat(std::istream& in);
void write_kat(std::ostream& out, const KatFile& file);

}  // namespace secagg
