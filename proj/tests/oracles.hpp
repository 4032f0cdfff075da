#pragma once

// Reference computations written independently of the library code paths
// they check.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "secagg/datastore.hpp"
#include "secagg/group.hpp"
#include "secagg/thfhe.hpp"

namespace secagg::oracle {

/// Encryption via c2 = g^(m + s*r), a different route than g^m * pk^r.
inline Ciphertext encrypt_with_secret(std::int64_t m, const Scalar& r, const Scalar& s) {
  return {Point::base_mul(r), Point::base_mul(Scalar::from_int(m) + s * r)};
}

/// Linear scan for m in [-max_abs, max_abs] with g^m == target.
inline std::optional<std::int64_t> linear_dlog(const Point& target, std::int64_t max_abs) {
  Point acc;  // g^0
  const Point g = Point::generator();
  if (acc == target) return 0;
  Point pos, neg;
  for (std::int64_t m = 1; m <= max_abs; ++m) {
    pos = pos + g;
    neg = neg - g;
    if (pos == target) return m;
    if (neg == target) return -m;
  }
  return std::nullopt;
}

/// Full-key decryption: c2 - s*c1, then linear search.
inline std::optional<std::int64_t> decrypt_with_secret(const Ciphertext& ct, const Scalar& s,
                                                       std::int64_t max_abs) {
  return linear_dlog(ct.c2 - ct.c1 * s, max_abs);
}

/// Secret reconstruction by Lagrange interpolation at 0, computed from the
/// textbook product formula over the given (index, share) pairs.
inline Scalar interpolate_secret(std::span<const SecretKeyShare> shares) {
  Scalar acc = Scalar::from_u64(0);
  for (const auto& si : shares) {
    Scalar num = Scalar::from_u64(1);
    Scalar den = Scalar::from_u64(1);
    for (const auto& sj : shares) {
      if (sj.party_index == si.party_index) continue;
      num = num * Scalar::from_u64(sj.party_index);
      den = den * (Scalar::from_u64(sj.party_index) - Scalar::from_u64(si.party_index));
    }
    acc = acc + si.scalar_share * num * den.inverse();
  }
  return acc;
}

/// Row-by-row fold for SUM/COUNT with an optional predicate.
inline std::int64_t fold_query(const Query& q, std::span<const std::int64_t> values) {
  std::int64_t acc = 0;
  for (std::int64_t v : values) {
    bool match = true;
    if (q.predicate) {
      const std::int64_t c = q.predicate->constant;
      switch (q.predicate->op) {
        case CompareOp::Eq: match = v == c; break;
        case CompareOp::Ne: match = v != c; break;
        case CompareOp::Lt: match = v < c; break;
        case CompareOp::Le: match = v <= c; break;
        case CompareOp::Gt: match = v > c; break;
        case CompareOp::Ge: match = v >= c; break;
      }
    }
    if (match) acc += q.kind == QueryKind::Count ? 1 : v;
  }
  return acc;
}

/// All size-r subsets of {0..n-1}.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t r) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  const auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == r) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace secagg::oracle
