#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace secagg {

enum class Mechanism : std::uint8_t { Crypto = 0, Tee = 1 };
enum class QueryConf : std::uint8_t { Public = 0, Confidential = 1 };

enum class Variant {
  V1,  // CRYPTO parties, CRYPTO aggregator, public query
  V2,  // CRYPTO parties, TEE aggregator, public query
  V3,  // CRYPTO parties, CRYPTO aggregator, confidential query (OT)
  V4,  // CRYPTO parties, TEE aggregator, confidential query (OT)
  V5,  // TEE parties, CRYPTO aggregator, confidential query
  V6,  // TEE parties, TEE aggregator, confidential query
  Heterogeneous,
  Baseline,  // plaintext skeleton, no protection
};

std::string_view variant_name(Variant v) noexcept;
/// Accepts v1..v6, hetero, baseline.
Variant parse_variant(std::string_view s);
std::string_view mechanism_name(Mechanism m) noexcept;
Mechanism parse_mechanism(std::string_view s);

struct VariantConfig {
  std::vector<Mechanism> party_mechs;
  Mechanism aggregator_mech = Mechanism::Crypto;
  QueryConf query_conf = QueryConf::Public;
  std::uint32_t t = 1;
  /// Candidate-universe size; meaningful only when CRYPTO parties must hide
  /// a confidential query.
  std::uint32_t k = 1;
  bool baseline = false;

  std::uint32_t n() const { return static_cast<std::uint32_t>(party_mechs.size()); }

  bool any_party(Mechanism m) const;
  bool needs_thfhe() const { return !baseline && aggregator_mech == Mechanism::Crypto; }
  bool uses_ot() const { return query_conf == QueryConf::Confidential && any_party(Mechanism::Crypto); }
  bool uses_tee() const;

  /// Raises InvalidConfig.
  void validate() const;
  Variant variant() const;

  /// Config for V1..V6 or Baseline. Heterogeneous configs are built by hand.
  static VariantConfig homogeneous(Variant v, std::uint32_t n, std::uint32_t t, std::uint32_t k = 1);
};

inline constexpr std::uint32_t kMaxCandidates = 1024;

/// Implementation family: input privacy by TEE or FHE, query
/// confidentiality by communication pattern or OT.
std::string_view code_category(const VariantConfig& c);

/// t from a rule string: "all", "majority" (ceil(n/2)) or "fixed:N".
std::uint32_t threshold_from_rule(std::string_view rule, std::uint32_t n);

}  // namespace secagg
