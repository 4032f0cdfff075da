#include "secagg/variant.hpp"

#include <algorithm>
#include <charconv>

#include "secagg/error.hpp"

namespace secagg {

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::V1: return "v1";
    case Variant::V2: return "v2";
    case Variant::V3: return "v3";
    case Variant::V4: return "v4";
    case Variant::V5: return "v5";
    case Variant::V6: return "v6";
    case Variant::Heterogeneous: return "hetero";
    case Variant::Baseline: return "baseline";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  for (Variant v : {Variant::V1, Variant::V2, Variant::V3, Variant::V4, Variant::V5, Variant::V6,
                    Variant::Heterogeneous, Variant::Baseline})
    if (variant_name(v) == s) return v;
  fail(Errc::InvalidConfig, "unknown variant '" + std::string(s) + "'");
}

std::string_view mechanism_name(Mechanism m) noexcept { return m == Mechanism::Tee ? "tee" : "crypto"; }

Mechanism parse_mechanism(std::string_view s) {
  if (s == "tee" || s == "TEE") return Mechanism::Tee;
  if (s == "crypto" || s == "CRYPTO") return Mechanism::Crypto;
  fail(Errc::InvalidConfig, "unknown mechanism '" + std::string(s) + "'");
}

bool VariantConfig::any_party(Mechanism m) const {
  return std::find(party_mechs.begin(), party_mechs.end(), m) != party_mechs.end();
}

bool VariantConfig::uses_tee() const {
  return !baseline && (aggregator_mech == Mechanism::Tee || any_party(Mechanism::Tee));
}

void VariantConfig::validate() const {
  if (party_mechs.empty()) fail(Errc::InvalidConfig, "at least one party is required");
  if (t < 1 || t > n())
    fail(Errc::InvalidConfig, "threshold must satisfy 1 <= t <= n (t=" + std::to_string(t) +
                                  ", n=" + std::to_string(n()) + ")");
  if (baseline) {
    if (any_party(Mechanism::Tee) || aggregator_mech == Mechanism::Tee ||
        query_conf == QueryConf::Confidential)
      fail(Errc::InvalidConfig, "baseline runs with CRYPTO roles and a public query only");
    return;
  }
  if (query_conf == QueryConf::Public && any_party(Mechanism::Tee))
    fail(Errc::InvalidConfig,
         "TEE parties with a public query: the enclave brings no useful benefit");
  if (uses_ot() && (k < 1 || k > kMaxCandidates))
    fail(Errc::InvalidConfig, "candidate universe size k must be in [1, 1024]");
}

Variant VariantConfig::variant() const {
  if (baseline) return Variant::Baseline;
  const bool all_tee = !any_party(Mechanism::Crypto);
  const bool all_crypto = !any_party(Mechanism::Tee);
  if (!all_tee && !all_crypto) return Variant::Heterogeneous;
  const bool agg_tee = aggregator_mech == Mechanism::Tee;
  if (query_conf == QueryConf::Public) return agg_tee ? Variant::V2 : Variant::V1;
  if (all_crypto) return agg_tee ? Variant::V4 : Variant::V3;
  return agg_tee ? Variant::V6 : Variant::V5;
}

VariantConfig VariantConfig::homogeneous(Variant v, std::uint32_t n, std::uint32_t t, std::uint32_t k) {
  VariantConfig c;
  c.t = t;
  c.k = k;
  Mechanism party = Mechanism::Crypto;
  switch (v) {
    case Variant::V1: break;
    case Variant::V2: c.aggregator_mech = Mechanism::Tee; break;
    case Variant::V3: c.query_conf = QueryConf::Confidential; break;
    case Variant::V4:
      c.query_conf = QueryConf::Confidential;
      c.aggregator_mech = Mechanism::Tee;
      break;
    case Variant::V5:
      c.query_conf = QueryConf::Confidential;
      party = Mechanism::Tee;
      break;
    case Variant::V6:
      c.query_conf = QueryConf::Confidential;
      party = Mechanism::Tee;
      c.aggregator_mech = Mechanism::Tee;
      break;
    case Variant::Baseline: c.baseline = true; break;
    case Variant::Heterogeneous:
      fail(Errc::InvalidConfig, "heterogeneous configs need an explicit per-party vector");
  }
  c.party_mechs.assign(n, party);
  return c;
}

std::string_view code_category(const VariantConfig& c) {
  if (c.baseline) return "baseline";
  const bool tee_agg = c.aggregator_mech == Mechanism::Tee;
  if (c.uses_ot()) return tee_agg ? "iptee-qcot" : "ipfhe-qcot";
  return tee_agg ? "iptee-qccom" : "ipfhe-qccom";
}

std::uint32_t threshold_from_rule(std::string_view rule, std::uint32_t n) {
  if (rule == "all") return n;
  if (rule == "majority") return (n + 1) / 2;
  if (rule.starts_with("fixed:")) {
    const auto num = rule.substr(6);
    std::uint32_t t = 0;
    const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), t);
    if (ec != std::errc() || p != num.data() + num.size() || t == 0)
      fail(Errc::InvalidConfig, "bad t-rule '" + std::string(rule) + "'");
    return std::min(t, n);
  }
  fail(Errc::InvalidConfig, "unknown t-rule '" + std::string(rule) + "' (all|majority|fixed:N)");
}

}  // namespace secagg
