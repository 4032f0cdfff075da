#pragma once

// Property suites shared by the unit tests and the acceptance binary. Each
// returns a Check: ok plus a short description of the first failure.

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "secagg/datastore.hpp"
#include "secagg/error.hpp"
#include "secagg/ot.hpp"
#include "secagg/random.hpp"
#include "secagg/tee.hpp"
#include "secagg/thfhe.hpp"

namespace secagg::props {

struct Check {
  bool ok = true;
  std::string detail;
  std::size_t cases = 0;

  void fail(std::string why) {
    if (ok) detail = std::move(why);
    ok = false;
  }
};

inline std::vector<PartialDecryption> partials_for(const Ciphertext& ct, const ThfheKeys& keys,
                                                   const std::vector<std::size_t>& pick) {
  std::vector<PartialDecryption> out;
  for (auto i : pick) out.push_back(thfhe_partial_dec(ct, keys.shares[i]));
  return out;
}

/// combine(eval(enc(m_i)), random t-subset) == sum m_i with j <= 64 and
/// bound 2^20.
inline Check thfhe_homomorphism(std::uint64_t seed, int trials = 200) {
  Check c;
  DeterministicRandom rng(seed);
  const std::uint64_t bound = std::uint64_t{1} << 20;
  for (int trial = 0; trial < trials; ++trial) {
    const auto n = static_cast<std::uint32_t>(1 + rng.uniform(6));
    const auto t = static_cast<std::uint32_t>(1 + rng.uniform(n));
    const auto j = 1 + rng.uniform(64);
    // The decode window n * key_bound must cover 64 * bound; plaintexts stay
    // within 2^20.
    const auto keys = thfhe_setup(n, t, (64 * bound + n - 1) / n, rng);
    std::vector<Ciphertext> cts;
    std::int64_t sum = 0;
    for (std::uint64_t i = 0; i < j; ++i) {
      const auto m = static_cast<std::int64_t>(rng.uniform(2 * bound + 1)) -
                     static_cast<std::int64_t>(bound);
      sum += m;
      cts.push_back(thfhe_enc(m, keys.public_key, rng));
    }
    const auto agg = thfhe_eval(keys.public_key, cts);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform(i)]);
    idx.resize(t);
    const auto got = thfhe_combine(agg, partials_for(agg, keys, idx), keys.public_key.params);
    ++c.cases;
    if (got != sum)
      c.fail("trial " + std::to_string(trial) + ": got " + std::to_string(got) + ", want " +
             std::to_string(sum));
  }
  return c;
}

/// Every t-subset decrypts and every (t-1)-subset raises ThresholdNotMet,
/// for all 1 <= t <= n <= 6. Also checks that the t-subset interpolates the
/// secret behind pk.
inline Check thfhe_threshold_exhaustive(std::uint64_t seed) {
  Check c;
  DeterministicRandom rng(seed);
  for (std::uint32_t n = 1; n <= 6; ++n) {
    for (std::uint32_t t = 1; t <= n; ++t) {
      const auto keys = thfhe_setup(n, t, 1000, rng);
      const auto ct = thfhe_eval(keys.public_key, std::vector{thfhe_enc(10, keys.public_key, rng),
                                                              thfhe_enc(-3, keys.public_key, rng)});
      const std::string where = "n=" + std::to_string(n) + " t=" + std::to_string(t);
      for (const auto& pick : oracle::subsets(n, t)) {
        ++c.cases;
        std::vector<SecretKeyShare> shares;
        for (auto i : pick) shares.push_back(keys.shares[i]);
        if (Point::base_mul(oracle::interpolate_secret(shares)) != keys.public_key.element)
          c.fail(where + ": t-subset does not interpolate the secret");
        if (thfhe_combine(ct, partials_for(ct, keys, pick), keys.public_key.params) != 7)
          c.fail(where + ": t-subset combine != 7");
      }
      if (t == 1) continue;
      for (const auto& pick : oracle::subsets(n, t - 1)) {
        ++c.cases;
        std::vector<SecretKeyShare> shares;
        for (auto i : pick) shares.push_back(keys.shares[i]);
        if (Point::base_mul(oracle::interpolate_secret(shares)) == keys.public_key.element)
          c.fail(where + ": (t-1)-subset recovers the secret");
        try {
          thfhe_combine(ct, partials_for(ct, keys, pick), keys.public_key.params);
          c.fail(where + ": (t-1)-subset combined");
        } catch (const Error& e) {
          if (e.code() != Errc::ThresholdNotMet) c.fail(where + ": wrong error " + e.what());
        }
      }
    }
  }
  return c;
}

/// Replacing one partial of a t-subset with a random element never yields
/// the true sum silently.
inline Check thfhe_replaced_partial(std::uint64_t seed, int trials = 200) {
  Check c;
  DeterministicRandom rng(seed);
  int silent = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const auto keys = thfhe_setup(5, 3, 1000, rng);
    const auto ct = thfhe_eval(keys.public_key, std::vector{thfhe_enc(10, keys.public_key, rng),
                                                            thfhe_enc(-3, keys.public_key, rng)});
    auto partials = partials_for(ct, keys, {0, 2, 4});
    partials[rng.uniform(3)].share_element = Point::random(rng);
    ++c.cases;
    try {
      if (thfhe_combine(ct, partials, keys.public_key.params) == 7) ++silent;
    } catch (const Error& e) {
      if (e.code() != Errc::DiscreteLogOutOfRange) c.fail(std::string("unexpected error ") + e.what());
    }
  }
  if (silent > 1) c.fail(std::to_string(silent) + " corrupted combines returned the true sum");
  return c;
}

/// 1000 encryption pairs of the same plaintext, no equal ciphertexts.
inline Check thfhe_randomization(std::uint64_t seed, int pairs = 1000) {
  Check c;
  DeterministicRandom rng(seed);
  const auto keys = thfhe_setup(3, 2, 1000, rng);
  std::set<Bytes> seen;
  for (int i = 0; i < pairs; ++i) {
    const auto m = static_cast<std::int64_t>(i % 7);
    const auto a = thfhe_enc(m, keys.public_key, rng);
    const auto b = thfhe_enc(m, keys.public_key, rng);
    ++c.cases;
    if (a == b) c.fail("collision at pair " + std::to_string(i));
    if (a.serialize().size() != Ciphertext::kBytes) c.fail("ciphertext size varies");
    seen.insert(a.serialize());
    seen.insert(b.serialize());
  }
  if (seen.size() != static_cast<std::size_t>(2 * pairs)) c.fail("duplicate ciphertexts across pairs");
  return c;
}

inline std::vector<Bytes> distinct_payloads(std::uint32_t k, RandomSource& rng) {
  std::vector<Bytes> out;
  for (std::uint32_t j = 0; j < k; ++j) {
    Bytes p(1 + rng.uniform(40));
    rng.fill(p);
    p[0] = static_cast<std::uint8_t>(j);
    out.push_back(std::move(p));
  }
  return out;
}

/// Exhaustive over k <= kmax and every choice: the chosen payload comes
/// back byte-exact and every other index fails authentication.
inline Check ot_exhaustive(std::uint64_t seed, std::uint32_t kmax = 16) {
  Check c;
  DeterministicRandom rng(seed);
  for (std::uint32_t k = 1; k <= kmax; ++k) {
    for (std::uint32_t choice = 0; choice < k; ++choice) {
      const auto payloads = distinct_payloads(k, rng);
      auto [sender, ann] = OtSender::init(payloads, rng);
      auto [receiver, resp] = OtReceiver::round1(OtAnnouncement::parse(ann.serialize()), choice, rng);
      const auto wire = std::move(sender).respond(OtResponse::parse(resp.serialize())).serialize();
      const auto msg = OtPayloads::parse(wire);
      const std::string where = "k=" + std::to_string(k) + " choice=" + std::to_string(choice);
      ++c.cases;
      if (receiver.round2(msg) != payloads[choice]) c.fail(where + ": wrong payload");
      for (std::uint32_t j = 0; j < k; ++j) {
        if (j == choice) continue;
        ++c.cases;
        if (receiver.try_open(msg, j)) c.fail(where + ": index " + std::to_string(j) + " opened");
      }
      std::set<std::size_t> sizes;
      for (const auto& e : msg.ciphertexts) sizes.insert(e.size());
      if (sizes.size() != 1) c.fail(where + ": ciphertext sizes leak payload lengths");
    }
  }
  return c;
}

/// Two-sample chi-square homogeneity test on the byte histogram of the
/// response element for choice 0 versus choice k-1. Returns the p-value in
/// `detail` on success.
inline Check ot_uniformity(std::uint64_t seed, int samples = 1000, std::uint32_t k = 16,
                           double* p_out = nullptr) {
  Check c;
  DeterministicRandom rng(seed);
  const auto payloads = distinct_payloads(k, rng);
  std::array<std::array<double, 256>, 2> hist{};
  const std::array<std::uint32_t, 2> choices{0, k - 1};
  for (int side = 0; side < 2; ++side) {
    for (int s = 0; s < samples; ++s) {
      const auto [sender, ann] = OtSender::init(payloads, rng);
      const auto [receiver, resp] = OtReceiver::round1(ann, choices[side], rng);
      for (auto byte : resp.b_point.bytes()) hist[side][byte] += 1;
      ++c.cases;
    }
  }
  double stat = 0;
  int bins = 0;
  const double total0 = samples * 32.0, total1 = samples * 32.0, total = total0 + total1;
  for (int b = 0; b < 256; ++b) {
    const double col = hist[0][b] + hist[1][b];
    if (col == 0) continue;
    ++bins;
    for (int side = 0; side < 2; ++side) {
      const double expected = col * (side == 0 ? total0 : total1) / total;
      const double d = hist[side][b] - expected;
      stat += d * d / expected;
    }
  }
  const boost::math::chi_squared dist(bins - 1);
  const double p = boost::math::cdf(boost::math::complement(dist, stat));
  if (p_out) *p_out = p;
  if (!(p > 0.01)) c.fail("chi-square p = " + std::to_string(p));
  c.detail = c.ok ? "p=" + std::to_string(p) : c.detail;
  return c;
}

/// For every 0 <= count <= 10 and 1 <= t <= 10 the gate releases a value iff
/// count >= t, and the value is the plaintext sum.
inline Check threshold_gate_grid(std::uint64_t seed) {
  Check c;
  DeterministicRandom rng(seed);
  const auto platform = Platform::create(rng);
  for (std::uint32_t t = 1; t <= 10; ++t) {
    auto enclave = Enclave::create(platform, as_bytes("secagg/aggregator-enclave/1"), t, rng);
    for (std::uint32_t count = 0; count <= 10; ++count) {
      enclave.reset_round();
      std::int64_t sum = 0;
      for (std::uint32_t p = 1; p <= count; ++p) {
        const auto v = static_cast<std::int64_t>(rng.uniform(2001)) - 1000;
        sum += v;
        enclave.submit_subresult(p, pk_enc(encode_subresult(v), enclave.public_key()));
      }
      const std::string where = "count=" + std::to_string(count) + " t=" + std::to_string(t);
      ++c.cases;
      try {
        const auto got = enclave.aggregate();
        if (count < t) c.fail(where + ": released below threshold");
        else if (got != sum) c.fail(where + ": wrong sum");
      } catch (const Error& e) {
        if (count >= t) c.fail(where + ": withheld at threshold");
        else if (e.code() != Errc::ThresholdNotReached ||
                 std::string(e.what()).find("Threshold not reached") == std::string::npos)
          c.fail(where + ": wrong error " + e.what());
        else if (enclave.buffered_count() != count)
          c.fail(where + ": failed gate changed the buffer");
      }
    }
  }
  return c;
}

/// Random SUM/COUNT queries with random predicates over random datasets:
/// the enclave's evaluation equals the plaintext fold.
inline Check tee_eval_transparency(std::uint64_t seed, int trials = 1000) {
  Check c;
  DeterministicRandom rng(seed);
  const auto platform = Platform::create(rng);
  const auto enclave = Enclave::create(platform, as_bytes("secagg/party-enclave/1"), 1, rng);
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t bound = 1 + rng.uniform(1000);
    std::vector<std::int64_t> values(rng.uniform(50));
    for (auto& v : values)
      v = static_cast<std::int64_t>(rng.uniform(2 * bound + 1)) - static_cast<std::int64_t>(bound);
    const Dataset d(0, values, bound);
    Query q;
    q.kind = rng.uniform(2) == 0 ? QueryKind::Sum : QueryKind::Count;
    if (rng.uniform(4) != 0)
      q.predicate = Predicate{static_cast<CompareOp>(1 + rng.uniform(6)),
                              static_cast<std::int64_t>(rng.uniform(2 * bound + 1)) -
                                  static_cast<std::int64_t>(bound)};
    ++c.cases;
    const auto inside = enclave.eval(q, d).value;
    if (inside != eval_query(q, d).value || inside != oracle::fold_query(q, values))
      c.fail("trial " + std::to_string(trial) + ": " + q.to_string());
  }
  return c;
}

}  // namespace secagg::props
