#include <gtest/gtest.h>

#include <sodium.h>

#include <thread>

#include "properties.hpp"
#include "secagg/error.hpp"
#include "secagg/tee.hpp"
#include "secagg/thfhe.hpp"

using namespace secagg;

namespace {

const auto kAggId = as_bytes("secagg/aggregator-enclave/1");
const auto kPartyId = as_bytes("secagg/party-enclave/1");

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::IoError;
}

std::shared_ptr<const Platform> platform() {
  static const auto p = Platform::from_seed(1);
  return p;
}

}  // namespace

TEST(EnclaveCreate, SameIdentitySameMeasurementFreshKeys) {
  const auto a = Enclave::create(platform(), kPartyId, 1);
  const auto b = Enclave::create(platform(), kPartyId, 1);
  EXPECT_EQ(a.measurement(), b.measurement());
  EXPECT_NE(a.public_key(), b.public_key());
  EXPECT_EQ(to_hex(a.measurement()),
            "91d0f14bdba360099a45f952fd5379c66b017e3b843ae7a95e8dd1316de45508");
}

TEST(EnclaveCreate, ZeroThresholdRejected) {
  EXPECT_EQ(code_of([] { Enclave::create(platform(), kAggId, 0); }), Errc::InvalidThreshold);
}

TEST(EnclaveCreate, ZeroIdentityMeasurementGolden) {
  const Bytes zeros(32, 0);
  const auto e = Enclave::create(platform(), zeros, 1);
  EXPECT_EQ(to_hex(e.measurement()),
            "66687aadf862bd776c8fc18b8e9f8e20089714856ee233b3902a591d0d5f2925");
  EXPECT_EQ(e.measurement(), measure(zeros));
}

TEST(EnclaveAttest, VerifiesAndDetectsTampering) {
  const auto e = Enclave::create(platform(), kAggId, 2);
  const auto report = e.attest();
  const auto& root = platform()->verification_key();
  EXPECT_TRUE(report.verify(root));
  EXPECT_TRUE(verify_attestation(report, root, measure(kAggId)));
  EXPECT_EQ(report.enclave_public_key, e.public_key());

  auto sig = report;
  sig.signature[10] ^= 0x01;
  EXPECT_FALSE(sig.verify(root));
  auto meas = report;
  meas.measurement[0] ^= 0x80;
  EXPECT_FALSE(meas.verify(root));
  auto key = report;
  key.enclave_public_key[31] ^= 0x01;
  EXPECT_FALSE(key.verify(root));

  const auto other = Platform::from_seed(2);
  EXPECT_FALSE(report.verify(other->verification_key()));
}

TEST(EnclaveAttest, WrongCodeIdentityRejectedByExpectedMeasurement) {
  const auto e = Enclave::create(platform(), as_bytes("some-other-code"), 1);
  const auto report = e.attest();
  EXPECT_TRUE(report.verify(platform()->verification_key()));
  EXPECT_FALSE(verify_attestation(report, platform()->verification_key(), measure(kAggId)));
}

TEST(AttestationReport, WireLayout) {
  const auto e = Enclave::create(platform(), kAggId, 1);
  const auto report = e.attest();
  const auto bytes = report.serialize();
  ASSERT_EQ(bytes.size(), AttestationReport::kBytes);
  EXPECT_TRUE(std::equal(report.measurement.begin(), report.measurement.end(), bytes.begin()));
  EXPECT_TRUE(std::equal(e.public_key().begin(), e.public_key().end(), bytes.begin() + 32));
  EXPECT_TRUE(std::equal(report.signature.begin(), report.signature.end(), bytes.begin() + 64));
  EXPECT_EQ(AttestationReport::parse(bytes).serialize(), bytes);
  EXPECT_EQ(code_of([&] { AttestationReport::parse(ByteView(bytes).first(127)); }),
            Errc::LengthMismatch);
}

TEST(Platform, SeededRootIsReproducible) {
  EXPECT_EQ(Platform::from_seed(5)->verification_key(), Platform::from_seed(5)->verification_key());
  EXPECT_NE(Platform::from_seed(5)->verification_key(), Platform::from_seed(6)->verification_key());
}

TEST(PkEnc, EmptyAndIntegerRoundTrip) {
  const auto e = Enclave::create(platform(), kPartyId, 1);
  const auto empty = pk_enc({}, e.public_key());
  EXPECT_EQ(empty.size(), kPkEncOverhead);
  EXPECT_TRUE(e.with_plaintext(empty, [](ByteView p) { return p.empty(); }));
  const Bytes seven{7, 0, 0, 0};
  const auto ct = pk_enc(seven, e.public_key());
  EXPECT_EQ(ct.size(), 4 + kPkEncOverhead);
  EXPECT_EQ(e.with_plaintext(ct, [](ByteView p) { return Bytes(p.begin(), p.end()); }), seven);
}

TEST(PkEnc, OtherEnclaveCannotDecrypt) {
  const auto a = Enclave::create(platform(), kPartyId, 1);
  const auto b = Enclave::create(platform(), kPartyId, 1);
  const auto ct = pk_enc(Bytes{1, 2, 3}, a.public_key());
  EXPECT_EQ(code_of([&] { b.with_plaintext(ct, [](ByteView) { return 0; }); }),
            Errc::DecryptionFailure);
}

TEST(TeeSkDec, RandomKibRoundTripAndTamper) {
  DeterministicRandom rng(3);
  const auto e = Enclave::create(platform(), kPartyId, 1, rng);
  Bytes payload(1024);
  rng.fill(payload);
  auto ct = pk_enc(payload, e.public_key());
  EXPECT_EQ(e.with_plaintext(ct, [](ByteView p) { return Bytes(p.begin(), p.end()); }), payload);
  ct[100] ^= 0x04;
  EXPECT_EQ(code_of([&] { e.with_plaintext(ct, [](ByteView) { return 0; }); }),
            Errc::DecryptionFailure);
  EXPECT_EQ(code_of([&] { e.with_plaintext(Bytes(10, 0), [](ByteView) { return 0; }); }),
            Errc::DecryptionFailure);
}

TEST(TeeSkDec, HundredConcurrentDecrypts) {
  const auto e = Enclave::create(platform(), kPartyId, 1);
  std::vector<Bytes> cts;
  for (int i = 0; i < 100; ++i) cts.push_back(pk_enc(encode_subresult(i * 1000 + 7), e.public_key()));
  std::vector<std::int64_t> got(100, -1);
  std::vector<std::thread> threads;
  for (int i = 0; i < 100; ++i)
    threads.emplace_back([&, i] {
      got[i] = e.with_plaintext(cts[i], [](ByteView p) { return decode_subresult(p); });
    });
  for (auto& t : threads) t.join();
  for (int i = 0; i < 100; ++i) EXPECT_EQ(got[i], i * 1000 + 7);
}

TEST(TeeEval, ExamplesMatchPlaintextEvaluation) {
  const auto e = Enclave::create(platform(), kPartyId, 1);
  EXPECT_EQ(e.eval(parse_query("sum"), Dataset(0, {1, 2, 3})).value, 6);
  const Dataset d(0, {5, 5, 1});
  const auto q = parse_query("count where value == 5");
  EXPECT_EQ(e.eval(q, d).value, 2);
  EXPECT_EQ(e.eval(q, d).value, eval_query(q, d).value);
  Query missing;
  missing.column = 3;
  EXPECT_EQ(code_of([&] { e.eval(missing, d); }), Errc::QueryMalformed);
}

TEST(TeeEval, ConfidentialPathSealsInside) {
  const auto party = Enclave::create(platform(), kPartyId, 1);
  const auto agg = Enclave::create(platform(), kAggId, 1);
  const auto enc_q = pk_enc(parse_query("sum where value > 1").serialize(), party.public_key());
  const auto sealed = party.evaluate_confidential(enc_q, Dataset(0, {1, 2, 3}), [&](std::int64_t r) {
    return pk_enc(encode_subresult(r), agg.public_key());
  });
  EXPECT_EQ(sealed.size(), 8 + kPkEncOverhead);
  EXPECT_EQ(agg.with_plaintext(sealed, [](ByteView p) { return decode_subresult(p); }), 5);
  // A query sealed to a different enclave does not decrypt.
  const auto wrong = pk_enc(parse_query("sum").serialize(), agg.public_key());
  EXPECT_EQ(code_of([&] {
              party.evaluate_confidential(wrong, Dataset(0, {1}), [](std::int64_t) { return Bytes{}; });
            }),
            Errc::DecryptionFailure);
}

TEST(TeeSubmit, AcceptDuplicateAndFailure) {
  auto e = Enclave::create(platform(), kAggId, 3);
  EXPECT_EQ(e.submit_subresult(1, pk_enc(encode_subresult(4), e.public_key())), SubmitStatus::Accepted);
  EXPECT_EQ(e.buffered_count(), 1u);
  EXPECT_EQ(e.submit_subresult(1, pk_enc(encode_subresult(99), e.public_key())), SubmitStatus::Duplicate);
  EXPECT_EQ(e.buffered_count(), 1u);
  EXPECT_EQ(code_of([&] { e.submit_subresult(2, Bytes(60, 1)); }), Errc::DecryptionFailure);
  EXPECT_EQ(code_of([&] { e.submit_subresult(2, pk_enc(Bytes{1, 2}, e.public_key())); }),
            Errc::DecryptionFailure);
  EXPECT_EQ(e.buffered_count(), 1u);
}

TEST(TeeAggregate, ThresholdGateExamples) {
  auto e = Enclave::create(platform(), kAggId, 3);
  e.submit_subresult(1, pk_enc(encode_subresult(4), e.public_key()));
  e.submit_subresult(2, pk_enc(encode_subresult(-1), e.public_key()));
  try {
    e.aggregate();
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::ThresholdNotReached);
    EXPECT_STREQ(err.what(), "Threshold not reached");
  }
  e.submit_subresult(3, pk_enc(encode_subresult(7), e.public_key()));
  EXPECT_EQ(e.aggregate(), 10);
  EXPECT_EQ(e.buffered_count(), 0u);
  EXPECT_EQ(code_of([&] { e.aggregate(); }), Errc::ThresholdNotReached);

  auto one = Enclave::create(platform(), kAggId, 1);
  one.submit_subresult(1, pk_enc(encode_subresult(0), one.public_key()));
  EXPECT_EQ(one.aggregate(), 0);
}

TEST(TeeAggregate, MovedHandleKeepsState) {
  auto e = Enclave::create(platform(), kAggId, 1);
  e.submit_subresult(1, pk_enc(encode_subresult(12), e.public_key()));
  Enclave moved = std::move(e);
  std::int64_t got = 0;
  std::thread([&] { got = moved.aggregate(); }).join();
  EXPECT_EQ(got, 12);
}

TEST(TeeProperties, ThresholdGateGrid) {
  const auto c = props::threshold_gate_grid(20);
  EXPECT_TRUE(c.ok) << c.detail;
  EXPECT_EQ(c.cases, 110u);
}

TEST(TeeProperties, EvalIsTransparent) {
  const auto c = props::tee_eval_transparency(21);
  EXPECT_TRUE(c.ok) << c.detail;
}

TEST(TeeBoundary, CanaryAudit) {
  // Replaying the enclave's RNG recovers its private key, which is then
  // searched for in everything the public API hands out.
  DeterministicRandom rng(40), replay(40);
  std::array<std::uint8_t, crypto_box_SEEDBYTES> seed{};
  replay.fill(seed);
  std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> pk{};
  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> sk{};
  crypto_box_seed_keypair(pk.data(), sk.data(), seed.data());

  auto e = Enclave::create(platform(), kAggId, 3, rng);
  ASSERT_EQ(e.public_key(), pk);
  const std::int64_t canary = 0x3c5a7e91d2;
  const auto canary_bytes = encode_subresult(canary);

  std::vector<Bytes> exposed;
  auto keep = [&](ByteView b) { exposed.emplace_back(b.begin(), b.end()); };
  auto keep_error = [&](const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& x) {
      keep(as_bytes(x.what()));
    }
  };
  keep(e.attest().serialize());
  keep(e.public_key());
  keep(e.measurement());
  const auto ct = pk_enc(canary_bytes, e.public_key());
  keep(ct);
  e.submit_subresult(1, ct);
  keep_error([&] { e.submit_subresult(2, Bytes(ct.begin(), ct.end() - 1)); });
  keep_error([&] { e.submit_subresult(1, ct); });
  keep_error([&] { e.aggregate(); });
  keep_error([&] { e.submit_subresult(3, pk_enc(Bytes(5, 0x3c), e.public_key())); });
  keep_error([&] { e.with_plaintext(Bytes(48, 0), [](ByteView) { return 0; }); });
  keep_error([&] {
    e.evaluate_confidential(pk_enc(canary_bytes, e.public_key()), Dataset(0, {1}),
                            [](std::int64_t) { return Bytes{}; });
  });
  keep(as_bytes(std::to_string(e.buffered_count())));

  for (const auto& b : exposed) {
    EXPECT_FALSE(contains(b, sk)) << to_hex(b);
    EXPECT_FALSE(contains(b, canary_bytes)) << to_hex(b);
    EXPECT_FALSE(contains(as_bytes(to_hex(b)), as_bytes(to_hex(canary_bytes))));
  }
  EXPECT_EQ(e.buffered_count(), 1u);
  sodium_memzero(sk.data(), sk.size());
}
