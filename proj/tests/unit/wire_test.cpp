#include <gtest/gtest.h>

#include "secagg/error.hpp"
#include "secagg/tee.hpp"
#include "secagg/wire.hpp"

using namespace secagg;
using namespace secagg::wire;

TEST(Wire, HelloRoundTrip) {
  const Hello h{7, Mechanism::Tee, 123456};
  const auto b = h.serialize();
  EXPECT_EQ(peek_setup_kind(b), SetupKind::Hello);
  const auto back = Hello::parse(b);
  EXPECT_EQ(back.party_index, 7u);
  EXPECT_EQ(back.mechanism, Mechanism::Tee);
  EXPECT_EQ(back.subresult_bound, 123456u);
}

TEST(Wire, ProvisionWithKeysAndCandidates) {
  DeterministicRandom rng(1);
  const auto keys = thfhe_setup(3, 2, 100, rng);
  Provision p;
  p.party_index = 2;
  p.n = 3;
  p.t = 2;
  p.party_mechanism = Mechanism::Crypto;
  p.aggregator_mechanism = Mechanism::Crypto;
  p.query_conf = QueryConf::Confidential;
  p.public_key = keys.public_key;
  p.share = keys.shares[1];
  p.candidates = candidate_universe(4, 100);
  const auto b = p.serialize();
  EXPECT_EQ(peek_setup_kind(b), SetupKind::Provision);
  const auto back = Provision::parse(b);
  EXPECT_EQ(back.party_index, 2u);
  EXPECT_EQ(back.t, 2u);
  EXPECT_EQ(back.query_conf, QueryConf::Confidential);
  ASSERT_TRUE(back.public_key);
  EXPECT_EQ(back.public_key->element, keys.public_key.element);
  ASSERT_TRUE(back.share);
  EXPECT_EQ(back.share->scalar_share, keys.shares[1].scalar_share);
  EXPECT_EQ(back.candidates, p.candidates);
  EXPECT_FALSE(back.baseline);
}

TEST(Wire, ProvisionWithoutKeys) {
  Provision p;
  p.party_index = 1;
  p.n = 1;
  p.t = 1;
  p.baseline = true;
  const auto back = Provision::parse(p.serialize());
  EXPECT_FALSE(back.public_key);
  EXPECT_FALSE(back.share);
  EXPECT_TRUE(back.candidates.empty());
  EXPECT_TRUE(back.baseline);
}

TEST(Wire, AckAndUnknownSetupKind) {
  EXPECT_EQ(peek_setup_kind(ack()), SetupKind::Ack);
  EXPECT_THROW(peek_setup_kind(Bytes{}), Error);
  EXPECT_THROW(peek_setup_kind(Bytes{9}), Error);
}

TEST(Wire, AttestMessages) {
  const auto platform = Platform::from_seed(2);
  const auto e = Enclave::create(platform, as_bytes("id"), 1);
  AttestRequest req{e.attest()};
  const auto rb = AttestRequest::parse(req.serialize());
  ASSERT_TRUE(rb.aggregator_report);
  EXPECT_EQ(rb.aggregator_report->serialize(), e.attest().serialize());
  EXPECT_FALSE(AttestRequest::parse(AttestRequest{}.serialize()).aggregator_report);

  AttestResponse resp{false, e.attest()};
  const auto back = AttestResponse::parse(resp.serialize());
  EXPECT_FALSE(back.accepted);
  ASSERT_TRUE(back.party_report);
  EXPECT_TRUE(back.party_report->verify(platform->verification_key()));
}

TEST(Wire, QueryMsgModes) {
  QueryMsg plain{QueryMode::Plain, parse_query("count where value < 3")};
  const auto b = plain.serialize();
  EXPECT_EQ(b.size(), 1 + Query::kWireBytes);
  EXPECT_EQ(b[0], 0);
  EXPECT_EQ(QueryMsg::parse(b).query, plain.query);
  QueryMsg universe{QueryMode::Universe, {}};
  const auto u = universe.serialize();
  EXPECT_EQ(u, Bytes{1});
  EXPECT_EQ(QueryMsg::parse(u).mode, QueryMode::Universe);
  EXPECT_THROW(QueryMsg::parse(Bytes{2}), Error);
}

TEST(Wire, FinalResultLayouts) {
  const auto ok = FinalResult{std::nullopt, -5}.serialize();
  EXPECT_EQ(to_hex(ok), "00" "fbffffffffffffff");
  EXPECT_EQ(FinalResult::parse(ok).value, -5);
  const auto err = FinalResult{Errc::ThresholdNotMet, 0}.serialize();
  EXPECT_EQ(err[0], static_cast<int>(Errc::ThresholdNotMet) + 1);
  const auto back = FinalResult::parse(err);
  ASSERT_TRUE(back.error);
  EXPECT_EQ(*back.error, Errc::ThresholdNotMet);
}
