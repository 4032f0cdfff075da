#include "secagg/wire.hpp"

namespace secagg::wire {

namespace {

Mechanism read_mech(ByteReader& in) {
  const std::uint8_t v = in.u8();
  if (v > 1) fail(Errc::ProtocolViolation, "bad mechanism byte");
  return static_cast<Mechanism>(v);
}

bool read_flag(ByteReader& in) {
  const std::uint8_t v = in.u8();
  if (v > 1) fail(Errc::ProtocolViolation, "bad flag byte");
  return v == 1;
}

void expect_kind(ByteReader& in, SetupKind k) {
  if (in.u8() != static_cast<std::uint8_t>(k)) fail(Errc::ProtocolViolation, "unexpected SETUP kind");
}

}  // namespace

SetupKind peek_setup_kind(ByteView body) {
  if (body.empty()) fail(Errc::Truncated, "empty SETUP body");
  const std::uint8_t k = body[0];
  if (k < 1 || k > 3) fail(Errc::ProtocolViolation, "unknown SETUP kind");
  return static_cast<SetupKind>(k);
}

Bytes Hello::serialize() const {
  ByteWriter w(14);
  w.u8(static_cast<std::uint8_t>(SetupKind::Hello))
      .u32(party_index)
      .u8(static_cast<std::uint8_t>(mechanism))
      .u64(subresult_bound);
  return std::move(w).take();
}

Hello Hello::parse(ByteView b) {
  ByteReader in(b);
  expect_kind(in, SetupKind::Hello);
  Hello h;
  h.party_index = in.u32();
  h.mechanism = read_mech(in);
  h.subresult_bound = in.u64();
  in.expect_done("hello");
  return h;
}

Bytes Provision::serialize() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(SetupKind::Provision))
      .u32(party_index)
      .u32(n)
      .u32(t)
      .u8(static_cast<std::uint8_t>(party_mechanism))
      .u8(static_cast<std::uint8_t>(aggregator_mechanism))
      .u8(static_cast<std::uint8_t>(query_conf))
      .u8(baseline ? 1 : 0);
  w.u8(public_key ? 1 : 0);
  if (public_key) w.blob(public_key->serialize());
  w.u8(share ? 1 : 0);
  if (share) w.blob(share->serialize());
  w.u32(static_cast<std::uint32_t>(candidates.size()));
  for (const Query& q : candidates) w.raw(q.serialize());
  return std::move(w).take();
}

Provision Provision::parse(ByteView b) {
  ByteReader in(b);
  expect_kind(in, SetupKind::Provision);
  Provision p;
  p.party_index = in.u32();
  p.n = in.u32();
  p.t = in.u32();
  p.party_mechanism = read_mech(in);
  p.aggregator_mechanism = read_mech(in);
  const std::uint8_t conf = in.u8();
  if (conf > 1) fail(Errc::ProtocolViolation, "bad query confidentiality byte");
  p.query_conf = static_cast<QueryConf>(conf);
  p.baseline = read_flag(in);
  if (read_flag(in)) p.public_key = JointPublicKey::parse(in.blob());
  if (read_flag(in)) p.share = SecretKeyShare::parse(in.blob());
  const std::uint32_t k = in.u32();
  if (k > kMaxCandidates) fail(Errc::ProtocolViolation, "candidate universe too large");
  p.candidates.reserve(k);
  for (std::uint32_t j = 0; j < k; ++j) p.candidates.push_back(Query::parse(in.raw(Query::kWireBytes)));
  in.expect_done("provision");
  return p;
}

Bytes ack() { return Bytes{static_cast<std::uint8_t>(SetupKind::Ack)}; }

Bytes AttestRequest::serialize() const {
  ByteWriter w(1 + AttestationReport::kBytes);
  w.u8(aggregator_report ? 1 : 0);
  if (aggregator_report) w.raw(aggregator_report->serialize());
  return std::move(w).take();
}

AttestRequest AttestRequest::parse(ByteView b) {
  ByteReader in(b);
  AttestRequest r;
  if (read_flag(in)) r.aggregator_report = AttestationReport::parse(in.raw(AttestationReport::kBytes));
  in.expect_done("attest request");
  return r;
}

Bytes AttestResponse::serialize() const {
  ByteWriter w(2 + AttestationReport::kBytes);
  w.u8(accepted ? 1 : 0).u8(party_report ? 1 : 0);
  if (party_report) w.raw(party_report->serialize());
  return std::move(w).take();
}

AttestResponse AttestResponse::parse(ByteView b) {
  ByteReader in(b);
  AttestResponse r;
  r.accepted = read_flag(in);
  if (read_flag(in)) r.party_report = AttestationReport::parse(in.raw(AttestationReport::kBytes));
  in.expect_done("attest response");
  return r;
}

Bytes QueryMsg::serialize() const {
  ByteWriter w(1 + Query::kWireBytes);
  w.u8(static_cast<std::uint8_t>(mode));
  if (mode == QueryMode::Plain) w.raw(query.serialize());
  return std::move(w).take();
}

QueryMsg QueryMsg::parse(ByteView b) {
  ByteReader in(b);
  QueryMsg m;
  const std::uint8_t mode = in.u8();
  if (mode > 1) fail(Errc::QueryMalformed, "unknown query mode");
  m.mode = static_cast<QueryMode>(mode);
  if (m.mode == QueryMode::Plain) m.query = Query::parse(in.raw(in.remaining()));
  in.expect_done("query");
  return m;
}

Bytes FinalResult::serialize() const {
  ByteWriter w(9);
  w.u8(error ? static_cast<std::uint8_t>(static_cast<int>(*error) + 1) : 0).i64(error ? 0 : value);
  return std::move(w).take();
}

FinalResult FinalResult::parse(ByteView b) {
  ByteReader in(b);
  FinalResult r;
  const std::uint8_t status = in.u8();
  r.value = in.i64();
  in.expect_done("final result");
  if (status != 0) {
    if (status - 1 > static_cast<int>(Errc::IoError)) fail(Errc::ProtocolViolation, "bad status");
    r.error = static_cast<Errc>(status - 1);
  }
  return r;
}

}  // namespace secagg::wire
