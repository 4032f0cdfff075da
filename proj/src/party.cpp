#include <atomic>

#include "secagg/protocol.hpp"

namespace secagg {

struct PartyNode::Impl {
  ChannelPtr channel;
  Channel* base = nullptr;  // original endpoint; close() reaches it through any wrapper
  std::unique_ptr<RandomSource> own_rng;
  RandomSource* rng = nullptr;

  std::optional<wire::Provision> prov;
  std::optional<Enclave> enclave;
  std::optional<EnclavePublicKey> aggregator_pk;
  std::optional<OtSender> ot_sender;
  std::uint32_t ot_round = 0;

  mutable std::mutex mu;
  std::map<std::uint32_t, PartyCompute> compute;
  std::map<std::uint32_t, wire::FinalResult> finals;
  std::optional<std::string> failure;
  std::condition_variable final_cv;
  bool stopped = false;

  void add_compute(std::uint32_t round, std::chrono::nanoseconds eval, std::chrono::nanoseconds dec) {
    std::lock_guard lock(mu);
    auto& c = compute[round];
    c.evaluate += eval;
    c.decrypt += dec;
  }
};

PartyNode::PartyNode(PartyOptions options, ChannelPtr channel)
    : opts_(std::move(options)), impl_(std::make_unique<Impl>()) {
  impl_->base = channel.get();
  impl_->channel = std::move(channel);
  if (opts_.seed) {
    impl_->own_rng = std::make_unique<DeterministicRandom>(*opts_.seed);
    impl_->rng = impl_->own_rng.get();
  } else {
    impl_->rng = &system_random();
  }
}

PartyNode::~PartyNode() = default;

void PartyNode::stop() { impl_->base->close(); }

PartyCompute PartyNode::compute_for(std::uint32_t round_id) const {
  std::lock_guard lock(impl_->mu);
  auto it = impl_->compute.find(round_id);
  return it == impl_->compute.end() ? PartyCompute{} : it->second;
}

std::optional<wire::FinalResult> PartyNode::final_for(std::uint32_t round_id) const {
  std::lock_guard lock(impl_->mu);
  auto it = impl_->finals.find(round_id);
  if (it == impl_->finals.end()) return std::nullopt;
  return it->second;
}

bool PartyNode::wait_final(std::uint32_t round_id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(impl_->mu);
  return impl_->final_cv.wait_for(lock, timeout, [&] {
    return impl_->stopped || impl_->finals.count(round_id) != 0;
  }) && impl_->finals.count(round_id) != 0;
}

std::optional<std::string> PartyNode::failure() const {
  std::lock_guard lock(impl_->mu);
  return impl_->failure;
}

void PartyNode::serve() {
  Impl& s = *impl_;
  const auto uses_tee = [&] {
    return !s.prov->baseline && (s.prov->party_mechanism == Mechanism::Tee ||
                                 s.prov->aggregator_mechanism == Mechanism::Tee);
  };
  // Encrypts a subresult for whichever mechanism the aggregator runs.
  const auto seal = [&](std::int64_t r) -> Bytes {
    if (s.prov->baseline) return encode_subresult(r);
    if (s.prov->aggregator_mechanism == Mechanism::Tee) {
      if (!s.aggregator_pk) fail(Errc::AttestationFailure, "no attested aggregator key");
      return pk_enc(encode_subresult(r), *s.aggregator_pk);
    }
    if (!s.prov->public_key) fail(Errc::ProtocolViolation, "no ThFHE public key provisioned");
    return thfhe_enc(r, *s.prov->public_key, *s.rng).serialize();
  };
  const auto abort_round = [&](std::uint32_t round, MsgType type) { s.channel->send(type, round, {}); };

  try {
    const NodeKeypair node_key = NodeKeypair::generate(*s.rng);
    if (opts_.secure_channel) s.channel = SecureChannel::client(std::move(s.channel), node_key);

    wire::Hello hello{opts_.index, opts_.mechanism, opts_.data.subresult_bound()};
    s.channel->send(MsgType::Setup, 0, hello.serialize());

    for (;;) {
      Frame f = s.channel->recv();
      const std::uint32_t round = f.round_id;
      switch (f.type) {
        case MsgType::Setup: {
          if (wire::peek_setup_kind(f.body) != wire::SetupKind::Provision)
            fail(Errc::ProtocolViolation, "party expects a provision message");
          s.prov = wire::Provision::parse(f.body);
          if (s.prov->party_index != opts_.index || s.prov->party_mechanism != opts_.mechanism)
            fail(Errc::ProtocolViolation, "provision addressed to a different party");
          if (opts_.mechanism == Mechanism::Tee) {
            if (!opts_.platform) fail(Errc::InvalidConfig, "TEE party needs a platform");
            s.enclave = Enclave::create(opts_.platform, as_bytes(kPartyCodeIdentity), 1, *s.rng);
          }
          if (!uses_tee()) s.channel->send(MsgType::Setup, 0, wire::ack());
          break;
        }
        case MsgType::AttestReq: {
          if (!s.prov) fail(Errc::ProtocolViolation, "attestation before provisioning");
          const auto req = wire::AttestRequest::parse(f.body);
          wire::AttestResponse resp;
          if (s.prov->aggregator_mechanism == Mechanism::Tee) {
            resp.accepted = req.aggregator_report && opts_.platform &&
                            verify_attestation(*req.aggregator_report,
                                               opts_.platform->verification_key(),
                                               measure(as_bytes(kAggregatorCodeIdentity)));
            if (resp.accepted) s.aggregator_pk = req.aggregator_report->enclave_public_key;
          }
          if (s.enclave) {
            resp.party_report = s.enclave->attest();
            if (opts_.faults.tamper_attestation) resp.party_report->signature[0] ^= 0x01;
          }
          s.channel->send(MsgType::AttestReport, 0, resp.serialize());
          if (resp.accepted) s.channel->send(MsgType::Setup, 0, wire::ack());
          break;
        }
        case MsgType::Query: {
          if (!s.prov) fail(Errc::ProtocolViolation, "query before provisioning");
          std::chrono::nanoseconds spent{0};
          Bytes out;
          MsgType out_type = MsgType::Subresult;
          try {
            const auto msg = wire::QueryMsg::parse(f.body);
            ComputeSection timer(spent);
            if (msg.mode == wire::QueryMode::Plain) {
              out = seal(eval_query(msg.query, opts_.data).value);
            } else {
              if (s.prov->candidates.empty()) fail(Errc::EmptyCandidateSet, "no candidate universe");
              const auto subs = eval_candidate_set(s.prov->candidates, opts_.data);
              std::vector<Bytes> payloads;
              payloads.reserve(subs.size());
              for (const Subresult& r : subs) payloads.push_back(seal(r.value));
              auto [sender, ann] = OtSender::init(std::move(payloads), *s.rng);
              s.ot_sender.emplace(std::move(sender));
              s.ot_round = round;
              out = ann.serialize();
              out_type = MsgType::OtAnnounce;
            }
          } catch (const Error&) {
            out.clear();
            out_type = MsgType::Subresult;
          }
          s.add_compute(round, spent, {});
          if (!opts_.faults.withhold_subresult) s.channel->send(out_type, round, out);
          break;
        }
        case MsgType::OtResponse: {
          if (!s.ot_sender || s.ot_round != round) break;
          std::chrono::nanoseconds spent{0};
          Bytes out;
          try {
            ComputeSection timer(spent);
            OtSender sender = std::move(*s.ot_sender);
            s.ot_sender.reset();
            out = std::move(sender).respond(OtResponse::parse(f.body)).serialize();
          } catch (const Error&) {
            s.add_compute(round, spent, {});
            abort_round(round, MsgType::Subresult);
            break;
          }
          s.add_compute(round, spent, {});
          s.channel->send(MsgType::OtPayloads, round, out);
          break;
        }
        case MsgType::EncQuery: {
          if (!s.enclave) fail(Errc::ProtocolViolation, "encrypted query sent to a party without an enclave");
          std::chrono::nanoseconds spent{0};
          Bytes out;
          try {
            ComputeSection timer(spent);
            out = s.enclave->evaluate_confidential(f.body, opts_.data, seal);
          } catch (const Error&) {
            out.clear();
          }
          s.add_compute(round, spent, {});
          if (!opts_.faults.withhold_subresult) s.channel->send(MsgType::Subresult, round, out);
          break;
        }
        case MsgType::EncAggregate: {
          if (!s.prov || !s.prov->share) fail(Errc::ProtocolViolation, "no key share provisioned");
          std::chrono::nanoseconds spent{0};
          Bytes out;
          try {
            ComputeSection timer(spent);
            out = thfhe_partial_dec(Ciphertext::parse(f.body), *s.prov->share).serialize();
          } catch (const Error&) {
            out.clear();
          }
          s.add_compute(round, {}, spent);
          if (!opts_.faults.withhold_partial) s.channel->send(MsgType::PartialDec, round, out);
          break;
        }
        case MsgType::FinalResult: {
          auto fr = wire::FinalResult::parse(f.body);
          s.ot_sender.reset();
          {
            std::lock_guard lock(s.mu);
            s.finals[round] = fr;
          }
          s.final_cv.notify_all();
          break;
        }
        default:
          fail(Errc::ProtocolViolation,
               "party received " + std::string(msg_type_name(f.type)));
      }
    }
  } catch (const Error& e) {
    if (e.code() != Errc::ChannelClosed) {
      std::lock_guard lock(s.mu);
      s.failure = std::string(errc_name(e.code())) + ": " + e.what();
    }
    s.channel->close();
  }
  {
    std::lock_guard lock(s.mu);
    s.stopped = true;
  }
  s.final_cv.notify_all();
}

}  // namespace secagg
