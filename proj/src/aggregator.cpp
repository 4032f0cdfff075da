#include <algorithm>
#include <atomic>

#include "secagg/protocol.hpp"

namespace secagg {

namespace {

using Clock = std::chrono::steady_clock;

struct Event {
  std::size_t slot = 0;
  std::optional<Frame> frame;  // empty: the channel closed
};

class Inbox {
 public:
  void push(Event e) {
    {
      std::lock_guard lock(mu_);
      q_.push_back(std::move(e));
    }
    cv_.notify_one();
  }

  std::optional<Event> pop_until(Clock::time_point deadline) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_until(lock, deadline, [&] { return !q_.empty(); })) return std::nullopt;
    Event e = std::move(q_.front());
    q_.pop_front();
    return e;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> q_;
};

struct Slot {
  ChannelPtr channel;
  std::atomic<std::uint32_t> party{0};
  bool alive = true;
  std::optional<EnclavePublicKey> enclave_pk;
  std::thread reader;
};

}  // namespace

struct AggregatorNode::Impl {
  std::vector<std::unique_ptr<Slot>> slots;
  std::vector<std::size_t> slot_of;  // party index -> slot, index 0 unused
  Inbox inbox;
  std::unique_ptr<RandomSource> own_rng;
  RandomSource* rng = nullptr;

  std::optional<JointPublicKey> public_key;
  std::optional<Enclave> enclave;
  std::vector<Query> candidates;
  std::uint32_t round = 0;
  std::size_t attested = 0;
  StatsSnapshot setup_io;
  bool started = false;
  bool shut = false;

  Slot& of_party(std::uint32_t p) { return *slots[slot_of[p]]; }

  std::vector<std::uint32_t> live_parties() const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t p = 1; p < slot_of.size(); ++p)
      if (slots[slot_of[p]]->alive) out.push_back(p);
    return out;
  }

  // Sends, marking the party dead on failure instead of aborting the round.
  bool send_to(std::uint32_t p, MsgType t, std::uint32_t round_id, ByteView body) {
    Slot& s = of_party(p);
    if (!s.alive) return false;
    try {
      s.channel->send(t, round_id, body);
      return true;
    } catch (const Error&) {
      s.alive = false;
      return false;
    }
  }
};

AggregatorNode::AggregatorNode(AggregatorOptions options, std::vector<ChannelPtr> channels)
    : opts_(std::move(options)), impl_(std::make_unique<Impl>()) {
  opts_.config.validate();
  if (channels.size() != opts_.config.n())
    fail(Errc::InvalidConfig, "need exactly one channel per party");
  for (auto& c : channels) {
    auto s = std::make_unique<Slot>();
    s->channel = std::move(c);
    impl_->slots.push_back(std::move(s));
  }
  if (opts_.seed) {
    impl_->own_rng = std::make_unique<DeterministicRandom>(*opts_.seed);
    impl_->rng = impl_->own_rng.get();
  } else {
    impl_->rng = &system_random();
  }
}

AggregatorNode::~AggregatorNode() { shutdown(); }

void AggregatorNode::shutdown() {
  if (impl_->shut) return;
  impl_->shut = true;
  for (auto& s : impl_->slots) s->channel->close();
  for (auto& s : impl_->slots)
    if (s->reader.joinable()) s->reader.join();
}

const std::vector<Query>& AggregatorNode::candidates() const { return impl_->candidates; }
bool AggregatorNode::has_thfhe_keys() const { return impl_->public_key.has_value(); }
bool AggregatorNode::has_enclave() const { return impl_->enclave.has_value(); }
std::size_t AggregatorNode::attested_parties() const { return impl_->attested; }
StatsSnapshot AggregatorNode::setup_io() const { return impl_->setup_io; }

std::optional<ThfheParams> AggregatorNode::thfhe_params() const {
  if (!impl_->public_key) return std::nullopt;
  return impl_->public_key->params;
}

StatsSnapshot AggregatorNode::io() const {
  StatsSnapshot total;
  for (const auto& s : impl_->slots) total += s->channel->stats();
  return total;
}

void AggregatorNode::setup() {
  Impl& m = *impl_;
  const VariantConfig& cfg = opts_.config;
  const std::uint32_t n = cfg.n();
  if (m.started) fail(Errc::ProtocolViolation, "setup already ran");
  m.started = true;

  try {
    const auto deadline = Clock::now() + opts_.setup_timeout;
    const NodeKeypair node_key = NodeKeypair::generate(*m.rng);

    for (std::size_t i = 0; i < m.slots.size(); ++i) {
      Slot& s = *m.slots[i];
      if (opts_.secure_channels) s.channel = SecureChannel::server(std::move(s.channel), node_key);
      if (opts_.observer) {
        s.channel->set_observer([this, &s](Direction d, const Frame& f) {
          std::uint32_t p = s.party.load();
          if (p == 0 && f.type == MsgType::Setup) {
            try {
              p = wire::Hello::parse(f.body).party_index;
            } catch (const Error&) {
            }
          }
          opts_.observer(TranscriptEntry{p, d, f});
        });
      }
      s.reader = std::thread([&m, i] {
        Channel& ch = *m.slots[i]->channel;
        for (;;) {
          try {
            m.inbox.push({i, ch.recv()});
          } catch (const Error&) {
            m.inbox.push({i, std::nullopt});
            return;
          }
        }
      });
    }

    // Waits for one setup-phase frame from every party that has not answered yet.
    // A party may run ahead by one stage; its frame is held for the next collect.
    std::deque<Event> early;
    const auto collect = [&](std::string_view what, const auto& on_frame,
                             const std::function<bool(std::size_t)>& from = {}) {
      std::set<std::size_t> pending;
      for (std::size_t i = 0; i < m.slots.size(); ++i)
        if (!from || from(i)) pending.insert(i);
      std::deque<Event> held = std::move(early);
      early.clear();
      while (!pending.empty()) {
        std::optional<Event> ev;
        if (!held.empty()) {
          ev = std::move(held.front());
          held.pop_front();
        } else {
          ev = m.inbox.pop_until(deadline);
        }
        if (!ev) fail(Errc::ConnectionError, "setup timed out waiting for " + std::string(what));
        if (!ev->frame) fail(Errc::ConnectionError, "party disconnected during setup");
        if (!pending.count(ev->slot)) {
          early.push_back(std::move(*ev));
          continue;
        }
        on_frame(ev->slot, *ev->frame);
        pending.erase(ev->slot);
      }
      for (auto& e : held) early.push_back(std::move(e));
    };

    m.slot_of.assign(n + 1, 0);
    std::vector<bool> seen(n + 1, false);
    std::uint64_t max_bound = 1;
    collect("hellos", [&](std::size_t slot, const Frame& f) {
      if (f.type != MsgType::Setup) fail(Errc::ProtocolViolation, "expected hello");
      const auto h = wire::Hello::parse(f.body);
      if (h.party_index < 1 || h.party_index > n)
        fail(Errc::InvalidPartyIndex, "party index " + std::to_string(h.party_index) + " out of range");
      if (seen[h.party_index])
        fail(Errc::DuplicatePartyIndex, "party index " + std::to_string(h.party_index) + " repeated");
      if (h.mechanism != cfg.party_mechs[h.party_index - 1])
        fail(Errc::InvalidConfig, "party " + std::to_string(h.party_index) + " runs the wrong mechanism");
      seen[h.party_index] = true;
      m.slots[slot]->party = h.party_index;
      m.slot_of[h.party_index] = slot;
      max_bound = std::max(max_bound, h.subresult_bound);
    });

    std::vector<SecretKeyShare> shares;
    if (cfg.needs_thfhe()) {
      const std::uint64_t bound = opts_.plaintext_bound ? opts_.plaintext_bound : max_bound;
      ThfheKeys keys = thfhe_setup(n, cfg.t, bound, *m.rng);
      m.public_key = keys.public_key;
      shares = std::move(keys.shares);
    }
    if (cfg.aggregator_mech == Mechanism::Tee && !cfg.baseline) {
      if (!opts_.platform) fail(Errc::InvalidConfig, "TEE aggregator needs a platform");
      m.enclave = Enclave::create(opts_.platform, as_bytes(kAggregatorCodeIdentity), cfg.t, *m.rng);
    }
    if (cfg.uses_ot()) {
      m.candidates = opts_.candidates.empty() ? candidate_universe(cfg.k, opts_.value_bound)
                                              : opts_.candidates;
      if (m.candidates.size() != cfg.k)
        fail(Errc::InvalidConfig, "candidate universe size differs from k");
    }

    for (std::uint32_t p = 1; p <= n; ++p) {
      wire::Provision prov;
      prov.party_index = p;
      prov.n = n;
      prov.t = cfg.t;
      prov.party_mechanism = cfg.party_mechs[p - 1];
      prov.aggregator_mechanism = cfg.aggregator_mech;
      prov.query_conf = cfg.query_conf;
      prov.baseline = cfg.baseline;
      if (m.public_key) {
        prov.public_key = m.public_key;
        prov.share = shares[p - 1];
      }
      if (cfg.uses_ot() && prov.party_mechanism == Mechanism::Crypto) prov.candidates = m.candidates;
      m.of_party(p).channel->send(MsgType::Setup, 0, prov.serialize());
    }
    shares.clear();

    if (cfg.uses_tee()) {
      wire::AttestRequest req;
      if (m.enclave) {
        req.aggregator_report = m.enclave->attest();
        if (opts_.faults.tamper_attestation) req.aggregator_report->signature[0] ^= 0x01;
      }
      const Bytes body = req.serialize();
      // A CRYPTO party under a CRYPTO aggregator has nothing to attest.
      const auto attests = [&](std::uint32_t p) {
        return cfg.aggregator_mech == Mechanism::Tee || cfg.party_mechs[p - 1] == Mechanism::Tee;
      };
      for (std::uint32_t p = 1; p <= n; ++p)
        if (attests(p)) m.of_party(p).channel->send(MsgType::AttestReq, 0, body);
      const Measurement expected = measure(as_bytes(kPartyCodeIdentity));
      collect("attestation reports", [&](std::size_t slot, const Frame& f) {
        Slot& s = *m.slots[slot];
        const std::uint32_t p = s.party;
        if (f.type != MsgType::AttestReport) fail(Errc::ProtocolViolation, "expected attestation report");
        const auto resp = wire::AttestResponse::parse(f.body);
        if (!resp.accepted)
          fail(Errc::AttestationFailure, "party " + std::to_string(p) + " rejected the aggregator enclave");
        if (cfg.party_mechs[p - 1] == Mechanism::Tee) {
          if (!resp.party_report || !opts_.platform ||
              !verify_attestation(*resp.party_report, opts_.platform->verification_key(), expected))
            fail(Errc::AttestationFailure, "party " + std::to_string(p) + " enclave failed attestation");
          s.enclave_pk = resp.party_report->enclave_public_key;
          ++m.attested;
        }
      }, [&](std::size_t slot) { return attests(m.slots[slot]->party); });
    }

    collect("acknowledgements", [&](std::size_t, const Frame& f) {
      if (f.type != MsgType::Setup || wire::peek_setup_kind(f.body) != wire::SetupKind::Ack)
        fail(Errc::ProtocolViolation, "expected setup acknowledgement");
    });
    if (!early.empty()) fail(Errc::ProtocolViolation, "unexpected setup message");
    m.setup_io = io();
  } catch (...) {
    shutdown();
    throw;
  }
}

RoundOutcome AggregatorNode::run_round(const RoundRequest& request) {
  Impl& m = *impl_;
  const VariantConfig& cfg = opts_.config;
  if (!m.started || m.shut) fail(Errc::ProtocolViolation, "round requires a completed setup");

  RoundOutcome out;
  out.round_id = ++m.round;
  const std::uint32_t rid = out.round_id;
  const auto io0 = io();
  const auto wall0 = Clock::now();
  std::chrono::nanoseconds& cpu = out.aggregator_compute;

  RoundState state(cfg.t);
  std::vector<Ciphertext> cts;

  // Returns when every listed party has answered or died, or at the deadline.
  const auto gather = [&](std::set<std::uint32_t>& waiting, const auto& on_frame) {
    const auto deadline = Clock::now() + opts_.timeout;
    while (!waiting.empty()) {
      auto ev = m.inbox.pop_until(deadline);
      if (!ev) return;
      Slot& s = *m.slots[ev->slot];
      const std::uint32_t p = s.party;
      if (!ev->frame) {
        s.alive = false;
        waiting.erase(p);
        continue;
      }
      if (ev->frame->round_id != rid || !waiting.count(p)) continue;  // stale or unsolicited
      on_frame(p, *ev->frame);
    }
  };

  try {
    state.advance(Phase::Dispatch);
    Query tee_query = request.query;
    if (cfg.uses_ot()) {
      if (request.query_id >= m.candidates.size())
        fail(Errc::ChoiceOutOfRange, "choice " + std::to_string(request.query_id) + " outside [0, " +
                                         std::to_string(m.candidates.size()) + ")");
      tee_query = m.candidates[request.query_id];
    }
    if (m.enclave) m.enclave->reset_round();

    std::set<std::uint32_t> waiting;
    for (std::uint32_t p : m.live_parties()) {
      Bytes body;
      MsgType type = MsgType::Query;
      if (cfg.party_mechs[p - 1] == Mechanism::Tee) {
        type = MsgType::EncQuery;
        ComputeSection timer(cpu);
        EnclavePublicKey key = *m.of_party(p).enclave_pk;
        if (opts_.faults.wrong_query_key.count(p)) m.rng->fill(key);
        body = pk_enc(tee_query.serialize(), key);
      } else if (cfg.uses_ot()) {
        body = wire::QueryMsg{wire::QueryMode::Universe, {}}.serialize();
      } else {
        body = wire::QueryMsg{wire::QueryMode::Plain, request.query}.serialize();
      }
      if (m.send_to(p, type, rid, body)) waiting.insert(p);
    }

    state.advance(Phase::Evaluate);
    std::map<std::uint32_t, OtReceiver> receivers;
    const auto accept = [&](std::uint32_t p, const Bytes& sub) {
      waiting.erase(p);
      try {
        ComputeSection timer(cpu);
        if (cfg.baseline) {
          (void)decode_subresult(sub);
        } else if (m.enclave) {
          if (m.enclave->submit_subresult(p, sub) == SubmitStatus::Duplicate) return;
        } else {
          cts.push_back(Ciphertext::parse(sub));
        }
      } catch (const Error&) {
        return;  // malformed or undecryptable: no contribution
      }
      out.payload_bytes = sub.size();
      state.received_subresults[p] = sub;
    };
    gather(waiting, [&](std::uint32_t p, const Frame& f) {
      switch (f.type) {
        case MsgType::Subresult:
          if (f.body.empty()) {
            waiting.erase(p);  // the party declined this round
          } else {
            accept(p, f.body);
          }
          break;
        case MsgType::OtAnnounce: {
          if (receivers.count(p)) break;
          try {
            std::optional<OtResponse> resp;
            {
              ComputeSection timer(cpu);
              auto [rx, r] = OtReceiver::round1(OtAnnouncement::parse(f.body), request.query_id, *m.rng);
              receivers.emplace(p, std::move(rx));
              resp = r;
            }
            if (!m.send_to(p, MsgType::OtResponse, rid, resp->serialize())) waiting.erase(p);
          } catch (const Error&) {
            waiting.erase(p);
          }
          break;
        }
        case MsgType::OtPayloads: {
          auto it = receivers.find(p);
          if (it == receivers.end()) break;
          Bytes chosen;
          try {
            ComputeSection timer(cpu);
            chosen = it->second.round2(OtPayloads::parse(f.body));
          } catch (const Error&) {
            waiting.erase(p);
            break;
          }
          accept(p, chosen);
          break;
        }
        default: break;
      }
    });

    state.advance(Phase::Aggregate);
    for (const auto& [p, sub] : state.received_subresults) out.contributors.push_back(p);
    const std::size_t got = state.received_subresults.size();
    std::int64_t value = 0;

    if (cfg.baseline) {
      if (got < cfg.t)
        fail(Errc::ThresholdNotMet, std::to_string(got) + " of " + std::to_string(cfg.t) + " subresults");
      Int128 acc = 0;
      for (const auto& [p, sub] : state.received_subresults) acc += decode_subresult(sub);
      if (acc > INT64_MAX || acc < INT64_MIN) fail(Errc::Overflow, "aggregate overflows int64");
      value = static_cast<std::int64_t>(acc);
    } else if (m.enclave) {
      ComputeSection timer(cpu);
      value = m.enclave->aggregate();
    } else {
      if (got < cfg.t)
        fail(Errc::ThresholdNotMet, std::to_string(got) + " of " + std::to_string(cfg.t) + " subresults");
      Ciphertext agg;
      {
        ComputeSection timer(cpu);
        agg = thfhe_eval(*m.public_key, cts);
      }
      const Bytes body = agg.serialize();
      std::set<std::uint32_t> partial_wait;
      for (std::uint32_t p : m.live_parties())
        if (m.send_to(p, MsgType::EncAggregate, rid, body)) partial_wait.insert(p);
      gather(partial_wait, [&](std::uint32_t p, const Frame& f) {
        if (f.type != MsgType::PartialDec) return;
        partial_wait.erase(p);
        if (f.body.empty()) return;
        try {
          ComputeSection timer(cpu);
          auto pd = PartialDecryption::parse(f.body);
          if (pd.party_index == p) state.received_partials.emplace(p, pd);
        } catch (const Error&) {
        }
      });
      if (state.received_partials.size() < cfg.t)
        fail(Errc::ThresholdNotMet, std::to_string(state.received_partials.size()) + " of " +
                                        std::to_string(cfg.t) + " partial decryptions");
      std::vector<PartialDecryption> chosen;
      for (const auto& [p, pd] : state.received_partials) {
        if (chosen.size() == cfg.t) break;
        chosen.push_back(pd);
      }
      ComputeSection timer(cpu);
      value = thfhe_combine(agg, chosen, m.public_key->params);
    }
    state.complete(value);
    out.aggregate = value;
  } catch (const Error& e) {
    out.error = e.code();
    out.error_message = e.what();
  }

  wire::FinalResult fr;
  if (out.aggregate) {
    fr.value = *out.aggregate;
  } else {
    fr.error = out.error;
  }
  const Bytes body = fr.serialize();
  for (std::uint32_t p : m.live_parties()) m.send_to(p, MsgType::FinalResult, rid, body);

  out.wall = Clock::now() - wall0;
  out.aggregator_io = io() - io0;
  return out;
}

}  // namespace secagg
