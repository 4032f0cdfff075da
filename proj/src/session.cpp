#include "secagg/session.hpp"

#include <algorithm>

namespace secagg {

std::unique_ptr<Session> Session::start(SessionOptions options) {
  options.config.validate();
  const std::uint32_t n = options.config.n();
  if (options.datasets.size() != n) fail(Errc::InvalidConfig, "need one dataset per party");
  if (options.config.uses_tee() && !options.platform) options.platform = Platform::create();

  std::unique_ptr<Session> s(new Session(std::move(options)));
  SessionOptions& o = s->opts_;

  std::vector<ChannelPtr> agg_side;
  std::vector<ChannelPtr> party_side;
  if (o.transport == TransportKind::InProc) {
    for (std::uint32_t i = 0; i < n; ++i) {
      auto [a, p] = inproc_channel_pair();
      agg_side.push_back(std::move(a));
      party_side.push_back(std::move(p));
    }
  } else {
    TcpListener listener(0);
    for (std::uint32_t i = 0; i < n; ++i) party_side.push_back(tcp_connect("127.0.0.1", listener.port()));
    for (std::uint32_t i = 0; i < n; ++i) agg_side.push_back(listener.accept(std::chrono::seconds(10)));
  }

  std::uint64_t value_bound = 1;
  for (const Dataset& d : o.datasets) value_bound = std::max(value_bound, d.value_bound());

  AggregatorOptions ao;
  ao.config = o.config;
  ao.platform = o.platform;
  ao.timeout = o.timeout;
  ao.faults = o.faults.aggregator;
  ao.secure_channels = o.secure_channels;
  if (o.seed) ao.seed = *o.seed;
  ao.plaintext_bound = o.plaintext_bound;
  ao.value_bound = value_bound;
  if (o.record_transcript) {
    Session* self = s.get();
    ao.observer = [self](const TranscriptEntry& e) {
      std::lock_guard lock(self->transcript_mu_);
      self->transcript_.push_back(e);
    };
  }
  s->aggregator_ = std::make_unique<AggregatorNode>(std::move(ao), std::move(agg_side));

  for (std::uint32_t i = 0; i < n; ++i) {
    PartyOptions po;
    po.index = i + 1;
    po.mechanism = o.config.party_mechs[i];
    po.data = o.datasets[i];
    po.platform = o.platform;
    po.faults.withhold_subresult = o.faults.withhold_subresult.count(i + 1) > 0;
    po.faults.withhold_partial = o.faults.withhold_partial.count(i + 1) > 0;
    po.faults.tamper_attestation = o.faults.tamper_party_attestation.count(i + 1) > 0;
    po.secure_channel = o.secure_channels;
    if (o.seed) po.seed = *o.seed * 1000003u + (i + 1);
    s->parties_.push_back(std::make_unique<PartyNode>(std::move(po), std::move(party_side[i])));
  }
  for (auto& p : s->parties_) s->threads_.emplace_back([node = p.get()] { node->serve(); });

  try {
    s->aggregator_->setup();
  } catch (...) {
    s->stop();
    throw;
  }
  return s;
}

Session::~Session() { stop(); }

void Session::stop() {
  if (aggregator_) aggregator_->shutdown();
  for (auto& p : parties_) p->stop();
  for (auto& t : threads_)
    if (t.joinable()) t.join();
  threads_.clear();
}

RoundReport Session::run_round(const RoundRequest& request) {
  RoundReport r;
  r.outcome = aggregator_->run_round(request);
  // Party bookkeeping for the round is complete once its final arrives.
  for (const auto& p : parties_) (void)p->wait_final(r.outcome.round_id, opts_.timeout);
  std::chrono::nanoseconds eval{0};
  std::chrono::nanoseconds dec{0};
  for (const auto& p : parties_) {
    const PartyCompute c = p->compute_for(r.outcome.round_id);
    eval = std::max(eval, c.evaluate);
    dec = std::max(dec, c.decrypt);
  }
  r.compute = r.outcome.aggregator_compute + eval + dec;
  return r;
}

Query Session::effective_query(const RoundRequest& request) const {
  if (opts_.config.uses_ot()) return aggregator_->candidates().at(request.query_id);
  return request.query;
}

std::int64_t Session::oracle(const RoundRequest& request, std::span<const std::uint32_t> parties) const {
  const Query q = effective_query(request);
  std::int64_t sum = 0;
  if (parties.empty()) {
    for (const Dataset& d : opts_.datasets) sum += eval_query(q, d).value;
  } else {
    for (std::uint32_t p : parties) sum += eval_query(q, opts_.datasets.at(p - 1)).value;
  }
  return sum;
}

std::vector<TranscriptEntry> Session::transcript() const {
  std::lock_guard lock(transcript_mu_);
  return transcript_;
}

void Session::clear_transcript() {
  std::lock_guard lock(transcript_mu_);
  transcript_.clear();
}

std::unique_ptr<Session> setup(SessionOptions options) { return Session::start(std::move(options)); }

namespace {

void require_variant(const Session& s, Variant v) {
  if (s.variant() != v)
    fail(Errc::InvalidConfig, "session runs " + std::string(variant_name(s.variant())) + ", not " +
                                  std::string(variant_name(v)));
}

std::int64_t run_plain(Session& s, Variant v, const Query& q) {
  require_variant(s, v);
  return s.run_round(RoundRequest{q, 0}).outcome.value();
}

std::int64_t run_choice(Session& s, Variant v, std::uint32_t query_id) {
  require_variant(s, v);
  return s.run_round(RoundRequest{Query{}, query_id}).outcome.value();
}

}  // namespace

std::int64_t run_variant1(Session& s, const Query& q) { return run_plain(s, Variant::V1, q); }
std::int64_t run_variant2(Session& s, const Query& q) { return run_plain(s, Variant::V2, q); }
std::int64_t run_variant3(Session& s, std::uint32_t id) { return run_choice(s, Variant::V3, id); }
std::int64_t run_variant4(Session& s, std::uint32_t id) { return run_choice(s, Variant::V4, id); }
std::int64_t run_variant5(Session& s, const Query& q) { return run_plain(s, Variant::V5, q); }
std::int64_t run_variant6(Session& s, const Query& q) { return run_plain(s, Variant::V6, q); }
std::int64_t run_heterogeneous(Session& s, std::uint32_t id) {
  return run_choice(s, Variant::Heterogeneous, id);
}
std::int64_t run_baseline(Session& s, const Query& q) { return run_plain(s, Variant::Baseline, q); }

AverageResult run_average(Session& s, const Query& q) {
  if (s.config().uses_ot())
    fail(Errc::QueryMalformed, "AVG needs a plain query; candidate universes carry SUM only");
  Query sum = q;
  sum.kind = QueryKind::Sum;
  Query count = q;
  count.kind = QueryKind::Count;
  AverageResult r;
  r.numerator = s.run_round(RoundRequest{sum, 0}).outcome.value();
  r.denominator = s.run_round(RoundRequest{count, 0}).outcome.value();
  return r;
}

}  // namespace secagg
