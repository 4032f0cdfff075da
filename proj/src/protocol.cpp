#include "secagg/protocol.hpp"

#include <ctime>

namespace secagg {

std::string_view phase_name(Phase p) noexcept {
  switch (p) {
    case Phase::Setup: return "SETUP";
    case Phase::Dispatch: return "DISPATCH";
    case Phase::Evaluate: return "EVALUATE";
    case Phase::Aggregate: return "AGGREGATE";
    case Phase::Done: return "DONE";
  }
  return "?";
}

Phase phase_of(MsgType t) noexcept {
  switch (t) {
    case MsgType::Setup:
    case MsgType::AttestReq:
    case MsgType::AttestReport: return Phase::Setup;
    case MsgType::Query:
    case MsgType::EncQuery: return Phase::Dispatch;
    case MsgType::Subresult:
    case MsgType::OtAnnounce:
    case MsgType::OtResponse:
    case MsgType::OtPayloads: return Phase::Evaluate;
    case MsgType::EncAggregate:
    case MsgType::PartialDec: return Phase::Aggregate;
    case MsgType::FinalResult: return Phase::Done;
  }
  return Phase::Setup;
}

namespace {

// Position of a round message within one party's exchange; strictly
// increasing along a legal transcript.
int round_rank(MsgType t) {
  switch (t) {
    case MsgType::Query:
    case MsgType::EncQuery: return 0;
    case MsgType::OtAnnounce: return 1;
    case MsgType::OtResponse: return 2;
    case MsgType::OtPayloads:
    case MsgType::Subresult: return 3;
    case MsgType::EncAggregate: return 4;
    case MsgType::PartialDec: return 5;
    case MsgType::FinalResult: return 6;
    default: return -1;
  }
}

}  // namespace

bool is_legal(const VariantConfig& c, Mechanism party_mech, Direction dir, MsgType t) {
  const bool down = dir == Direction::Sent;  // aggregator -> party
  const bool ot_party = !c.baseline && party_mech == Mechanism::Crypto &&
                        c.query_conf == QueryConf::Confidential;
  const bool attests = c.uses_tee() && (party_mech == Mechanism::Tee || c.aggregator_mech == Mechanism::Tee);
  switch (t) {
    case MsgType::Setup: return true;
    case MsgType::AttestReq: return down && attests;
    case MsgType::AttestReport: return !down && attests;
    case MsgType::Query: return down && party_mech == Mechanism::Crypto;
    case MsgType::EncQuery: return down && party_mech == Mechanism::Tee;
    case MsgType::Subresult: return !down;
    case MsgType::OtAnnounce:
    case MsgType::OtPayloads: return !down && ot_party;
    case MsgType::OtResponse: return down && ot_party;
    case MsgType::EncAggregate: return down && c.needs_thfhe();
    case MsgType::PartialDec: return !down && c.needs_thfhe();
    case MsgType::FinalResult: return down;
  }
  return false;
}

std::optional<std::string> check_transcript(const VariantConfig& c,
                                            std::span<const TranscriptEntry> entries) {
  struct Cursor {
    std::uint32_t round = 0;
    int rank = -1;
    bool saw_round = false;
  };
  std::map<std::uint32_t, Cursor> cursors;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const TranscriptEntry& e = entries[i];
    const auto where = [&] {
      return "entry " + std::to_string(i) + " (party " + std::to_string(e.party) + ", " +
             std::string(msg_type_name(e.frame.type)) + ", round " +
             std::to_string(e.frame.round_id) + ")";
    };
    if (e.party < 1 || e.party > c.n()) return where() + ": unknown party";
    const Mechanism mech = c.party_mechs[e.party - 1];
    if (!is_legal(c, mech, e.dir, e.frame.type)) return where() + ": illegal for this variant";
    if (e.frame.type == MsgType::Subresult && c.uses_ot() && mech == Mechanism::Crypto &&
        !e.frame.body.empty())
      return where() + ": OT party sent a plain subresult";
    Cursor& cur = cursors[e.party];
    if (phase_of(e.frame.type) == Phase::Setup) {
      if (cur.saw_round || e.frame.round_id != 0) return where() + ": setup message after rounds began";
      continue;
    }
    const int rank = round_rank(e.frame.type);
    if (!cur.saw_round || e.frame.round_id > cur.round) {
      cur = {e.frame.round_id, rank, true};
      continue;
    }
    if (e.frame.round_id < cur.round) return where() + ": round id went backwards";
    if (rank <= cur.rank) return where() + ": out of phase order";
    cur.rank = rank;
  }
  return std::nullopt;
}

void RoundState::advance(Phase next) {
  if (static_cast<int>(next) <= static_cast<int>(phase_))
    fail(Errc::ProtocolViolation, "round phase cannot move from " + std::string(phase_name(phase_)) +
                                      " to " + std::string(phase_name(next)));
  if (next == Phase::Done && !aggregate)
    fail(Errc::ProtocolViolation, "DONE requires a released aggregate");
  phase_ = next;
}

void RoundState::complete(std::int64_t value) {
  if (received_subresults.size() < t_)
    fail(Errc::ProtocolViolation, "aggregate released below threshold");
  aggregate = value;
  advance(Phase::Done);
}

std::chrono::nanoseconds thread_cpu_now() {
  timespec ts{};
  ::clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return std::chrono::seconds(ts.tv_sec) + std::chrono::nanoseconds(ts.tv_nsec);
}

std::int64_t RoundOutcome::value() const {
  if (aggregate) return *aggregate;
  throw Error(error.value_or(Errc::ProtocolViolation), error_message);
}

}  // namespace secagg
