#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "secagg/protocol.hpp"

namespace secagg {

struct FaultPlan {
  std::set<std::uint32_t> withhold_subresult;
  std::set<std::uint32_t> withhold_partial;
  std::set<std::uint32_t> tamper_party_attestation;
  AggregatorFaults aggregator;
};

struct SessionOptions {
  VariantConfig config;
  /// datasets[i] belongs to party i + 1.
  std::vector<Dataset> datasets;
  TransportKind transport = TransportKind::InProc;
  std::chrono::milliseconds timeout{30000};
  bool secure_channels = false;
  /// Deterministic keys and randomness; unset draws from the OS.
  std::optional<std::uint64_t> seed;
  std::uint64_t plaintext_bound = 0;
  FaultPlan faults;
  /// Shared simulated platform; created fresh when unset.
  std::shared_ptr<const Platform> platform;
  bool record_transcript = false;
};

/// Round outcome plus the parties' side of the cost.
struct RoundReport {
  RoundOutcome outcome;
  /// Aggregator compute plus, per party phase, the slowest party.
  std::chrono::nanoseconds compute{0};
};

/// One aggregator and n parties in this process, one thread per party,
/// connected over in-process channels or loopback TCP. Keys and
/// attestation persist across rounds.
class Session {
 public:
  /// Runs setup; raises its errors (AttestationFailure etc.).
  static std::unique_ptr<Session> start(SessionOptions options);
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  RoundReport run_round(const RoundRequest& request);

  const VariantConfig& config() const { return opts_.config; }
  Variant variant() const { return opts_.config.variant(); }
  AggregatorNode& aggregator() { return *aggregator_; }
  const PartyNode& party(std::uint32_t index) const { return *parties_.at(index - 1); }
  /// Candidate universe offered to CRYPTO parties (empty when unused).
  const std::vector<Query>& candidates() const { return aggregator_->candidates(); }

  /// Sum of eval_query over the given parties (all when empty) for the
  /// query a round with `request` evaluates.
  std::int64_t oracle(const RoundRequest& request, std::span<const std::uint32_t> parties = {}) const;
  Query effective_query(const RoundRequest& request) const;

  /// Aggregator-side frames recorded since start (record_transcript only).
  std::vector<TranscriptEntry> transcript() const;
  void clear_transcript();

 private:
  explicit Session(SessionOptions options) : opts_(std::move(options)) {}
  void stop();

  SessionOptions opts_;
  std::unique_ptr<AggregatorNode> aggregator_;
  std::vector<std::unique_ptr<PartyNode>> parties_;
  std::vector<std::thread> threads_;
  mutable std::mutex transcript_mu_;
  std::vector<TranscriptEntry> transcript_;
};

std::unique_ptr<Session> setup(SessionOptions options);

/// Single-round entry points. Each checks that the session runs the named
/// variant and raises the round's error on failure.
std::int64_t run_variant1(Session& s, const Query& q);
std::int64_t run_variant2(Session& s, const Query& q);
std::int64_t run_variant3(Session& s, std::uint32_t query_id);
std::int64_t run_variant4(Session& s, std::uint32_t query_id);
std::int64_t run_variant5(Session& s, const Query& q);
std::int64_t run_variant6(Session& s, const Query& q);
std::int64_t run_heterogeneous(Session& s, std::uint32_t query_id);
std::int64_t run_baseline(Session& s, const Query& q);

struct AverageResult {
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
};

/// AVG as a SUM round followed by a COUNT round with the same predicate.
/// Only for variants that take a plain query.
AverageResult run_average(Session& s, const Query& q);

}  // namespace secagg
