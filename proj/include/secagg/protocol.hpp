#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "secagg/datastore.hpp"
#include "secagg/error.hpp"
#include "secagg/ot.hpp"
#include "secagg/secure_channel.hpp"
#include "secagg/tee.hpp"
#include "secagg/thfhe.hpp"
#include "secagg/transport.hpp"
#include "secagg/variant.hpp"
#include "secagg/wire.hpp"

namespace secagg {

inline constexpr std::string_view kAggregatorCodeIdentity = "secagg/aggregator-enclave/1";
inline constexpr std::string_view kPartyCodeIdentity = "secagg/party-enclave/1";

// ------------------------------------------------------------ legality

enum class Phase : std::uint8_t { Setup, Dispatch, Evaluate, Aggregate, Done };

std::string_view phase_name(Phase p) noexcept;
Phase phase_of(MsgType t) noexcept;

/// Whether `t` may cross a party channel in direction `dir` (as seen at the
/// aggregator) for a party using `party_mech` under `config`.
bool is_legal(const VariantConfig& config, Mechanism party_mech, Direction dir, MsgType t);

struct TranscriptEntry {
  std::uint32_t party = 0;  // 1-based party index
  Direction dir = Direction::Sent;
  Frame frame;
};

/// Empty when every entry is legal and, per party and round, message ranks
/// strictly increase through the phases. Otherwise a description of the
/// first violation.
std::optional<std::string> check_transcript(const VariantConfig& config,
                                            std::span<const TranscriptEntry> entries);

/// Aggregator-side round bookkeeping. Phases only move forward; reaching
/// Done requires at least t accepted subresults.
class RoundState {
 public:
  explicit RoundState(std::uint32_t threshold) : t_(threshold) {}

  Phase phase() const { return phase_; }
  void advance(Phase next);
  void complete(std::int64_t aggregate);

  std::map<std::uint32_t, Bytes> received_subresults;
  std::map<std::uint32_t, PartialDecryption> received_partials;
  std::optional<std::int64_t> aggregate;

 private:
  std::uint32_t t_;
  Phase phase_ = Phase::Setup;
};

// ------------------------------------------------------------- metering

/// CPU time consumed by the calling thread.
std::chrono::nanoseconds thread_cpu_now();

/// Adds the calling thread's CPU time between construction and destruction
/// to `sink`.
class ComputeSection {
 public:
  explicit ComputeSection(std::chrono::nanoseconds& sink) : sink_(sink), start_(thread_cpu_now()) {}
  ~ComputeSection() { sink_ += thread_cpu_now() - start_; }
  ComputeSection(const ComputeSection&) = delete;
  ComputeSection& operator=(const ComputeSection&) = delete;

 private:
  std::chrono::nanoseconds& sink_;
  std::chrono::nanoseconds start_;
};

struct PartyCompute {
  std::chrono::nanoseconds evaluate{0};
  std::chrono::nanoseconds decrypt{0};
};

// --------------------------------------------------------------- faults

struct PartyFaults {
  bool withhold_subresult = false;  // silent during EVALUATE
  bool withhold_partial = false;    // silent during AGGREGATE
  bool tamper_attestation = false;  // corrupts its report signature
};

struct AggregatorFaults {
  std::set<std::uint32_t> wrong_query_key;  // query sealed to an unrelated key
  bool tamper_attestation = false;
};

// ---------------------------------------------------------------- party

struct PartyOptions {
  std::uint32_t index = 1;
  Mechanism mechanism = Mechanism::Crypto;
  Dataset data;
  /// Hosts this party's enclave and anchors attestation checks.
  std::shared_ptr<const Platform> platform;
  PartyFaults faults;
  bool secure_channel = false;
  std::optional<std::uint64_t> seed;
};

/// Party role. serve() runs the setup handshake and then answers rounds
/// until the aggregator closes the channel.
class PartyNode {
 public:
  PartyNode(PartyOptions options, ChannelPtr channel);
  ~PartyNode();

  void serve();
  /// Unblocks serve() from another thread.
  void stop();

  std::uint32_t index() const { return opts_.index; }
  /// CPU time spent in tagged sections during `round_id`.
  PartyCompute compute_for(std::uint32_t round_id) const;
  std::optional<wire::FinalResult> final_for(std::uint32_t round_id) const;
  /// Blocks until FINAL_RESULT for `round_id` arrived or serve() ended.
  bool wait_final(std::uint32_t round_id, std::chrono::milliseconds timeout) const;
  /// First error that ended serve(), if any.
  std::optional<std::string> failure() const;

 private:
  struct Impl;
  PartyOptions opts_;
  std::unique_ptr<Impl> impl_;
};

// ----------------------------------------------------------- aggregator

struct AggregatorOptions {
  VariantConfig config;
  std::shared_ptr<const Platform> platform;
  /// Per-phase wait for stragglers.
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds setup_timeout{60000};
  AggregatorFaults faults;
  bool secure_channels = false;
  std::optional<std::uint64_t> seed;
  /// Overrides the decode window derived from the parties' hellos.
  std::uint64_t plaintext_bound = 0;
  /// Universe offered to CRYPTO parties under a confidential query; built
  /// from `value_bound` when empty.
  std::vector<Query> candidates;
  std::uint64_t value_bound = kDefaultValueBound;
  /// Sees every plaintext frame by 1-based party index.
  std::function<void(const TranscriptEntry&)> observer;
};

struct RoundRequest {
  Query query;
  /// Candidate index under a confidential query with CRYPTO parties;
  /// the effective query is then candidates[query_id].
  std::uint32_t query_id = 0;
};

struct RoundOutcome {
  std::uint32_t round_id = 0;
  std::optional<std::int64_t> aggregate;
  std::optional<Errc> error;
  std::string error_message;
  /// Parties whose subresult was accepted, ascending.
  std::vector<std::uint32_t> contributors;
  std::chrono::nanoseconds wall{0};
  std::chrono::nanoseconds aggregator_compute{0};
  StatsSnapshot aggregator_io;
  std::size_t payload_bytes = 0;

  bool ok() const { return aggregate.has_value(); }
  /// The aggregate, or the round's error re-raised.
  std::int64_t value() const;
};

/// Aggregator role. Owns one channel per party; a reader thread per
/// channel feeds a single ordered inbox consumed by the calling thread.
class AggregatorNode {
 public:
  AggregatorNode(AggregatorOptions options, std::vector<ChannelPtr> channels);
  ~AggregatorNode();

  /// Hellos, key dealing, provisioning, attestation. Raises
  /// AttestationFailure, InvalidConfig, ProtocolViolation, ConnectionError.
  void setup();
  /// Errors during the round are captured in the outcome.
  RoundOutcome run_round(const RoundRequest& request);
  /// Closes every channel and joins the readers.
  void shutdown();

  const VariantConfig& config() const { return opts_.config; }
  const std::vector<Query>& candidates() const;
  bool has_thfhe_keys() const;
  bool has_enclave() const;
  std::optional<ThfheParams> thfhe_params() const;
  /// Parties whose enclaves passed attestation.
  std::size_t attested_parties() const;
  /// Aggregator-side traffic during setup().
  StatsSnapshot setup_io() const;
  StatsSnapshot io() const;

 private:
  struct Impl;
  AggregatorOptions opts_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace secagg
