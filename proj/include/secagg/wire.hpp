#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "secagg/bytes.hpp"
#include "secagg/datastore.hpp"
#include "secagg/error.hpp"
#include "secagg/tee.hpp"
#include "secagg/thfhe.hpp"
#include "secagg/variant.hpp"

// Message bodies. Layouts are listed in docs/wire.md; all integers inside
// bodies are little-endian.

namespace secagg::wire {

enum class SetupKind : std::uint8_t { Hello = 1, Provision = 2, Ack = 3 };

SetupKind peek_setup_kind(ByteView body);

struct Hello {
  std::uint32_t party_index = 0;
  Mechanism mechanism = Mechanism::Crypto;
  /// Largest |subresult| this party can produce; sizes the decode window.
  std::uint64_t subresult_bound = 0;

  Bytes serialize() const;
  static Hello parse(ByteView b);
};

struct Provision {
  std::uint32_t party_index = 0;
  std::uint32_t n = 0;
  std::uint32_t t = 0;
  Mechanism party_mechanism = Mechanism::Crypto;
  Mechanism aggregator_mechanism = Mechanism::Crypto;
  QueryConf query_conf = QueryConf::Public;
  bool baseline = false;
  std::optional<JointPublicKey> public_key;
  std::optional<SecretKeyShare> share;
  std::vector<Query> candidates;

  Bytes serialize() const;
  static Provision parse(ByteView b);
};

Bytes ack();

struct AttestRequest {
  std::optional<AttestationReport> aggregator_report;

  Bytes serialize() const;
  static AttestRequest parse(ByteView b);
};

struct AttestResponse {
  /// False when the party rejected the aggregator's report.
  bool accepted = true;
  std::optional<AttestationReport> party_report;

  Bytes serialize() const;
  static AttestResponse parse(ByteView b);
};

enum class QueryMode : std::uint8_t { Plain = 0, Universe = 1 };

struct QueryMsg {
  QueryMode mode = QueryMode::Plain;
  Query query;  // Plain only

  Bytes serialize() const;
  static QueryMsg parse(ByteView b);
};

/// FINAL_RESULT: status 0 with the aggregate, or 1 + error code.
struct FinalResult {
  std::optional<Errc> error;
  std::int64_t value = 0;

  Bytes serialize() const;
  static FinalResult parse(ByteView b);
};

}  // namespace secagg::wire
