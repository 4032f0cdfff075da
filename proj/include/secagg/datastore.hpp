#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "secagg/bytes.hpp"

namespace secagg {

/// Default magnitude bound for dataset elements.
inline constexpr std::uint64_t kDefaultValueBound = std::uint64_t{1} << 20;

enum class QueryKind : std::uint8_t { Sum = 1, Count = 2, AvgPair = 3 };
enum class CompareOp : std::uint8_t { Eq = 1, Ne = 2, Lt = 3, Le = 4, Gt = 5, Ge = 6 };

struct Predicate {
  CompareOp op = CompareOp::Eq;
  std::int64_t constant = 0;

  bool matches(std::int64_t v) const;
  bool operator==(const Predicate&) const = default;
};

/// Predicate-filtered SUM or COUNT over the single value column. AvgPair is
/// never evaluated directly; the protocol layer splits it into SUM and COUNT.
struct Query {
  static constexpr std::size_t kWireBytes = 18;  // kind, op, constant, column, query_id

  QueryKind kind = QueryKind::Sum;
  std::optional<Predicate> predicate;
  std::uint32_t column = 0;
  std::uint32_t query_id = 0;

  Bytes serialize() const;
  static Query parse(ByteView b);
  std::string to_string() const;

  bool operator==(const Query&) const = default;
};

/// Parses "sum", "count", "avg", optionally followed by
/// "where value <op> <constant>" with op one of == != < <= > >=.
Query parse_query(std::string_view text);

struct Subresult {
  std::int64_t value = 0;
  std::uint32_t query_id = 0;
};

class Dataset {
 public:
  Dataset() = default;
  /// Raises BoundViolation if any |value| exceeds value_bound.
  Dataset(std::uint32_t party_id, std::vector<std::int64_t> values,
          std::uint64_t value_bound = kDefaultValueBound);

  std::uint32_t party_id() const { return party_id_; }
  std::span<const std::int64_t> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::uint64_t value_bound() const { return value_bound_; }
  /// Largest |subresult| any query can produce: rows * max(value_bound, 1).
  std::uint64_t subresult_bound() const {
    return std::max<std::uint64_t>(value_bound_, 1) * values_.size();
  }

 private:
  std::uint32_t party_id_ = 0;
  std::vector<std::int64_t> values_;
  std::uint64_t value_bound_ = kDefaultValueBound;
};

/// One signed decimal integer per line. Raises ParseError (with the line
/// number) or BoundViolation.
Dataset load_dataset(const std::filesystem::path& path, std::uint32_t party_id,
                     std::uint64_t value_bound = kDefaultValueBound);
void save_dataset(const std::filesystem::path& path, const Dataset& d);

/// `size` values uniform over [0, bound) from a seeded mt19937_64; the same
/// (seed, size, bound) always yields the same values.
Dataset generate_dataset(std::uint64_t seed, std::size_t size, std::uint64_t bound,
                         std::uint32_t party_id = 0);

/// Raises QueryMalformed (bad column, AvgPair) or Overflow.
Subresult eval_query(const Query& q, const Dataset& d);

/// Element j is eval_query(candidates[j], d). Raises EmptyCandidateSet.
std::vector<Subresult> eval_candidate_set(std::span<const Query> candidates, const Dataset& d);

/// k predicate variants of one SUM: candidate 0 is unfiltered, candidate j
/// keeps values >= j * ceil(value_bound / k).
std::vector<Query> candidate_universe(std::uint32_t k, std::uint64_t value_bound);

}  // namespace secagg
