#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>

#include "secagg/group.hpp"

namespace secagg {

/// Largest |exponent| the solver will accept. The baby-step table holds
/// max(sqrt(2 * max_abs), 2^16) entries, capped at the window.
inline constexpr std::uint64_t kMaxDecodeMagnitude = std::uint64_t{1} << 40;

/// Baby-step giant-step over the signed window [-max_abs, max_abs].
class DiscreteLogSolver {
 public:
  explicit DiscreteLogSolver(std::uint64_t max_abs);

  /// Shared solver for a window; baby-step tables are cached process-wide.
  static std::shared_ptr<const DiscreteLogSolver> for_range(std::uint64_t max_abs);

  /// Returns m with g^m == target, or nullopt if m is outside the window.
  std::optional<std::int64_t> solve(const Point& target) const;

  std::uint64_t max_abs() const { return max_abs_; }
  std::uint64_t baby_steps() const { return steps_; }

 private:
  struct Table {
    explicit Table(std::uint64_t steps);
    std::unordered_map<std::uint64_t, std::uint32_t> index;  // prefix64 -> j
    Point giant;                                             // g^steps
  };

  static std::shared_ptr<const Table> table_for(std::uint64_t steps);

  std::uint64_t max_abs_;
  std::uint64_t steps_;
  std::shared_ptr<const Table> table_;
  Point shift_;  // g^max_abs
};

}  // namespace secagg
