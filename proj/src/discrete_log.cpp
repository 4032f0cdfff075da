#include "secagg/discrete_log.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "secagg/error.hpp"

namespace secagg {

namespace {

std::uint64_t ceil_sqrt(std::uint64_t v) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(v)));
  while (r * r < v) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= v) --r;
  return r;
}

// Floor on the baby-step count. Each group step costs an encoding round trip,
// so a larger shared table cuts the per-solve giant steps.
constexpr std::uint64_t kMinBabySteps = std::uint64_t{1} << 16;

}  // namespace

DiscreteLogSolver::Table::Table(std::uint64_t steps) {
  index.reserve(steps);
  Point p = Point::identity();
  const Point& g = Point::generator();
  for (std::uint64_t j = 0; j < steps; ++j) {
    index.emplace(p.prefix64(), static_cast<std::uint32_t>(j));
    p = p + g;
  }
  giant = p;
}

std::shared_ptr<const DiscreteLogSolver::Table> DiscreteLogSolver::table_for(std::uint64_t steps) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::shared_ptr<const Table>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[steps];
  if (!slot) slot = std::make_shared<const Table>(steps);
  return slot;
}

DiscreteLogSolver::DiscreteLogSolver(std::uint64_t max_abs) : max_abs_(max_abs) {
  if (max_abs > kMaxDecodeMagnitude)
    fail(Errc::BoundTooLarge, "decode window exceeds the discrete-log solver limit");
  const std::uint64_t window = 2 * max_abs + 1;
  steps_ = std::min(window, std::max(ceil_sqrt(window), kMinBabySteps));
  table_ = table_for(steps_);
  shift_ = Point::base_mul(Scalar::from_u64(max_abs));
}

std::shared_ptr<const DiscreteLogSolver> DiscreteLogSolver::for_range(std::uint64_t max_abs) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::shared_ptr<const DiscreteLogSolver>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(max_abs);
    if (it != cache.end()) return it->second;
  }
  // Built outside the lock; a racing duplicate is harmless.
  auto solver = std::make_shared<const DiscreteLogSolver>(max_abs);
  std::lock_guard lock(mu);
  return cache.emplace(max_abs, std::move(solver)).first->second;
}

std::optional<std::int64_t> DiscreteLogSolver::solve(const Point& target) const {
  const std::uint64_t window = 2 * max_abs_ + 1;
  const std::uint64_t giants = (window + steps_ - 1) / steps_;
  // Shift into [0, 2*max_abs] so every exponent is non-negative.
  Point p = target + shift_;
  for (std::uint64_t i = 0; i < giants; ++i) {
    auto it = table_->index.find(p.prefix64());
    if (it != table_->index.end()) {
      std::uint64_t e = i * steps_ + it->second;
      if (e < window) {
        auto m = static_cast<std::int64_t>(e) - static_cast<std::int64_t>(max_abs_);
        // Prefix match only; confirm before returning.
        if (Point::from_int(m) == target) return m;
      }
    }
    p = p - table_->giant;
  }
  return std::nullopt;
}

}  // namespace secagg
