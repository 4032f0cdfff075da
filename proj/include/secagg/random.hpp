#pragma once

#include <cstdint>
#include <span>

namespace secagg {

/// Idempotent libsodium initialisation; every entry point that draws
/// randomness goes through a RandomSource, which calls this.
void crypto_init();

class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64();
  /// Uniform in [0, bound); bound must be non-zero.
  std::uint64_t uniform(std::uint64_t bound);
};

/// OS randomness. Stateless and safe to share across threads.
class SystemRandom final : public RandomSource {
 public:
  SystemRandom();
  void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible ChaCha20-based stream for tests and known-answer vectors.
/// Not thread-safe; give each thread its own instance.
class DeterministicRandom final : public RandomSource {
 public:
  explicit DeterministicRandom(std::uint64_t seed);
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::uint8_t key_[32];
  std::uint64_t counter_ = 0;
};

RandomSource& system_random();

}  // namespace secagg
