#include "secagg/random.hpp"

#include <sodium.h>

#include <mutex>
#include <stdexcept>

namespace secagg {

void crypto_init() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  });
}

std::uint64_t RandomSource::next_u64() {
  std::uint8_t buf[8];
  fill(buf);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

std::uint64_t RandomSource::uniform(std::uint64_t bound) {
  // Rejection sampling keeps the distribution exact.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

SystemRandom::SystemRandom() { crypto_init(); }

void SystemRandom::fill(std::span<std::uint8_t> out) {
  randombytes_buf(out.data(), out.size());
}

DeterministicRandom::DeterministicRandom(std::uint64_t seed) {
  crypto_init();
  std::uint8_t in[8];
  for (int i = 0; i < 8; ++i) in[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  crypto_generichash(key_, sizeof key_, in, sizeof in, nullptr, 0);
}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
  std::uint8_t block_key[randombytes_SEEDBYTES];
  std::uint8_t ctr[8];
  for (int i = 0; i < 8; ++i) ctr[i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
  ++counter_;
  crypto_generichash(block_key, sizeof block_key, ctr, sizeof ctr, key_, sizeof key_);
  randombytes_buf_deterministic(out.data(), out.size(), block_key);
  sodium_memzero(block_key, sizeof block_key);
}

RandomSource& system_random() {
  static SystemRandom instance;
  return instance;
}

}  // namespace secagg
