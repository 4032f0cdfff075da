#include "secagg/tee.hpp"

#include <sodium.h>

#include <algorithm>

#include "secagg/error.hpp"

namespace secagg {

static_assert(crypto_box_SEALBYTES == kPkEncOverhead);
static_assert(crypto_box_PUBLICKEYBYTES == sizeof(EnclavePublicKey));
static_assert(crypto_sign_PUBLICKEYBYTES == sizeof(VerificationKey));
static_assert(crypto_sign_BYTES == sizeof(Signature));

Measurement measure(ByteView code_identity) {
  crypto_init();
  Measurement m{};
  crypto_hash_sha256(m.data(), code_identity.data(), code_identity.size());
  return m;
}

Platform::Platform(const std::array<std::uint8_t, 32>& seed) {
  crypto_init();
  crypto_sign_seed_keypair(verify_key_.data(), signing_key_.data(), seed.data());
}

Platform::~Platform() { sodium_memzero(signing_key_.data(), signing_key_.size()); }

std::shared_ptr<const Platform> Platform::create(RandomSource& rng) {
  std::array<std::uint8_t, 32> seed{};
  rng.fill(seed);
  std::shared_ptr<const Platform> p(new Platform(seed));
  sodium_memzero(seed.data(), seed.size());
  return p;
}

std::shared_ptr<const Platform> Platform::from_seed(std::uint64_t seed) {
  crypto_init();
  std::uint8_t in[8];
  for (int i = 0; i < 8; ++i) in[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  std::array<std::uint8_t, 32> key_seed{};
  constexpr std::string_view kTag = "secagg/platform-root";
  crypto_generichash(key_seed.data(), key_seed.size(), in, sizeof in,
                     reinterpret_cast<const unsigned char*>(kTag.data()), kTag.size());
  return std::shared_ptr<const Platform>(new Platform(key_seed));
}

Signature Platform::sign(ByteView message) const {
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), signing_key_.data());
  return sig;
}

Bytes AttestationReport::serialize() const {
  ByteWriter w(kBytes);
  w.raw(measurement).raw(enclave_public_key).raw(signature);
  return std::move(w).take();
}

AttestationReport AttestationReport::parse(ByteView b) {
  if (b.size() != kBytes) fail(Errc::LengthMismatch, "attestation report must be 128 bytes");
  ByteReader in(b);
  AttestationReport r;
  r.measurement = in.fixed<32>();
  r.enclave_public_key = in.fixed<32>();
  r.signature = in.fixed<64>();
  return r;
}

bool AttestationReport::verify(const VerificationKey& root) const {
  std::array<std::uint8_t, 64> signed_part{};
  std::copy(measurement.begin(), measurement.end(), signed_part.begin());
  std::copy(enclave_public_key.begin(), enclave_public_key.end(), signed_part.begin() + 32);
  return crypto_sign_verify_detached(signature.data(), signed_part.data(), signed_part.size(),
                                     root.data()) == 0;
}

bool verify_attestation(const AttestationReport& report, const VerificationKey& root,
                        const Measurement& expected) {
  return report.verify(root) && sodium_memcmp(report.measurement.data(), expected.data(),
                                               expected.size()) == 0;
}

Bytes pk_enc(ByteView plaintext, const EnclavePublicKey& pk) {
  crypto_init();
  Bytes out(plaintext.size() + crypto_box_SEALBYTES);
  crypto_box_seal(out.data(), plaintext.data(), plaintext.size(), pk.data());
  return out;
}

Bytes encode_subresult(std::int64_t v) {
  ByteWriter w(8);
  w.i64(v);
  return std::move(w).take();
}

std::int64_t decode_subresult(ByteView b) {
  if (b.size() != 8) fail(Errc::LengthMismatch, "subresult plaintext must be 8 bytes");
  ByteReader in(b);
  return in.i64();
}

struct Enclave::State {
  std::shared_ptr<const Platform> platform;
  Measurement measurement{};
  EnclavePublicKey public_key{};
  std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> secret_key{};
  std::uint32_t threshold = 1;

  mutable std::mutex mu;
  std::map<std::uint32_t, std::int64_t> buffer;

  ~State() {
    sodium_memzero(secret_key.data(), secret_key.size());
    for (auto& [id, v] : buffer) sodium_memzero(&v, sizeof v);
  }
};

void Enclave::SecretBuffer::wipe() {
  if (!data.empty()) sodium_memzero(data.data(), data.size());
  data.clear();
}

Enclave::Enclave(std::unique_ptr<State> state) : state_(std::move(state)) {}
Enclave::Enclave(Enclave&&) noexcept = default;
Enclave& Enclave::operator=(Enclave&&) noexcept = default;
Enclave::~Enclave() = default;

Enclave Enclave::create(std::shared_ptr<const Platform> platform, ByteView code_identity,
                        std::uint32_t threshold, RandomSource& rng) {
  if (threshold < 1) fail(Errc::InvalidThreshold, "enclave threshold must be at least 1");
  if (!platform) fail(Errc::InvalidConfig, "enclave needs a platform");
  auto s = std::make_unique<State>();
  s->platform = std::move(platform);
  s->measurement = measure(code_identity);
  s->threshold = threshold;
  std::array<std::uint8_t, crypto_box_SEEDBYTES> seed{};
  rng.fill(seed);
  crypto_box_seed_keypair(s->public_key.data(), s->secret_key.data(), seed.data());
  sodium_memzero(seed.data(), seed.size());
  return Enclave(std::move(s));
}

const Measurement& Enclave::measurement() const { return state_->measurement; }
const EnclavePublicKey& Enclave::public_key() const { return state_->public_key; }
std::uint32_t Enclave::threshold() const { return state_->threshold; }

AttestationReport Enclave::attest() const {
  AttestationReport r;
  r.measurement = state_->measurement;
  r.enclave_public_key = state_->public_key;
  std::array<std::uint8_t, 64> signed_part{};
  std::copy(r.measurement.begin(), r.measurement.end(), signed_part.begin());
  std::copy(r.enclave_public_key.begin(), r.enclave_public_key.end(), signed_part.begin() + 32);
  r.signature = state_->platform->sign(signed_part);
  return r;
}

Enclave::SecretBuffer Enclave::sk_dec(ByteView ciphertext) const {
  if (ciphertext.size() < crypto_box_SEALBYTES)
    fail(Errc::DecryptionFailure, "ciphertext shorter than sealed-box overhead");
  SecretBuffer out;
  out.data.resize(ciphertext.size() - crypto_box_SEALBYTES);
  if (crypto_box_seal_open(out.data.data(), ciphertext.data(), ciphertext.size(),
                           state_->public_key.data(), state_->secret_key.data()) != 0) {
    out.wipe();
    fail(Errc::DecryptionFailure, "ciphertext does not open under this enclave's key");
  }
  return out;
}

Subresult Enclave::eval(const Query& q, const Dataset& data) const { return eval_query(q, data); }

Bytes Enclave::evaluate_confidential(ByteView encrypted_query, const Dataset& data,
                                     const std::function<Bytes(std::int64_t)>& seal_inside) const {
  return with_plaintext(encrypted_query, [&](ByteView plain) {
    const Query q = Query::parse(plain);
    std::int64_t r = eval(q, data).value;
    Bytes sealed = seal_inside(r);
    sodium_memzero(&r, sizeof r);
    return sealed;
  });
}

SubmitStatus Enclave::submit_subresult(std::uint32_t party_id, ByteView ciphertext) {
  std::int64_t v = with_plaintext(ciphertext, [](ByteView plain) {
    if (plain.size() != 8) fail(Errc::DecryptionFailure, "subresult plaintext has wrong length");
    return decode_subresult(plain);
  });
  std::lock_guard lock(state_->mu);
  auto [it, inserted] = state_->buffer.emplace(party_id, v);
  sodium_memzero(&v, sizeof v);
  return inserted ? SubmitStatus::Accepted : SubmitStatus::Duplicate;
}

std::int64_t Enclave::aggregate() {
  std::lock_guard lock(state_->mu);
  if (state_->buffer.size() < state_->threshold)
    fail(Errc::ThresholdNotReached, "Threshold not reached");
  Int128 acc = 0;
  for (const auto& [id, v] : state_->buffer) acc += v;
  if (acc > INT64_MAX || acc < INT64_MIN) fail(Errc::Overflow, "aggregate overflows int64");
  for (auto& [id, v] : state_->buffer) sodium_memzero(&v, sizeof v);
  state_->buffer.clear();
  return static_cast<std::int64_t>(acc);
}

std::size_t Enclave::buffered_count() const {
  std::lock_guard lock(state_->mu);
  return state_->buffer.size();
}

void Enclave::reset_round() {
  std::lock_guard lock(state_->mu);
  for (auto& [id, v] : state_->buffer) sodium_memzero(&v, sizeof v);
  state_->buffer.clear();
}

}  // namespace secagg
