#include "secagg/ot.hpp"

#include <sodium.h>

#include <algorithm>
#include <string_view>

#include "secagg/error.hpp"

namespace secagg {

namespace {

constexpr std::string_view kKdfTag = "secagg/ot/v1";
constexpr std::size_t kTagBytes = crypto_aead_chacha20poly1305_ietf_ABYTES;

std::array<std::uint8_t, 32> derive_key(const Point& a, const Point& b, const Point& shared,
                                        std::uint32_t index) {
  ByteWriter w;
  w.raw(as_bytes(kKdfTag)).raw(a.bytes()).raw(b.bytes()).raw(shared.bytes()).u32(index);
  std::array<std::uint8_t, 32> key{};
  const auto& in = w.bytes();
  crypto_generichash(key.data(), key.size(), in.data(), in.size(), nullptr, 0);
  return key;
}

Bytes seal(const std::array<std::uint8_t, 32>& key, ByteView plaintext) {
  // Each key encrypts exactly one message, so a fixed nonce is sound.
  const std::uint8_t nonce[crypto_aead_chacha20poly1305_ietf_NPUBBYTES] = {};
  Bytes out(plaintext.size() + kTagBytes);
  unsigned long long out_len = 0;
  crypto_aead_chacha20poly1305_ietf_encrypt(out.data(), &out_len, plaintext.data(),
                                            plaintext.size(), nullptr, 0, nullptr, nonce,
                                            key.data());
  out.resize(out_len);
  return out;
}

std::optional<Bytes> open(const std::array<std::uint8_t, 32>& key, ByteView ciphertext) {
  if (ciphertext.size() < kTagBytes + 4) return std::nullopt;
  const std::uint8_t nonce[crypto_aead_chacha20poly1305_ietf_NPUBBYTES] = {};
  Bytes padded(ciphertext.size() - kTagBytes);
  unsigned long long len = 0;
  if (crypto_aead_chacha20poly1305_ietf_decrypt(padded.data(), &len, nullptr, ciphertext.data(),
                                                ciphertext.size(), nullptr, 0, nonce,
                                                key.data()) != 0)
    return std::nullopt;
  ByteReader in(padded);
  std::uint32_t n = in.u32();
  if (n > in.remaining()) return std::nullopt;
  auto body = in.raw(n);
  return Bytes(body.begin(), body.end());
}

void expect_version(ByteReader& in) {
  if (in.u8() != kOtWireVersion) fail(Errc::ProtocolViolation, "unsupported OT message version");
}

Point parse_element(ByteReader& in) {
  auto p = Point::from_bytes(in.raw(kElementBytes));
  if (p.is_identity()) fail(Errc::MalformedGroupElement, "identity element in OT message");
  return p;
}

}  // namespace

Bytes OtAnnouncement::serialize() const {
  ByteWriter w;
  w.u8(kOtWireVersion).raw(a_point.bytes()).u32(k);
  return std::move(w).take();
}

OtAnnouncement OtAnnouncement::parse(ByteView b) {
  ByteReader in(b);
  expect_version(in);
  OtAnnouncement m;
  m.a_point = parse_element(in);
  m.k = in.u32();
  in.expect_done("OT announcement");
  return m;
}

Bytes OtResponse::serialize() const {
  ByteWriter w;
  w.u8(kOtWireVersion).raw(b_point.bytes());
  return std::move(w).take();
}

OtResponse OtResponse::parse(ByteView b) {
  ByteReader in(b);
  expect_version(in);
  OtResponse m;
  m.b_point = parse_element(in);
  in.expect_done("OT response");
  return m;
}

Bytes OtPayloads::serialize() const {
  ByteWriter w;
  w.u8(kOtWireVersion).u32(static_cast<std::uint32_t>(ciphertexts.size()));
  for (const auto& c : ciphertexts) w.blob(c);
  return std::move(w).take();
}

OtPayloads OtPayloads::parse(ByteView b) {
  ByteReader in(b);
  expect_version(in);
  OtPayloads m;
  std::uint32_t count = in.u32();
  if (count > in.remaining() / 4) fail(Errc::Truncated, "OT payload count exceeds message");
  m.ciphertexts.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto c = in.blob();
    m.ciphertexts.emplace_back(c.begin(), c.end());
  }
  in.expect_done("OT payloads");
  return m;
}

std::pair<OtSender, OtAnnouncement> OtSender::init(std::vector<Bytes> payloads, RandomSource& rng) {
  if (payloads.empty()) fail(Errc::EmptyPayloadSet, "oblivious transfer needs at least one payload");
  for (const auto& p : payloads)
    if (p.empty()) fail(Errc::EmptyPayloadSet, "oblivious transfer payloads must be non-empty");
  Scalar a;
  do {
    a = Scalar::random(rng);
  } while (a.is_zero());
  Point a_point = Point::base_mul(a);
  OtAnnouncement ann{a_point, static_cast<std::uint32_t>(payloads.size())};
  return {OtSender(a, a_point, std::move(payloads)), ann};
}

OtPayloads OtSender::respond(const OtResponse& response) && {
  // Re-validate: a response built in-process bypasses parse().
  const auto b_point = Point::from_bytes(response.b_point.bytes());
  if (b_point.is_identity()) fail(Errc::MalformedGroupElement, "identity element as OT response");

  std::size_t max_len = 0;
  for (const auto& p : payloads_) max_len = std::max(max_len, p.size());

  // (B * A^-j)^a = B^a - j * A^a, walked incrementally.
  const Point step = announcement_ * secret_;
  Point shared = b_point * secret_;
  OtPayloads out;
  out.ciphertexts.reserve(payloads_.size());
  Bytes padded(4 + max_len);
  for (std::uint32_t j = 0; j < payloads_.size(); ++j) {
    std::fill(padded.begin(), padded.end(), 0);
    const auto& p = payloads_[j];
    const auto len = static_cast<std::uint32_t>(p.size());
    for (int i = 0; i < 4; ++i) padded[i] = static_cast<std::uint8_t>(len >> (8 * i));
    std::copy(p.begin(), p.end(), padded.begin() + 4);
    auto key = derive_key(announcement_, b_point, shared, j);
    out.ciphertexts.push_back(seal(key, padded));
    sodium_memzero(key.data(), key.size());
    shared = shared - step;
  }
  sodium_memzero(padded.data(), padded.size());
  payloads_.clear();
  return out;
}

std::pair<OtReceiver, OtResponse> OtReceiver::round1(const OtAnnouncement& announcement,
                                                     std::uint32_t choice, RandomSource& rng) {
  if (choice >= announcement.k)
    fail(Errc::ChoiceOutOfRange, "choice " + std::to_string(choice) + " outside [0, " +
                                     std::to_string(announcement.k) + ")");
  Scalar b;
  do {
    b = Scalar::random(rng);
  } while (b.is_zero());
  OtResponse resp{announcement.a_point * Scalar::from_u64(choice) + Point::base_mul(b)};
  OtReceiver r;
  r.choice_ = choice;
  r.k_ = announcement.k;
  r.key_ = derive_key(announcement.a_point, resp.b_point, announcement.a_point * b, choice);
  return {std::move(r), resp};
}

std::optional<Bytes> OtReceiver::try_open(const OtPayloads& payloads, std::uint32_t index) const {
  if (index >= payloads.ciphertexts.size()) return std::nullopt;
  return open(key_, payloads.ciphertexts[index]);
}

Bytes OtReceiver::round2(const OtPayloads& payloads) const {
  if (payloads.ciphertexts.size() != k_)
    fail(Errc::LengthMismatch, "expected " + std::to_string(k_) + " OT ciphertexts, got " +
                                   std::to_string(payloads.ciphertexts.size()));
  auto out = try_open(payloads, choice_);
  if (!out) fail(Errc::AuthenticationFailure, "chosen OT ciphertext failed authentication");
  return std::move(*out);
}

}  // namespace secagg
