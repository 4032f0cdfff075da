#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "secagg/bytes.hpp"
#include "secagg/group.hpp"
#include "secagg/random.hpp"

namespace secagg {

/// 1-of-k oblivious transfer from a single Diffie-Hellman exchange.
///
///   sender    A = g^a                       -> announcement (A, k)
///   receiver  B = A^c * g^b                 -> response
///   sender    key_j = H(A, B, (B * A^-j)^a, j), e_j = AEAD(key_j, pad(x_j))
///   receiver  key   = H(A, B, A^b, c) opens e_c only
///
/// Indices are 0-based. Payloads are padded to the longest one, so the
/// transcript reveals only k and the maximum payload length.
inline constexpr std::uint8_t kOtWireVersion = 1;

struct OtAnnouncement {
  Point a_point;
  std::uint32_t k = 0;

  Bytes serialize() const;
  static OtAnnouncement parse(ByteView b);
};

struct OtResponse {
  Point b_point;

  Bytes serialize() const;
  static OtResponse parse(ByteView b);
};

struct OtPayloads {
  std::vector<Bytes> ciphertexts;

  Bytes serialize() const;
  static OtPayloads parse(ByteView b);
};

class OtSender {
 public:
  /// Raises EmptyPayloadSet for k == 0 or an empty payload.
  static std::pair<OtSender, OtAnnouncement> init(std::vector<Bytes> payloads,
                                                  RandomSource& rng = system_random());

  /// Single use. Raises MalformedGroupElement if B is not a valid element.
  OtPayloads respond(const OtResponse& response) &&;

  std::uint32_t k() const { return static_cast<std::uint32_t>(payloads_.size()); }

 private:
  OtSender(Scalar a, Point a_point, std::vector<Bytes> payloads)
      : secret_(a), announcement_(a_point), payloads_(std::move(payloads)) {}

  Scalar secret_;
  Point announcement_;
  std::vector<Bytes> payloads_;
};

class OtReceiver {
 public:
  /// Raises ChoiceOutOfRange unless choice < announcement.k.
  static std::pair<OtReceiver, OtResponse> round1(const OtAnnouncement& announcement,
                                                  std::uint32_t choice,
                                                  RandomSource& rng = system_random());

  /// Raises LengthMismatch if the payload count differs from k and
  /// AuthenticationFailure if the chosen entry does not open.
  Bytes round2(const OtPayloads& payloads) const;

  /// Attempts entry `index` with the receiver's own key. Only the chosen
  /// index opens; used to check sender privacy.
  std::optional<Bytes> try_open(const OtPayloads& payloads, std::uint32_t index) const;

  std::uint32_t choice() const { return choice_; }
  std::uint32_t k() const { return k_; }

 private:
  OtReceiver() = default;

  std::uint32_t choice_ = 0;
  std::uint32_t k_ = 0;
  std::array<std::uint8_t, 32> key_{};
};

}  // namespace secagg
