#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace secagg {

enum class Errc {
  // crypto-thfhe
  InvalidThreshold,
  BoundTooLarge,
  PlaintextOutOfRange,
  EmptyInput,
  ThresholdNotMet,
  DiscreteLogOutOfRange,
  DuplicatePartyIndex,
  InvalidPartyIndex,
  // crypto-ot
  EmptyPayloadSet,
  ChoiceOutOfRange,
  MalformedGroupElement,
  AuthenticationFailure,
  LengthMismatch,
  // tee-runtime
  DecryptionFailure,
  QueryMalformed,
  ThresholdNotReached,
  // datastore
  ParseError,
  BoundViolation,
  Overflow,
  EmptyCandidateSet,
  // protocol
  InvalidConfig,
  AttestationFailure,
  ProtocolViolation,
  // transport
  FrameTooLarge,
  Truncated,
  UnknownMsgType,
  ConnectionError,
  ChannelClosed,
  // bench
  InsufficientPoints,
  OracleMismatch,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace secagg
