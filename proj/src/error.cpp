#include "secagg/error.hpp"

namespace secagg {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::BoundTooLarge: return "BoundTooLarge";
    case Errc::PlaintextOutOfRange: return "PlaintextOutOfRange";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ThresholdNotMet: return "ThresholdNotMet";
    case Errc::DiscreteLogOutOfRange: return "DiscreteLogOutOfRange";
    case Errc::DuplicatePartyIndex: return "DuplicatePartyIndex";
    case Errc::InvalidPartyIndex: return "InvalidPartyIndex";
    case Errc::EmptyPayloadSet: return "EmptyPayloadSet";
    case Errc::ChoiceOutOfRange: return "ChoiceOutOfRange";
    case Errc::MalformedGroupElement: return "MalformedGroupElement";
    case Errc::AuthenticationFailure: return "AuthenticationFailure";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DecryptionFailure: return "DecryptionFailure";
    case Errc::QueryMalformed: return "QueryMalformed";
    case Errc::ThresholdNotReached: return "ThresholdNotReached";
    case Errc::ParseError: return "ParseError";
    case Errc::BoundViolation: return "BoundViolation";
    case Errc::Overflow: return "Overflow";
    case Errc::EmptyCandidateSet: return "EmptyCandidateSet";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::AttestationFailure: return "AttestationFailure";
    case Errc::ProtocolViolation: return "ProtocolViolation";
    case Errc::FrameTooLarge: return "FrameTooLarge";
    case Errc::Truncated: return "Truncated";
    case Errc::UnknownMsgType: return "UnknownMsgType";
    case Errc::ConnectionError: return "ConnectionError";
    case Errc::ChannelClosed: return "ChannelClosed";
    case Errc::InsufficientPoints: return "InsufficientPoints";
    case Errc::OracleMismatch: return "OracleMismatch";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace secagg
