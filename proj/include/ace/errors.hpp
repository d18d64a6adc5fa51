#pragma once

#include <stdexcept>
#include <string>

namespace ace {

/// Base of every error raised by the library. `code()` is a stable
/// machine-readable identifier (also used as the HTTP error code).
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string &message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string &code() const noexcept { return code_; }

private:
  std::string code_;
};

#define ACE_DEFINE_ERROR(Name, Code)                                           \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string &message) : Error(Code, message) {}        \
  }

ACE_DEFINE_ERROR(ValidationError, "INVALID_ARGUMENT");
ACE_DEFINE_ERROR(DegenerateRange, "DEGENERATE_RANGE");
ACE_DEFINE_ERROR(MissingReference, "MISSING_REFERENCE");
ACE_DEFINE_ERROR(ParseError, "PARSE_ERROR");
ACE_DEFINE_ERROR(PreconditionError, "PRECONDITION");

// Gateway transport / protocol failures.
ACE_DEFINE_ERROR(GatewayUnavailable, "GATEWAY_UNAVAILABLE");
ACE_DEFINE_ERROR(BadResponse, "BAD_RESPONSE");
ACE_DEFINE_ERROR(Misconfigured, "MISCONFIGURED");

// Session layer.
ACE_DEFINE_ERROR(WrongPhase, "WRONG_PHASE");
ACE_DEFINE_ERROR(UnknownScenario, "UNKNOWN_SCENARIO");
ACE_DEFINE_ERROR(TooShortAnswer, "TOO_SHORT_ANSWER");
ACE_DEFINE_ERROR(Conflict, "CONFLICT");
ACE_DEFINE_ERROR(NotFound, "NOT_FOUND");

#undef ACE_DEFINE_ERROR

} // namespace ace
