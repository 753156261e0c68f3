#pragma once

#include <stdexcept>
#include <string>

namespace batsim {

/// Base class of every error raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BATSIM_DEFINE_ERROR(Name) \
  class Name : public Error {     \
   public:                        \
    using Error::Error;           \
  }

BATSIM_DEFINE_ERROR(PastEvent);
BATSIM_DEFINE_ERROR(ZeroDistance);
BATSIM_DEFINE_ERROR(NoSolution);
BATSIM_DEFINE_ERROR(ParseError);
BATSIM_DEFINE_ERROR(OrderError);
BATSIM_DEFINE_ERROR(MissingPosition);
BATSIM_DEFINE_ERROR(UnknownPacket);
BATSIM_DEFINE_ERROR(InsufficientRuns);
BATSIM_DEFINE_ERROR(MissingSeries);

#undef BATSIM_DEFINE_ERROR

/// Configuration rejected; carries the offending key.
class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace batsim
