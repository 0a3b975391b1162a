#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace creditband {

enum class ErrorCode {
  InvalidArgument,
  SpendExceedsBudget,
  NegativeSpend,
  InfeasibleCap,
  DegenerateN,
  NegativeRate,
  PeriodOutOfRange,
  SingularAtZero,
  Infeasible,
  NoConvergence,
  ZeroBandwidth,
  NonpositiveDt,
  NoConnections,
  Config,
};

const char* to_string(ErrorCode code);

// Base class for every error raised by the library. Messages carry the
// context (gateway, period, scenario id) added while the error propagates.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by ledger operations that identify a single offending gateway.
class GatewayError : public Error {
 public:
  GatewayError(ErrorCode code, std::size_t gateway, const std::string& message)
      : Error(code, message), gateway_(gateway) {}

  std::size_t gateway() const { return gateway_; }

 private:
  std::size_t gateway_;
};

// Configuration problems (missing file, bad field). The CLI maps these to
// exit status 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorCode::Config, message) {}
};

}  // namespace creditband
