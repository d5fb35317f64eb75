#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace persist {

// Failure categories raised by the numerical modules. The CLI maps them onto
// exit codes (see exit_code()).
enum class ErrorKind {
  InvalidModel,
  InvalidConfig,
  InvalidSplit,
  MassDefect,
  NotBounded,
  Diverges,
  NoConvergence,
  DegenerateKernel,
  DegenerateConditioning,
  OutOfRange,
  SeriesDiverges,
  SingularAtRoot,
  BadBracket,
  DomainExceeded,
  InvalidRatio,
  PastPole,
  EmptyWindow,
  Extinction,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// 2 config error, 3 numerical-domain error, 4 non-convergence.
int exit_code(ErrorKind kind);

}  // namespace persist
