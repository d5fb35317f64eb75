#include "persist/errors.hpp"

namespace persist {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidSplit: return "InvalidSplit";
    case ErrorKind::MassDefect: return "MassDefect";
    case ErrorKind::NotBounded: return "NotBounded";
    case ErrorKind::Diverges: return "Diverges";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateKernel: return "DegenerateKernel";
    case ErrorKind::DegenerateConditioning: return "DegenerateConditioning";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::SeriesDiverges: return "SeriesDiverges";
    case ErrorKind::SingularAtRoot: return "SingularAtRoot";
    case ErrorKind::BadBracket: return "BadBracket";
    case ErrorKind::DomainExceeded: return "DomainExceeded";
    case ErrorKind::InvalidRatio: return "InvalidRatio";
    case ErrorKind::PastPole: return "PastPole";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::Extinction: return "Extinction";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidModel:
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidSplit:
    case ErrorKind::InvalidRatio:
      return 2;
    case ErrorKind::NoConvergence:
      return 4;
    default:
      return 3;
  }
}

}  // namespace persist
