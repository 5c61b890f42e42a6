#include "lightcorners/errors.hpp"

namespace lightcorners {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Numeric: return "numeric error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace lightcorners
