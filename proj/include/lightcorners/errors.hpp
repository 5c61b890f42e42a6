#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lightcorners {

// Every failure the library reports carries one of these categories; the CLI
// maps them onto distinct exit codes.
enum class ErrorKind {
  InvalidInput,  // precondition violated by a caller-supplied value
  Validation,    // malformed or inconsistent record in a data file
  Config,        // bad configuration (unknown key, infeasible setting, missing model)
  Io,            // file system or codec failure
  Numeric,       // non-finite value produced during computation
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the category prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace lightcorners
