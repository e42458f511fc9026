#pragma once

#include <stdexcept>
#include <string>

namespace binloc {

enum class ErrorKind {
  kValidation,   // invariant or precondition violated by a caller-supplied value
  kLength,       // signal or payload too short
  kShape,        // tensor/channel/bin count mismatch
  kLookup,       // direction or id not found
  kDegenerate,   // zero transfer function or zero-energy signal
  kInfeasible,   // no physical solution (e.g. RT60 too short for the room)
  kFormat,       // bad magic, truncated or inconsistent file contents
  kIo,           // open/read/write failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // File-level failures map to exit code 3 in the CLI, everything else to 2.
  bool is_io() const noexcept {
    return kind_ == ErrorKind::kIo || kind_ == ErrorKind::kFormat;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace binloc
