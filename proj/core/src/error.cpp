#include "binloc/error.hpp"

namespace binloc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kLength: return "length";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kLookup: return "lookup";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(to_string(kind)) + " error: " + what);
}

}  // namespace binloc
