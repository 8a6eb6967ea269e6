#include "robloc/errors.hpp"

namespace robloc {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::infinite_endpoint: return "infinite endpoint";
    case ErrorKind::moment_divergence: return "moment divergence";
    case ErrorKind::range: return "range error";
    case ErrorKind::over_trim: return "over-trim";
    case ErrorKind::geometry: return "geometry error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::capacity: return "capacity error";
    case ErrorKind::resolution: return "resolution error";
    case ErrorKind::precision: return "precision error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::unsupported_dimension: return "unsupported dimension";
    case ErrorKind::config: return "config error";
  }
  return "error";
}

}  // namespace robloc
