#pragma once

#include <stdexcept>
#include <string>

namespace robloc {

enum class ErrorKind {
  domain,
  infinite_endpoint,
  moment_divergence,
  range,
  over_trim,
  geometry,
  parameter,
  capacity,
  resolution,
  precision,
  empty_input,
  unsupported_dimension,
  config,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace robloc
