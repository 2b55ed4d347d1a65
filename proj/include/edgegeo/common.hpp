#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace edgegeo {

/// Bad input data or configuration. CLI maps this to exit code 1.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File / parse failure. CLI maps this to exit code 2.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg, std::int64_t byte_offset = -1)
      : std::runtime_error(byte_offset >= 0
                               ? msg + " (byte offset " + std::to_string(byte_offset) + ")"
                               : msg),
        byte_offset(byte_offset) {}
  std::int64_t byte_offset;
};

}  // namespace edgegeo
