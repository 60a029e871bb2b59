#pragma once

#include <stdexcept>
#include <string>

namespace qelim {

struct ParseError : std::runtime_error {
  size_t position;
  ParseError(const std::string &msg, size_t pos)
      : std::runtime_error(msg + " at offset " + std::to_string(pos)), position(pos) {}
};

struct TimeoutError : std::runtime_error {
  TimeoutError() : std::runtime_error("deadline exceeded") {}
};

// Input outside the supported fragment (e.g. a stalled vts-only run).
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

} // namespace qelim
