#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shardlearn {

// Bad flag/config combinations, rejected before any work starts.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A prediction went non-finite: learning rate too large. Runs abort.
struct NumericOverflow : std::runtime_error {
  explicit NumericOverflow(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input line. byte_offset is 0-based within the line.
struct ParseError : std::runtime_error {
  size_t byte_offset;
  ParseError(size_t off, const std::string& msg)
      : std::runtime_error("parse error at byte " + std::to_string(off) + ": " + msg),
        byte_offset(off) {}
};

}  // namespace shardlearn
