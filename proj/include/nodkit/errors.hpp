#pragma once

#include <stdexcept>
#include <string>

namespace nodkit {

// Bad configuration or bad caller input. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rejected data: precondition violations, corrupt annotations, shape
// mismatches.
struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

// I/O problems with on-disk artifacts.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedHeader : IoError {
  explicit MalformedHeader(const std::string& msg)
      : IoError("malformed header: " + msg) {}
};

struct TruncatedPayload : IoError {
  explicit TruncatedPayload(const std::string& msg)
      : IoError("truncated payload: " + msg) {}
};

struct DimensionOverflow : IoError {
  explicit DimensionOverflow(const std::string& msg)
      : IoError("dimension overflow: " + msg) {}
};

// Mid-run failures (divergence, failed checkpoint write). The CLI maps this
// to exit code 3.
struct RuntimeFailure : std::runtime_error {
  explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nodkit
