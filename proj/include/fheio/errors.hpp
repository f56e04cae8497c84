#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fheio {

// Invalid domain parameters (zero/negative fields, broken invariants).
struct param_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Byte-count arithmetic would overflow the 64-bit counter.
struct size_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An application profile contradicts itself (e.g. evaluation-key traffic
// demanded by a mix with no key-consuming ops).
struct profile_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed trace file. Carries the 1-based line number when known.
struct parse_error : std::runtime_error {
  std::uint64_t line = 0;
  parse_error(std::uint64_t line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
  explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Trace header totals disagree with the record sums, or trace-level
// key-identity invariants are violated.
struct integrity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Platform or preset configuration is unusable (unknown name, zero bandwidth).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Calibration target cannot be met (invalid breakdown, no solution in range).
struct calibration_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Trace and platform disagree (e.g. clock mismatch without rescale).
struct consistency_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested performance target cannot be reached at any cache hit ratio.
struct infeasible_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fheio
