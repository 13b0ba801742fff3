#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qwork {

// Error taxonomy. The command line tool maps these onto its exit codes
// (config 2, resource 3, numeric 4), so keep the categories disjoint:
// ConfigError/ShapeError/DomainError blame the input, NumericalError blames
// floating point, ResourceError blames a guard that refused to start work.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input document. `line` is 1-based, 0 when not tied to a line.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg, int line_no = 0)
      : Error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
  int line;
};

// Dimension mismatch between operators that must share a Hilbert space.
struct ShapeError : Error {
  using Error::Error;
};

// Value outside the mathematical domain of an operation (negative inverse
// temperature, non-Hermitian matrix where one is required, ...).
struct DomainError : Error {
  using Error::Error;
};

// A numerical invariant failed beyond its tolerance; carries the residual.
struct NumericalError : Error {
  NumericalError(const std::string& msg, double res)
      : Error(msg + " (residual " + std::to_string(res) + ")"), residual(res) {}
  double residual;
};

// Work refused up front because it would exceed a configured cap.
struct ResourceError : Error {
  ResourceError(const std::string& msg, std::uint64_t req)
      : Error(msg + " (required " + std::to_string(req) + ")"), required(req) {}
  std::uint64_t required;
};

}  // namespace qwork
