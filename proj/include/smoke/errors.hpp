#pragma once

#include <stdexcept>
#include <string>

namespace smoke {

/// Base class for all errors raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error("InvalidArgument", w) {}
};

/// An iterative solve stopped above its tolerance.
struct NonConvergence : Error {
  NonConvergence(const std::string& w, double residual)
      : Error("NonConvergence", w), residual(residual) {}
  double residual;
};

/// Taylor series of the advection exponential did not reach its tolerance
/// within the term cap (time step too large for the velocity).
struct TruncationOverflow : Error {
  explicit TruncationOverflow(const std::string& w) : Error("TruncationOverflow", w) {}
};

struct SingularBlock : Error {
  explicit SingularBlock(const std::string& w) : Error("SingularBlock", w) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& w) : Error("FormatError", w) {}
};

struct SpecMismatch : Error {
  explicit SpecMismatch(const std::string& w) : Error("SpecMismatch", w) {}
};

struct MaxIterations : Error {
  explicit MaxIterations(const std::string& w) : Error("MaxIterations", w) {}
};

struct LineSearchFailure : Error {
  explicit LineSearchFailure(const std::string& w) : Error("LineSearchFailure", w) {}
};

}  // namespace smoke
