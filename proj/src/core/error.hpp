#pragma once

#include <stdexcept>
#include <string>

namespace hypcusp {

enum class ErrorCode {
  InvalidArgument,     // precondition violated by the caller
  Domain,              // input outside the domain of a formula (R < 0, f <= 0, ...)
  IntegrationFailure,  // ODE blow-up, bracket failure
  Numerical,           // degenerate geometry, tolerance violations
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by integrate_backward when the profile leaves the regular range
// before reaching the start of the requested interval.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double reached_time)
      : Error(ErrorCode::IntegrationFailure, what), reached_time_(reached_time) {}

  double reached_time() const noexcept { return reached_time_; }

 private:
  double reached_time_;
};

// Raised by decompose_simple_loops on a near-tangential or vertex-degenerate
// self-intersection. Segment indices identify the offending parameter pair.
class TangencyError : public Error {
 public:
  TangencyError(const std::string& what, std::size_t segment_a, std::size_t segment_b)
      : Error(ErrorCode::Numerical, what), segment_a_(segment_a), segment_b_(segment_b) {}

  std::size_t segment_a() const noexcept { return segment_a_; }
  std::size_t segment_b() const noexcept { return segment_b_; }

 private:
  std::size_t segment_a_;
  std::size_t segment_b_;
};

}  // namespace hypcusp
