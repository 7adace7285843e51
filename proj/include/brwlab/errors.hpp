#pragma once

#include <stdexcept>
#include <string>

namespace brwlab {

/// Invalid input: unknown generator, malformed config, violated precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured size or truncation cap was exceeded.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& what, double estimated_size)
      : std::runtime_error(what), estimated_size_(estimated_size) {}
  double estimated_size() const { return estimated_size_; }

 private:
  double estimated_size_;
};

/// A generating function was evaluated outside its disc of convergence.
class DivergentSeries : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operation not available for this group variant.
class UnsupportedSpec : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace brwlab
