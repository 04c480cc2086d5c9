#ifndef QSAMPLER_ERRORS_HPP
#define QSAMPLER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qsampler {

/// Bad argument to an operation (empty input, zero step count, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Matrix or Hilbert-space dimension outside the supported range.
class InvalidDimension : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Value outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical contract (unitarity, hermiticity, normalization) does not hold.
class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qsampler

#endif  // QSAMPLER_ERRORS_HPP
