#pragma once

#include <stdexcept>
#include <string>

namespace realsim {

// Malformed input: bad file syntax, wrong magic, missing fields. CLI exit 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a contract (sizes, ranges, limits). CLI exit 3.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown inside an algorithm. CLI exit 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace realsim
