#pragma once

#include <stdexcept>
#include <string>

namespace scusum {

// Raised when parameters fall outside the domain where an asymptotic formula
// or a Monte Carlo procedure is meaningful. Input that is simply malformed
// raises std::invalid_argument instead.
class ValidityError : public std::domain_error {
 public:
  explicit ValidityError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace scusum
