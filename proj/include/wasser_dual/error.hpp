#pragma once

#include <stdexcept>
#include <string>

namespace wd {

/// Input that cannot be interpreted: wrong shape, NaN entries, unparsable text.
class MalformedInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Well-formed input that violates an operation's precondition.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical routine did not reach its stopping criterion.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wd
