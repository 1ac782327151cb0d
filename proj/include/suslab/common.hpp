#ifndef SUSLAB_COMMON_HPP_
#define SUSLAB_COMMON_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace suslab {

// Precondition / invariant breach on an operation's contract.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Bad or inconsistent experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / serialization failure (CLI exit code 3).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

}  // namespace suslab

#endif  // SUSLAB_COMMON_HPP_
