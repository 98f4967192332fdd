#pragma once

#include <stdexcept>

namespace hqr {

// No parameter choice on the searched grid meets a requested fidelity floor.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hqr
