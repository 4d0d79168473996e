#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace swarm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad input: malformed files, invalid set descriptions, scenarios that fail
// an assumption check at load time. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An assumption that held at load time broke while a run was in progress
// (gain left the admissible range, NaN state). The CLI maps this to exit code 2.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vec& x) { return x.allFinite(); }

}  // namespace swarm
