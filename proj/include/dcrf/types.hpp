#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace dcrf {

// Row-major so that all labels of one pixel are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Serial is the reference path; Parallel runs the same arithmetic under OpenMP.
enum class Execution { Serial, Parallel };

}  // namespace dcrf
