#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace risbf {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

/// Raised when an input lies outside the mathematical domain of an operation
/// (non-finite entries, degenerate precoders, nonpositive distances).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an algorithm is asked to run on a configuration it does not
/// support (e.g. the MISO-only equivalent gradient on a MIMO system).
class UnsupportedConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace risbf
