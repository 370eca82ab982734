#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ckam {

/// A point in parameter space; the state of a chain.
using Position = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when a covariance cannot be made positive definite or a
/// special function is evaluated outside its supported domain.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Position& x) { return x.allFinite(); }

inline void require_finite(const Position& x, const char* what) {
  if (!x.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
  }
}

inline void require_same_dimension(const Position& a, const Position& b,
                                   const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

}  // namespace ckam
