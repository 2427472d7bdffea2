#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace opkm {

using Index = Eigen::Index;

// Dense column-major types, templated on scalar. Data matrices are p x n
// with one sample per column; embeddings are r x n likewise.
template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Largest n for which an n x n kernel matrix may be materialized by the
// dense baselines (exact truncation, full kernel k-means, bound checks).
inline constexpr Index kDenseCap = 20000;

// Column-block width used when streaming kernel columns.
inline constexpr Index kDefaultBlock = 256;

// Malformed or unreadable input data (files, label columns, ragged rows).
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: rank-deficient solves, non-convergent iterations.
// Carries a condition estimate when one is available (0 otherwise).
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& what, double condition = 0.0)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

private:
  double condition_;
};

}  // namespace opkm
