#pragma once

#include <cmath>
#include <string>

#include "opkm/core.hpp"
#include "opkm/parallel.hpp"

namespace opkm {

// Kernel family and parameters. Polynomial is (<x,y> + gamma)^d, gamma = 0
// giving the homogeneous case (the default of interest); rbf is
// exp(-gamma * ||x - y||^2).
struct KernelSpec {
  enum class Family { polynomial, rbf };

  Family family = Family::polynomial;
  int degree = 2;
  double gamma_poly = 0.0;
  double gamma_rbf = 1.0;

  static KernelSpec poly(int d, double gamma = 0.0) {
    KernelSpec s;
    s.family = Family::polynomial;
    s.degree = d;
    s.gamma_poly = gamma;
    s.validate();
    return s;
  }

  static KernelSpec rbf(double gamma) {
    KernelSpec s;
    s.family = Family::rbf;
    s.gamma_rbf = gamma;
    s.validate();
    return s;
  }

  void validate() const {
    if (family == Family::polynomial) {
      if (degree < 1) throw std::invalid_argument("KernelSpec: polynomial degree must be >= 1");
      if (gamma_poly < 0) throw std::invalid_argument("KernelSpec: polynomial offset must be >= 0");
    } else {
      if (!(gamma_rbf > 0)) throw std::invalid_argument("KernelSpec: rbf bandwidth must be > 0");
    }
  }

  std::string name() const {
    if (family == Family::polynomial) {
      std::string s = "poly:" + std::to_string(degree);
      if (gamma_poly != 0.0) s += ":" + std::to_string(gamma_poly);
      return s;
    }
    return "rbf:" + std::to_string(gamma_rbf);
  }
};

namespace detail {

// Integer power by repeated multiplication; exact operation order keeps
// polynomial kernel values bit-reproducible.
template <class Scalar>
Scalar pow_int(Scalar base, int d) {
  Scalar out = Scalar(1);
  for (int i = 0; i < d; ++i) out *= base;
  return out;
}

}  // namespace detail

// Single kernel evaluation between two samples (column expressions are fine).
template <class Dx, class Dy>
typename Dx::Scalar kernel_entry(const Eigen::MatrixBase<Dx>& x,
                                 const Eigen::MatrixBase<Dy>& y,
                                 const KernelSpec& spec) {
  using S = typename Dx::Scalar;
  if (x.size() != y.size())
    throw std::invalid_argument("kernel_entry: dimension mismatch");
  if (spec.family == KernelSpec::Family::polynomial) {
    return detail::pow_int<S>(x.dot(y) + S(spec.gamma_poly), spec.degree);
  }
  S d2 = x.squaredNorm() + y.squaredNorm() - S(2) * x.dot(y);
  if (d2 < S(0)) d2 = S(0);
  return std::exp(-S(spec.gamma_rbf) * d2);
}

// Kernel values between every column of X and every column of Xc: an
// |X| x |Xc| matrix. Gram products go through one dense GEMM; the entrywise
// map is parallel over disjoint column ranges, so results are bitwise
// independent of threading.
template <class Scalar>
Matrix<Scalar> kernel_cross(const Eigen::Ref<const Matrix<Scalar>>& X,
                            const Eigen::Ref<const Matrix<Scalar>>& Xc,
                            const KernelSpec& spec) {
  if (X.rows() != Xc.rows())
    throw std::invalid_argument("kernel_cross: feature dimensions differ");
  spec.validate();
  Matrix<Scalar> G = X.transpose() * Xc;
  if (spec.family == KernelSpec::Family::polynomial) {
    const Scalar gamma = Scalar(spec.gamma_poly);
    const int d = spec.degree;
    parallel_for(0, G.cols(), 64, [&](Index lo, Index hi) {
      for (Index j = lo; j < hi; ++j)
        for (Index i = 0; i < G.rows(); ++i)
          G(i, j) = detail::pow_int<Scalar>(G(i, j) + gamma, d);
    });
  } else {
    const Scalar gamma = Scalar(spec.gamma_rbf);
    Vector<Scalar> xn = X.colwise().squaredNorm();
    Vector<Scalar> cn = Xc.colwise().squaredNorm();
    parallel_for(0, G.cols(), 64, [&](Index lo, Index hi) {
      for (Index j = lo; j < hi; ++j)
        for (Index i = 0; i < G.rows(); ++i) {
          Scalar d2 = xn(i) + cn(j) - Scalar(2) * G(i, j);
          if (d2 < Scalar(0)) d2 = Scalar(0);
          G(i, j) = std::exp(-gamma * d2);
        }
    });
  }
  return G;
}

// One streaming unit: columns [start, start+width) of the kernel matrix.
template <class Scalar>
Matrix<Scalar> kernel_column_block(const Matrix<Scalar>& X, Index start, Index width,
                                   const KernelSpec& spec) {
  if (start < 0 || width < 1 || start + width > X.cols())
    throw std::invalid_argument("kernel_column_block: block out of range");
  return kernel_cross<Scalar>(X, X.middleCols(start, width), spec);
}

// Dense n x n kernel matrix, for the baselines that need it. Guarded so the
// streaming paths cannot silently fall back to quadratic memory.
template <class Scalar>
Matrix<Scalar> kernel_matrix(const Matrix<Scalar>& X, const KernelSpec& spec,
                             Index cap = kDenseCap) {
  if (X.cols() > cap)
    throw std::invalid_argument("kernel_matrix: sample count exceeds dense cap");
  return kernel_cross<Scalar>(X, X, spec);
}

template <class Scalar>
Vector<Scalar> kernel_diag(const Matrix<Scalar>& X, const KernelSpec& spec) {
  spec.validate();
  const Index n = X.cols();
  Vector<Scalar> d(n);
  if (spec.family == KernelSpec::Family::polynomial) {
    for (Index i = 0; i < n; ++i)
      d(i) = detail::pow_int<Scalar>(X.col(i).squaredNorm() + Scalar(spec.gamma_poly),
                                     spec.degree);
  } else {
    d.setOnes();
  }
  return d;
}

}  // namespace opkm
