#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include "opkm/core.hpp"

namespace opkm {

inline bool is_pow2(Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline Index next_pow2(Index n) {
  Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place fast Walsh-Hadamard transform: v <- H*v with H the unnormalized
// +-1 Hadamard matrix of order n (Sylvester), n a power of two. O(n log n)
// butterfly; fwht(fwht(v)) = n*v.
template <class Scalar>
void fwht(Scalar* v, Index n) {
  if (!is_pow2(n)) throw std::invalid_argument("fwht: length must be a power of two");
  for (Index h = 1; h < n; h <<= 1) {
    for (Index i = 0; i < n; i += h << 1) {
      for (Index j = i; j < i + h; ++j) {
        const Scalar a = v[j];
        const Scalar b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

template <class Scalar>
void fwht(Vector<Scalar>& v) {
  fwht(v.data(), v.size());
}

template <class Scalar>
struct BasisResult {
  Matrix<Scalar> Q;       // n x r, orthonormal columns
  Index effective_rank;   // numerical rank of the input
  bool deficient;         // effective_rank < r; trailing columns are an
                          // arbitrary orthonormal completion
};

// r leading left singular vectors of W. The SVD route guarantees exactly r
// columns spanning the best rank-r approximation of range(W); when W has
// rank below r the remaining columns still come out orthonormal and the
// result is flagged.
template <class Scalar>
BasisResult<Scalar> orthonormal_basis(const Matrix<Scalar>& W, Index r) {
  if (r < 1 || r > W.cols() || r > W.rows())
    throw std::invalid_argument("orthonormal_basis: need 1 <= r <= min(rows, cols)");
  Eigen::BDCSVD<Matrix<Scalar>> svd(W, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const Scalar tol = sv.size() > 0
                         ? sv(0) * static_cast<Scalar>(std::max(W.rows(), W.cols())) *
                               Eigen::NumTraits<Scalar>::epsilon()
                         : Scalar(0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  BasisResult<Scalar> out;
  out.Q = svd.matrixU().leftCols(r);
  out.effective_rank = std::min(rank, r);
  out.deficient = rank < r;
  return out;
}

// Least-squares solve for the small symmetric core: the B minimizing
// ||B*M - RHS||_F, then symmetrized. M is r x r' with r' >= r; breaks down
// when M is numerically rank-deficient.
template <class Scalar>
Matrix<Scalar> solve_small(const Matrix<Scalar>& M, const Matrix<Scalar>& RHS,
                           double condition_limit = 1e12) {
  if (M.rows() != RHS.rows() || M.cols() != RHS.cols())
    throw std::invalid_argument("solve_small: M and RHS shapes must match");
  if (M.cols() < M.rows())
    throw std::invalid_argument("solve_small: system is underdetermined (r' < r)");
  Eigen::JacobiSVD<Matrix<Scalar>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = static_cast<double>(sv(0));
  const double smin = static_cast<double>(sv(sv.size() - 1));
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond < condition_limit)) {
    std::ostringstream msg;
    msg << "solve_small: sketch system numerically rank-deficient, condition estimate "
        << cond;
    throw numerical_error(msg.str(), cond);
  }
  // B = RHS * pinv(M), pinv via the SVD already at hand
  Matrix<Scalar> B = RHS * svd.matrixV() * sv.cwiseInverse().asDiagonal() *
                     svd.matrixU().transpose();
  return ((B + B.transpose()) / Scalar(2)).eval();
}

template <class Scalar>
struct EigResult {
  Vector<Scalar> values;   // descending
  Matrix<Scalar> vectors;  // columns aligned with values, orthonormal
};

// Symmetric eigendecomposition, eigenvalues sorted descending.
template <class Scalar>
EigResult<Scalar> sym_eig(const Matrix<Scalar>& B) {
  if (B.rows() != B.cols()) throw std::invalid_argument("sym_eig: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(B);
  if (es.info() != Eigen::Success)
    throw numerical_error("sym_eig: eigendecomposition did not converge");
  EigResult<Scalar> out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

}  // namespace opkm
