#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "opkm/core.hpp"

namespace opkm {

// Fraction of samples on which pred agrees with truth under the best
// one-to-one matching of cluster ids to class ids. Exact optimum by subset
// DP over the confusion matrix, feasible up to ~20 clusters.
inline double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("clustering_accuracy: length mismatch");
  if (pred.empty()) throw std::invalid_argument("clustering_accuracy: empty labelings");
  int kp = 0, kt = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || truth[i] < 0)
      throw std::invalid_argument("clustering_accuracy: negative label");
    kp = std::max(kp, pred[i] + 1);
    kt = std::max(kt, truth[i] + 1);
  }
  const int K = std::max(kp, kt);
  if (K > 20) throw std::invalid_argument("clustering_accuracy: more than 20 clusters");

  // square confusion matrix, zero padded so the matching is a permutation
  std::vector<std::vector<std::int64_t>> conf(
      static_cast<std::size_t>(K), std::vector<std::int64_t>(static_cast<std::size_t>(K), 0));
  for (std::size_t i = 0; i < pred.size(); ++i)
    ++conf[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])];

  // dp[mask]: best agreement assigning pred clusters 0..popcount(mask)-1
  // to the truth clusters in mask
  const std::size_t full = std::size_t(1) << K;
  std::vector<std::int64_t> dp(full, -1);
  dp[0] = 0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (dp[mask] < 0) continue;
    const int p = __builtin_popcountll(static_cast<unsigned long long>(mask));
    if (p == K) continue;
    for (int t = 0; t < K; ++t) {
      if (mask & (std::size_t(1) << t)) continue;
      const std::size_t nmask = mask | (std::size_t(1) << t);
      const std::int64_t cand = dp[mask] + conf[static_cast<std::size_t>(p)][static_cast<std::size_t>(t)];
      if (cand > dp[nmask]) dp[nmask] = cand;
    }
  }
  return static_cast<double>(dp[full - 1]) / static_cast<double>(pred.size());
}

struct ErrorFunctionals {
  double trace_norm = 0.0;  // sum of |eigenvalues| of E = Kx - Kh
  double trace = 0.0;       // sum of eigenvalues (= trace(E))
  double spectral = 0.0;    // max |eigenvalue|
  double frobenius = 0.0;   // sqrt(sum of squared eigenvalues)
};

// Error functionals of E = Kx - Kh for symmetric inputs. All four values
// derive from one eigendecomposition, so trace_norm >= frobenius >= spectral
// and |trace| <= trace_norm hold exactly, not just up to round-off.
template <class Scalar>
ErrorFunctionals error_functionals(const Matrix<Scalar>& Kx, const Matrix<Scalar>& Kh) {
  if (Kx.rows() != Kx.cols()) throw std::invalid_argument("error_functionals: Kx not square");
  if (Kh.rows() != Kx.rows() || Kh.cols() != Kx.cols())
    throw std::invalid_argument("error_functionals: shape mismatch");
  Matrix<Scalar> E = Kx - Kh;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(E, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numerical_error("error_functionals: eigendecomposition failed", 0.0);
  const auto& ev = es.eigenvalues();
  ErrorFunctionals out;
  double sq = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    const double l = static_cast<double>(ev(i));
    out.trace_norm += std::abs(l);
    out.trace += l;
    out.spectral = std::max(out.spectral, std::abs(l));
    sq += l * l;
  }
  out.frobenius = std::sqrt(sq);
  return out;
}

}  // namespace opkm
