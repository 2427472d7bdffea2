#pragma once

#include <cstdint>
#include <vector>

#include "opkm/core.hpp"
#include "opkm/kernel.hpp"
#include "opkm/linalg.hpp"
#include "opkm/parallel.hpp"
#include "opkm/rng.hpp"

namespace opkm {

enum class SketchMethod { one_pass_srht, one_pass_gaussian, nystrom, exact };

inline const char* method_name(SketchMethod m) {
  switch (m) {
    case SketchMethod::one_pass_srht: return "one-pass";
    case SketchMethod::one_pass_gaussian: return "gaussian";
    case SketchMethod::nystrom: return "nystrom";
    case SketchMethod::exact: return "exact";
  }
  return "?";
}

struct SketchConfig {
  Index rank = 2;
  Index oversample = 0;  // r' = rank + oversample sketch columns
  std::uint64_t seed = 0;
  Index block = kDefaultBlock;
  SketchMethod method = SketchMethod::one_pass_srht;
  Index samples = 0;          // nystrom column budget m
  Index dense_cap = kDenseCap;
  double omega_scale = 1.0;   // diagnostic knob; the factorization is
                              // invariant to positive rescaling of the sketch
};

// Instrumentation for the streaming contract: how often each kernel column
// was generated and the high-water mark of live buffer bytes (sketch
// matrices, basis, factor, transform scratch, plus the current block).
struct SketchStats {
  std::vector<std::int64_t> column_requests;
  std::size_t peak_bytes = 0;
  std::size_t block_bytes = 0;
  Index blocks = 0;

  void note(std::size_t live) {
    if (live > peak_bytes) peak_bytes = live;
  }
};

// The embedding K ~= Y^T Y together with the spectrum of the approximation.
template <class Scalar>
struct LowRankFactor {
  SketchMethod method = SketchMethod::exact;
  Index rank = 0;
  Index oversample = 0;       // one-pass methods
  Index samples = 0;          // nystrom
  std::uint64_t seed = 0;
  Matrix<Scalar> Y;           // r x n
  Vector<Scalar> eigenvalues; // of Y^T Y, descending, >= 0
  Matrix<Scalar> Q;           // n x r orthonormal basis; empty for nystrom
  Index effective_rank = 0;
  bool deficient = false;     // numerical rank fell below r somewhere
};

namespace detail {

// Omega = (D H R)[0:n, :] columns for the SRHT: each sampled column c of the
// Hadamard matrix is materialized by one FWHT of a unit vector, then signed.
// Signs and column ids are indexed draws, so Omega never depends on how the
// kernel stream is blocked.
template <class Scalar>
Matrix<Scalar> srht_omega(Index n, Index N, Index rp, std::uint64_t seed, double scale) {
  CounterRng colrng(seed, Stream::srht_columns);
  const std::vector<Index> cols = sample_without_replacement(N, rp, colrng);
  Vector<Scalar> sign(n);
  for (Index i = 0; i < n; ++i)
    sign(i) = Scalar(srht_sign(seed, static_cast<std::uint64_t>(i)));
  Matrix<Scalar> Om(n, rp);
  parallel_for(0, rp, 1, [&](Index lo, Index hi) {
    Vector<Scalar> h(N);
    for (Index j = lo; j < hi; ++j) {
      h.setZero();
      h(cols[j]) = Scalar(1);
      fwht(h);
      Om.col(j) = sign.cwiseProduct(h.head(n)) * Scalar(scale);
    }
  });
  return Om;
}

template <class Scalar>
Matrix<Scalar> gaussian_omega(Index n, Index rp, std::uint64_t seed, double scale) {
  Matrix<Scalar> Om(n, rp);
  parallel_for(0, rp, 1, [&](Index lo, Index hi) {
    for (Index j = lo; j < hi; ++j) {
      CounterRng g(seed, Stream::gaussian_sketch, static_cast<std::uint64_t>(j));
      for (Index i = 0; i < n; ++i) Om(i, j) = Scalar(g.gaussian()) * Scalar(scale);
    }
  });
  return Om;
}

inline std::size_t bytes_of(Index rows, Index cols, std::size_t scalar_size) {
  return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * scalar_size;
}

}  // namespace detail

// One-pass randomized eigendecomposition of the kernel matrix. The kernel is
// streamed in column blocks exactly once to form W = K*Omega; the basis Q,
// the small core B (solved from B (Q^T Omega) = Q^T W, never revisiting K),
// its eigendecomposition and the embedding Y = Sigma^{1/2} V^T Q^T all come
// from sketch-sized objects. Peak memory is O(r' n) plus one column block.
template <class Scalar>
LowRankFactor<Scalar> one_pass_sketch(const Matrix<Scalar>& X, const KernelSpec& spec,
                                      const SketchConfig& cfg, SketchStats* stats = nullptr) {
  if (cfg.method != SketchMethod::one_pass_srht &&
      cfg.method != SketchMethod::one_pass_gaussian)
    throw std::invalid_argument("one_pass_sketch: config selects a different method");
  const Index n = X.cols();
  const Index r = cfg.rank;
  const Index rp = r + cfg.oversample;
  if (r < 1 || cfg.oversample < 0)
    throw std::invalid_argument("one_pass_sketch: rank must be >= 1, oversampling >= 0");
  if (rp > n)
    throw std::invalid_argument("one_pass_sketch: rank + oversampling exceeds sample count");
  if (cfg.block < 1) throw std::invalid_argument("one_pass_sketch: block width must be >= 1");
  if (!(cfg.omega_scale > 0))
    throw std::invalid_argument("one_pass_sketch: omega scale must be positive");

  const Index N = next_pow2(n);
  constexpr std::size_t sz = sizeof(Scalar);
  if (stats) {
    stats->column_requests.assign(static_cast<std::size_t>(n), 0);
    stats->peak_bytes = 0;
    stats->blocks = 0;
    stats->block_bytes = detail::bytes_of(n, std::min(cfg.block, n), sz);
  }

  Matrix<Scalar> Om =
      cfg.method == SketchMethod::one_pass_srht
          ? detail::srht_omega<Scalar>(n, N, rp, cfg.seed, cfg.omega_scale)
          : detail::gaussian_omega<Scalar>(n, rp, cfg.seed, cfg.omega_scale);
  if (stats)
    stats->note(detail::bytes_of(n, rp, sz) + detail::bytes_of(N, 1, sz) +
                detail::bytes_of(n, 1, sz));

  // single pass over kernel columns, ascending blocks
  Matrix<Scalar> W = Matrix<Scalar>::Zero(n, rp);
  for (Index s = 0; s < n; s += cfg.block) {
    const Index w = std::min(cfg.block, n - s);
    Matrix<Scalar> blk = kernel_column_block(X, s, w, spec);
    if (stats) {
      for (Index j = 0; j < w; ++j) ++stats->column_requests[static_cast<std::size_t>(s + j)];
      ++stats->blocks;
      stats->note(2 * detail::bytes_of(n, rp, sz) + detail::bytes_of(n, w, sz));
    }
    W.noalias() += blk * Om.middleRows(s, w);
  }

  BasisResult<Scalar> basis = orthonormal_basis(W, r);
  if (stats)
    // SVD workspace holds roughly one more copy of W alongside W, Omega, Q
    stats->note(3 * detail::bytes_of(n, rp, sz) + detail::bytes_of(n, r, sz));

  Matrix<Scalar> M = basis.Q.transpose() * Om;    // r x r'
  Matrix<Scalar> RHS = basis.Q.transpose() * W;   // r x r'
  Matrix<Scalar> B = solve_small(M, RHS);
  EigResult<Scalar> eig = sym_eig(B);
  Vector<Scalar> lam = eig.values.cwiseMax(Scalar(0));  // sketching can dip below zero

  LowRankFactor<Scalar> out;
  out.method = cfg.method;
  out.rank = r;
  out.oversample = cfg.oversample;
  out.seed = cfg.seed;
  out.Y = lam.cwiseSqrt().asDiagonal() * eig.vectors.transpose() * basis.Q.transpose();
  out.eigenvalues = lam;
  out.Q = basis.Q;
  out.effective_rank = basis.effective_rank;
  out.deficient = basis.deficient;
  if (stats)
    stats->note(2 * detail::bytes_of(n, rp, sz) + 2 * detail::bytes_of(n, r, sz) +
                detail::bytes_of(r, n, sz));
  return out;
}

// Uniform-sampling Nystrom baseline: m columns without replacement, rank-r
// pseudo-inverse of the intersection block, Y rows lambda_i^{-1/2} (C u_i)^T.
// No sqrt(m/n) extrapolation factor; Y^T Y is the classic C W_r^+ C^T.
template <class Scalar>
LowRankFactor<Scalar> nystrom(const Matrix<Scalar>& X, const KernelSpec& spec, Index m,
                              Index r, std::uint64_t seed) {
  const Index n = X.cols();
  if (r < 1 || r > m || m > n)
    throw std::invalid_argument("nystrom: need 1 <= r <= m <= n");
  CounterRng rng(seed, Stream::nystrom_columns);
  const std::vector<Index> idx = sample_without_replacement(n, m, rng);

  Matrix<Scalar> Xc(X.rows(), m);
  for (Index j = 0; j < m; ++j) Xc.col(j) = X.col(idx[static_cast<std::size_t>(j)]);
  Matrix<Scalar> C = kernel_cross<Scalar>(X, Xc, spec);  // n x m
  Matrix<Scalar> Wm(m, m);
  for (Index i = 0; i < m; ++i) Wm.row(i) = C.row(idx[static_cast<std::size_t>(i)]);

  EigResult<Scalar> eig = sym_eig(Wm);
  const Scalar lmax = eig.values.size() > 0 ? eig.values(0) : Scalar(0);
  const Scalar thresh = Scalar(1e-10) * (lmax > Scalar(0) ? lmax : Scalar(0));

  LowRankFactor<Scalar> out;
  out.method = SketchMethod::nystrom;
  out.rank = r;
  out.samples = m;
  out.seed = seed;
  out.Y = Matrix<Scalar>::Zero(r, n);
  Index kept = 0;
  for (Index i = 0; i < r; ++i) {
    if (eig.values(i) > thresh) {
      out.Y.row(kept) =
          (C * eig.vectors.col(i)).transpose() / std::sqrt(eig.values(i));
      ++kept;
    }
  }
  out.effective_rank = kept;
  out.deficient = kept < r;

  // spectrum of the approximation itself, via the small Gram of Y
  Matrix<Scalar> G = out.Y * out.Y.transpose();
  out.eigenvalues = sym_eig(G).values.cwiseMax(Scalar(0));
  return out;
}

// Best rank-r approximation from a full eigendecomposition of K.
template <class Scalar>
LowRankFactor<Scalar> exact_truncated(const Matrix<Scalar>& X, const KernelSpec& spec,
                                      Index r, Index cap = kDenseCap) {
  const Index n = X.cols();
  if (n > cap) throw std::invalid_argument("exact_truncated: dense cap exceeded");
  if (r < 1 || r > n) throw std::invalid_argument("exact_truncated: need 1 <= r <= n");
  Matrix<Scalar> K = kernel_matrix(X, spec, cap);
  EigResult<Scalar> eig = sym_eig(K);

  LowRankFactor<Scalar> out;
  out.method = SketchMethod::exact;
  out.rank = r;
  out.eigenvalues = eig.values.head(r).cwiseMax(Scalar(0));
  out.Q = eig.vectors.leftCols(r);
  out.Y = out.eigenvalues.cwiseSqrt().asDiagonal() * out.Q.transpose();
  out.effective_rank = r;
  return out;
}

// Normalized approximation error ||K - Y^T Y||_F / ||K||_F, streaming K in
// column blocks; the n x n matrices are never materialized.
template <class Scalar>
double approx_error(const Matrix<Scalar>& X, const KernelSpec& spec,
                    const LowRankFactor<Scalar>& factor, Index block = kDefaultBlock) {
  const Index n = X.cols();
  if (factor.Y.cols() != n)
    throw std::invalid_argument("approx_error: factor does not match the dataset");
  if (block < 1) throw std::invalid_argument("approx_error: block width must be >= 1");
  double num = 0.0, den = 0.0;
  for (Index s = 0; s < n; s += block) {
    const Index w = std::min(block, n - s);
    Matrix<Scalar> blk = kernel_column_block(X, s, w, spec);
    den += static_cast<double>(blk.squaredNorm());
    blk.noalias() -= factor.Y.transpose() * factor.Y.middleCols(s, w);
    num += static_cast<double>(blk.squaredNorm());
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

}  // namespace opkm
