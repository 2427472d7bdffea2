#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "opkm/core.hpp"
#include "opkm/kernel.hpp"
#include "opkm/parallel.hpp"
#include "opkm/rng.hpp"

namespace opkm {

struct ClusterAssignment {
  std::vector<int> labels;
  int clusters = 0;
  double objective = 0.0;        // sum-of-squared-distances value in the
                                 // space that was clustered
  int best_restart = -1;
  int iterations = 0;            // Lloyd iterations of the winning run
  std::vector<double> history;   // objective after each update of that run
};

// K x n normalized indicator: entry (labels[j], j) = 1/sqrt(|S_labels[j]|).
template <class Scalar>
Matrix<Scalar> indicator_matrix(const std::vector<int>& labels, int K) {
  const Index n = static_cast<Index>(labels.size());
  std::vector<Index> counts(static_cast<std::size_t>(K), 0);
  for (int l : labels) {
    if (l < 0 || l >= K) throw std::invalid_argument("indicator_matrix: label out of range");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (Index c : counts)
    if (c == 0) throw std::invalid_argument("indicator_matrix: empty cluster");
  Matrix<Scalar> C = Matrix<Scalar>::Zero(K, n);
  for (Index j = 0; j < n; ++j) {
    const int l = labels[static_cast<std::size_t>(j)];
    C(l, j) = Scalar(1) / std::sqrt(Scalar(counts[static_cast<std::size_t>(l)]));
  }
  return C;
}

namespace detail {

// k-means++ center indices. dist2_from(c) returns squared distances from
// every sample to sample c; the D^2 walk is sequential and deterministic.
// The draw sequence (one index draw, then one uniform per additional center)
// is shared by the Euclidean and kernel paths so that equal distance fields
// give equal seedings.
template <class Scalar, class DistFn>
std::vector<Index> kmeanspp_indices(Index n, int K, CounterRng& rng, DistFn&& dist2_from) {
  std::vector<Index> centers;
  centers.reserve(static_cast<std::size_t>(K));
  const Index c0 = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(n)));
  centers.push_back(c0);
  Vector<Scalar> d2 = dist2_from(c0);
  for (int k = 1; k < K; ++k) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (d2(i) < Scalar(0)) d2(i) = Scalar(0);  // kernel round-off
      total += static_cast<double>(d2(i));
    }
    Index pick = -1;
    if (total > 0.0) {
      const double u = rng.uniform01() * total;
      double cum = 0.0;
      for (Index i = 0; i < n; ++i) {
        cum += static_cast<double>(d2(i));
        if (cum > u) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // u landed on the rounded-off tail
        for (Index i = n - 1; i >= 0; --i)
          if (d2(i) > Scalar(0)) {
            pick = i;
            break;
          }
      }
    }
    if (pick < 0) pick = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    centers.push_back(pick);
    d2 = d2.cwiseMin(dist2_from(pick));
  }
  return centers;
}

template <class Scalar>
struct LloydRun {
  std::vector<int> labels;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

// One Lloyd run on the columns of Y from given initial center indices.
// Assignment parallelizes over samples (disjoint label writes, deterministic
// for any thread count); updates, repairs and objectives are sequential in
// ascending index order. Ties break toward the lowest cluster index.
template <class Scalar>
LloydRun<Scalar> lloyd(const Matrix<Scalar>& Y, int K, int max_iter,
                       const std::vector<Index>& init) {
  const Index n = Y.cols();
  const Index r = Y.rows();
  Matrix<Scalar> Mu(r, K);
  for (int k = 0; k < K; ++k) Mu.col(k) = Y.col(init[static_cast<std::size_t>(k)]);

  LloydRun<Scalar> run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<int>& labels = run.labels;

  Matrix<Scalar> sums(r, K);
  std::vector<Index> counts(static_cast<std::size_t>(K), 0);

  for (int it = 0; it < max_iter; ++it) {
    // assign to nearest centroid; ||y||^2 is common to all k and dropped
    Matrix<Scalar> G = Mu.transpose() * Y;                    // K x n
    Vector<Scalar> mu2 = Mu.colwise().squaredNorm();
    std::atomic<bool> changed{false};
    parallel_for(0, n, 1024, [&](Index lo, Index hi) {
      bool local = false;
      for (Index i = lo; i < hi; ++i) {
        int best = 0;
        Scalar score = mu2(0) - Scalar(2) * G(0, i);
        for (int k = 1; k < K; ++k) {
          const Scalar s = mu2(k) - Scalar(2) * G(k, i);
          if (s < score) {
            score = s;
            best = k;
          }
        }
        if (labels[static_cast<std::size_t>(i)] != best) {
          labels[static_cast<std::size_t>(i)] = best;
          local = true;
        }
      }
      if (local) changed.store(true, std::memory_order_relaxed);
    });
    if (!changed.load()) {
      run.iterations = it;
      return run;
    }

    // update
    sums.setZero();
    std::fill(counts.begin(), counts.end(), Index(0));
    for (Index i = 0; i < n; ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      sums.col(l) += Y.col(i);
      ++counts[static_cast<std::size_t>(l)];
    }

    // an empty cluster takes the point farthest from its centroid
    for (int k = 0; k < K; ++k) {
      if (counts[static_cast<std::size_t>(k)] != 0) continue;
      Index far = -1;
      Scalar far_d = Scalar(-1);
      for (Index i = 0; i < n; ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(l)] < 2) continue;
        const Scalar d = (Y.col(i) - Mu.col(l)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      const int old = labels[static_cast<std::size_t>(far)];
      sums.col(old) -= Y.col(far);
      --counts[static_cast<std::size_t>(old)];
      sums.col(k) = Y.col(far);
      counts[static_cast<std::size_t>(k)] = 1;
      labels[static_cast<std::size_t>(far)] = k;
    }
    for (int k = 0; k < K; ++k)
      Mu.col(k) = sums.col(k) / Scalar(counts[static_cast<std::size_t>(k)]);

    double obj = 0.0;
    for (Index i = 0; i < n; ++i)
      obj += static_cast<double>(
          (Y.col(i) - Mu.col(labels[static_cast<std::size_t>(i)])).squaredNorm());
    run.history.push_back(obj);
    run.objective = obj;
    run.iterations = it + 1;
  }
  return run;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding and restarts on the columns of Y.
// Restarts draw from independent streams of the given seed and may execute
// concurrently; the lowest-objective run wins, ties to the lowest restart.
template <class Scalar>
ClusterAssignment kmeans(const Matrix<Scalar>& Y, int K, int restarts = 10,
                         int max_iter = 20, std::uint64_t seed = 0) {
  const Index n = Y.cols();
  if (K < 1 || static_cast<Index>(K) > n)
    throw std::invalid_argument("kmeans: need 1 <= K <= n");
  if (restarts < 1 || max_iter < 1)
    throw std::invalid_argument("kmeans: restarts and max_iter must be >= 1");

  std::vector<detail::LloydRun<Scalar>> runs(static_cast<std::size_t>(restarts));
  parallel_for(0, restarts, 1, [&](Index lo, Index hi) {
    for (Index rr = lo; rr < hi; ++rr) {
      CounterRng rng(seed, Stream::kmeans_seeding, static_cast<std::uint64_t>(rr));
      auto dist2_from = [&](Index c) -> Vector<Scalar> {
        return (Y.colwise() - Y.col(c)).colwise().squaredNorm().transpose();
      };
      const std::vector<Index> init =
          detail::kmeanspp_indices<Scalar>(n, K, rng, dist2_from);
      runs[static_cast<std::size_t>(rr)] = detail::lloyd(Y, K, max_iter, init);
    }
  });

  int best = 0;
  for (int rr = 1; rr < restarts; ++rr)
    if (runs[static_cast<std::size_t>(rr)].objective <
        runs[static_cast<std::size_t>(best)].objective)
      best = rr;
  const auto& win = runs[static_cast<std::size_t>(best)];
  ClusterAssignment out;
  out.labels = win.labels;
  out.clusters = K;
  out.objective = win.objective;
  out.best_restart = best;
  out.iterations = win.iterations;
  out.history = win.history;
  return out;
}

// Kernel K-means objective in trace form: trace((I - C^T C) K (I - C^T C)),
// evaluated as trace(K) - sum_k (within-cluster sum of K) / |S_k|.
template <class Scalar>
double trace_objective(const Matrix<Scalar>& Km, const std::vector<int>& labels) {
  const Index n = Km.rows();
  if (Km.cols() != n) throw std::invalid_argument("trace_objective: kernel matrix not square");
  if (static_cast<Index>(labels.size()) != n)
    throw std::invalid_argument("trace_objective: label count mismatch");
  int K = 0;
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("trace_objective: negative label");
    K = std::max(K, l + 1);
  }
  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(K));
  for (Index i = 0; i < n; ++i)
    groups[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
  double obj = static_cast<double>(Km.trace());
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("trace_objective: empty cluster");
    double s = 0.0;
    for (Index i : g)
      for (Index j : g) s += static_cast<double>(Km(i, j));
    obj -= s / static_cast<double>(g.size());
  }
  return obj;
}

// Full iterative kernel K-means on the materialized kernel matrix, with the
// three-term distance d^2(i,k) = K_ii - 2 s_ik/|S_k| + q_k/|S_k|^2. Restart
// and seeding structure mirror kmeans, so a linear kernel reproduces it.
template <class Scalar>
ClusterAssignment kernel_kmeans_full(const Matrix<Scalar>& X, const KernelSpec& spec, int K,
                                     int max_iter = 20, int restarts = 10,
                                     std::uint64_t seed = 0, Index cap = kDenseCap) {
  const Index n = X.cols();
  if (K < 1 || static_cast<Index>(K) > n)
    throw std::invalid_argument("kernel_kmeans_full: need 1 <= K <= n");
  if (restarts < 1 || max_iter < 1)
    throw std::invalid_argument("kernel_kmeans_full: restarts and max_iter must be >= 1");
  const Matrix<Scalar> Km = kernel_matrix(X, spec, cap);
  const Vector<Scalar> diag = Km.diagonal();
  const double tr = static_cast<double>(Km.trace());

  struct Run {
    std::vector<int> labels;
    double objective = 0.0;
    int iterations = 0;
    std::vector<double> history;
  };
  std::vector<Run> runs(static_cast<std::size_t>(restarts));

  parallel_for(0, restarts, 1, [&](Index lo, Index hi) {
    for (Index rr = lo; rr < hi; ++rr) {
      CounterRng rng(seed, Stream::kmeans_seeding, static_cast<std::uint64_t>(rr));
      auto dist2_from = [&](Index c) -> Vector<Scalar> {
        return (diag.array() + diag(c) - Scalar(2) * Km.col(c).array()).matrix();
      };
      const std::vector<Index> centers =
          detail::kmeanspp_indices<Scalar>(n, K, rng, dist2_from);

      Run& run = runs[static_cast<std::size_t>(rr)];
      run.labels.assign(static_cast<std::size_t>(n), -1);
      std::vector<int>& labels = run.labels;

      Matrix<Scalar> S(n, K);            // s_ik for current memberships
      Vector<Scalar> q(K), inv(K), inv2(K);
      std::vector<Index> counts(static_cast<std::size_t>(K), 0);
      bool boot = true;

      for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
          int best = 0;
          Scalar score;
          if (boot) {
            score = diag(centers[0]) - Scalar(2) * Km(i, centers[0]);
            for (int k = 1; k < K; ++k) {
              const Scalar s = diag(centers[static_cast<std::size_t>(k)]) -
                               Scalar(2) * Km(i, centers[static_cast<std::size_t>(k)]);
              if (s < score) {
                score = s;
                best = k;
              }
            }
          } else {
            score = q(0) * inv2(0) - Scalar(2) * S(i, 0) * inv(0);
            for (int k = 1; k < K; ++k) {
              const Scalar s = q(k) * inv2(k) - Scalar(2) * S(i, k) * inv(k);
              if (s < score) {
                score = s;
                best = k;
              }
            }
          }
          if (labels[static_cast<std::size_t>(i)] != best) {
            labels[static_cast<std::size_t>(i)] = best;
            changed = true;
          }
        }
        boot = false;
        if (!changed) {
          run.iterations = it;
          break;
        }

        auto refresh = [&] {
          Matrix<Scalar> Z = Matrix<Scalar>::Zero(n, K);
          std::fill(counts.begin(), counts.end(), Index(0));
          for (Index i = 0; i < n; ++i) {
            Z(i, labels[static_cast<std::size_t>(i)]) = Scalar(1);
            ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
          }
          S.noalias() = Km * Z;
          for (int k = 0; k < K; ++k) {
            double qq = 0.0;
            for (Index i = 0; i < n; ++i)
              if (labels[static_cast<std::size_t>(i)] == k)
                qq += static_cast<double>(S(i, k));
            q(k) = Scalar(qq);
            const Index c = counts[static_cast<std::size_t>(k)];
            inv(k) = c > 0 ? Scalar(1) / Scalar(c) : Scalar(0);
            inv2(k) = inv(k) * inv(k);
          }
        };
        refresh();

        // empty clusters take the point farthest from its own centroid
        for (int k = 0; k < K; ++k) {
          if (counts[static_cast<std::size_t>(k)] != 0) continue;
          Index far = -1;
          Scalar far_d = Scalar(-1);
          for (Index i = 0; i < n; ++i) {
            const int l = labels[static_cast<std::size_t>(i)];
            if (counts[static_cast<std::size_t>(l)] < 2) continue;
            const Scalar d = diag(i) - Scalar(2) * S(i, l) * inv(l) + q(l) * inv2(l);
            if (d > far_d) {
              far_d = d;
              far = i;
            }
          }
          labels[static_cast<std::size_t>(far)] = k;
          refresh();
        }

        double obj = tr;
        for (int k = 0; k < K; ++k)
          obj -= static_cast<double>(q(k)) * static_cast<double>(inv(k));
        run.history.push_back(obj);
        run.objective = obj;
        run.iterations = it + 1;
      }
    }
  });

  int best = 0;
  for (int rr = 1; rr < restarts; ++rr)
    if (runs[static_cast<std::size_t>(rr)].objective <
        runs[static_cast<std::size_t>(best)].objective)
      best = rr;
  const auto& win = runs[static_cast<std::size_t>(best)];
  ClusterAssignment out;
  out.labels = win.labels;
  out.clusters = K;
  out.objective = win.objective;
  out.best_restart = best;
  out.iterations = win.iterations;
  out.history = win.history;
  return out;
}

// Exact minimizer of trace_objective over all surjective labelings, by
// enumeration. Small instances only.
template <class Scalar>
ClusterAssignment brute_force_optimal(const Matrix<Scalar>& Km, int Kc) {
  const Index n = Km.rows();
  if (Km.cols() != n) throw std::invalid_argument("brute_force_optimal: matrix not square");
  if (n < 1 || n > 12) throw std::invalid_argument("brute_force_optimal: n must be in [1, 12]");
  if (Kc < 1 || Kc > 3) throw std::invalid_argument("brute_force_optimal: K must be in [1, 3]");
  if (static_cast<Index>(Kc) > n)
    throw std::invalid_argument("brute_force_optimal: K exceeds n");

  const double tr = static_cast<double>(Km.trace());
  std::vector<int> lab(static_cast<std::size_t>(n), 0);
  std::vector<int> best_lab;
  double best_obj = 0.0;
  bool have = false;

  std::uint64_t total = 1;
  for (Index i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(Kc);

  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    int seen_mask = 0;
    for (Index i = 0; i < n; ++i) {
      lab[static_cast<std::size_t>(i)] = static_cast<int>(c % Kc);
      seen_mask |= 1 << lab[static_cast<std::size_t>(i)];
      c /= Kc;
    }
    if (seen_mask != (1 << Kc) - 1) continue;

    double within[3] = {0, 0, 0};
    Index cnt[3] = {0, 0, 0};
    for (Index i = 0; i < n; ++i) ++cnt[lab[static_cast<std::size_t>(i)]];
    for (Index i = 0; i < n; ++i) {
      const int li = lab[static_cast<std::size_t>(i)];
      for (Index j = 0; j < n; ++j)
        if (lab[static_cast<std::size_t>(j)] == li) within[li] += static_cast<double>(Km(i, j));
    }
    double obj = tr;
    for (int k = 0; k < Kc; ++k) obj -= within[k] / static_cast<double>(cnt[k]);
    if (!have || obj < best_obj) {
      have = true;
      best_obj = obj;
      best_lab = lab;
    }
  }

  ClusterAssignment out;
  out.labels = best_lab;
  out.clusters = Kc;
  out.objective = best_obj;
  return out;
}

}  // namespace opkm
