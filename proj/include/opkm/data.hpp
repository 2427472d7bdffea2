#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opkm/core.hpp"

namespace opkm {

struct LabeledDataset {
  Matrix<double> X;          // p x n, one sample per column
  std::vector<int> truth;    // empty when has_truth is false
  bool has_truth = false;
  std::string name;
};

// Concentric noisy rings in R^2: radii.size() rings, n split as evenly as
// possible (earlier rings take the remainder), angle uniform in [0, 2pi),
// radius = radii[k] + N(0, noise_sigma^2). Labels are ring indices. Each
// ring draws from its own counter stream of the seed, so the point layout
// is reproducible and independent of evaluation order.
LabeledDataset generate_rings(Index n, const std::vector<double>& radii,
                              double noise_sigma, std::uint64_t seed);

// Comma-separated loader. skip_rows leading lines are dropped (headers),
// blank lines are ignored, every remaining row must have the same arity.
// label_col >= 0 designates a label column; its values (arbitrary strings)
// map to ids 0,1,2,... in order of first appearance. Parse failures raise
// data_error naming the 1-based row and column.
LabeledDataset load_csv(const std::string& path, int label_col = -1, int skip_rows = 0);

// Scale every sample (column) to unit l2 norm, in place. Zero samples are
// left untouched; their indices are returned instead of raising.
std::vector<Index> normalize_rows_unit_l2(Matrix<double>& X);

}  // namespace opkm
