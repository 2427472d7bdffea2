#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opkm/approx.hpp"
#include "opkm/data.hpp"
#include "opkm/kernel.hpp"

namespace opkm {

// Everything the CLI can run, including the two non-sketching baselines.
enum class Method { one_pass, gaussian, nystrom, exact, full_kkm, raw_kmeans };

Method parse_method(const std::string& name);
std::string method_label(Method m);

// "poly:D", "poly:D:GAMMA" or "rbf:GAMMA"
KernelSpec parse_kernel(const std::string& text);

struct ExperimentConfig {
  std::string generate;         // "rings:N"; mutually exclusive with data_path
  std::string data_path;
  int label_col = -1;
  int skip_rows = 0;
  bool normalize = false;       // unit l2 per sample after loading

  KernelSpec kernel = KernelSpec::poly(2);
  std::vector<Method> methods;
  int rank = 2;
  int oversample = 0;
  std::vector<Index> samples;   // nystrom m values; a grid in sweeps
  int clusters = 2;
  int restarts = 10;
  int max_iter = 20;
  int trials = 1;
  std::uint64_t seed = 0;
  Index block = kDefaultBlock;
  std::string out;              // empty = stdout
};

struct RunResult {
  Method method = Method::one_pass;
  int r = 0;
  int l = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  bool has_r = false, has_l = false, has_m = false;
  bool has_error = false, has_accuracy = false;
  double approx_error = 0.0;
  double accuracy = 0.0;
  double objective = 0.0;
  double wall_time_ms = 0.0;
  std::size_t peak_block_memory_bytes = 0;
};

// Dataset named by the config: generated sets are drawn from trial_seed,
// file sets are loaded as-is.
LabeledDataset resolve_dataset(const ExperimentConfig& cfg, std::uint64_t trial_seed);

// One (method, dataset, seed) pipeline run: linearize, cluster, score.
// m is the nystrom column budget and is ignored by the other methods.
RunResult run_single(const LabeledDataset& ds, Method method, const ExperimentConfig& cfg,
                     std::uint64_t trial_seed, Index m);

std::string result_json(const RunResult& res);

int cmd_cluster(const ExperimentConfig& cfg);
int cmd_compare(const ExperimentConfig& cfg);

struct BoundCheckConfig {
  int trials = 200;
  Index points = 8;            // samples per generated instance
  int rank = 2;
  int oversample = 2;
  Index samples = 0;           // nystrom budget when method = nystrom
  int clusters = 2;
  Method method = Method::one_pass;
  bool kernel_fixed = false;   // when false, trials alternate poly:2 / rbf:1
  KernelSpec kernel = KernelSpec::poly(2);
  std::uint64_t seed = 0;
  std::string out;
};

// Clustering-loss bound checker against the brute-force partition oracle.
// Returns 0 when every trial satisfies the bound, 4 otherwise.
int cmd_bound_check(const BoundCheckConfig& cfg);

}  // namespace opkm
