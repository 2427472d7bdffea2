#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "opkm/experiment.hpp"
#include "opkm/parallel.hpp"

namespace {

struct Flags {
  std::string generate, data, kernel = "poly:2", out;
  std::vector<std::string> methods;
  int label_col = -1;
  int skip_rows = 0;
  bool normalize = false;
  int rank = 2;
  int oversample = 0;
  int clusters = 2;
  int restarts = 10;
  int max_iter = 20;
  int trials = 1;
  std::vector<long long> samples;
  std::uint64_t seed = 0;
  int threads = 0;
  int points = 8;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--generate", f.generate, "synthetic dataset NAME:N (generators: rings)");
  sub->add_option("--data", f.data, "CSV dataset path");
  sub->add_option("--label-col", f.label_col, "ground-truth column index in the CSV");
  sub->add_option("--skip-rows", f.skip_rows, "leading lines to skip (headers)");
  sub->add_flag("--normalize", f.normalize, "scale each sample to unit l2 norm");
  sub->add_option("--kernel", f.kernel, "poly:D[:GAMMA] | rbf:GAMMA (default poly:2)");
  sub->add_option("--method", f.methods,
                  "one-pass|gaussian|nystrom|exact|full-kkm|raw-kmeans (repeat or "
                  "comma-separate for sweeps)")
      ->delimiter(',');
  sub->add_option("--rank", f.rank, "target rank r");
  sub->add_option("--oversample", f.oversample, "extra sketch columns l (r' = r + l)");
  sub->add_option("--samples", f.samples, "nystrom column budget m (comma list sweeps)")
      ->delimiter(',');
  sub->add_option("--clusters", f.clusters, "number of clusters K");
  sub->add_option("--restarts", f.restarts, "k-means restarts");
  sub->add_option("--max-iter", f.max_iter, "Lloyd iteration cap");
  sub->add_option("--trials", f.trials, "independent trials");
  sub->add_option("--seed", f.seed, "base random seed");
  sub->add_option("--threads", f.threads, "worker threads (default: hardware)");
  sub->add_option("--out", f.out, "output path (default: stdout)");
}

opkm::ExperimentConfig experiment_config(const Flags& f) {
  opkm::ExperimentConfig cfg;
  cfg.generate = f.generate;
  cfg.data_path = f.data;
  cfg.label_col = f.label_col;
  cfg.skip_rows = f.skip_rows;
  cfg.normalize = f.normalize;
  cfg.kernel = opkm::parse_kernel(f.kernel);
  for (const std::string& m : f.methods) cfg.methods.push_back(opkm::parse_method(m));
  cfg.rank = f.rank;
  cfg.oversample = f.oversample;
  for (long long m : f.samples) {
    if (m < 1) throw std::invalid_argument("--samples values must be >= 1");
    cfg.samples.push_back(static_cast<opkm::Index>(m));
  }
  cfg.clusters = f.clusters;
  cfg.restarts = f.restarts;
  cfg.max_iter = f.max_iter;
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  cfg.out = f.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memory-frugal kernel k-means: one-pass sketches, baselines, bound checks"};
  app.require_subcommand(1);

  Flags fc, fs, fb;
  fb.trials = 200;

  CLI::App* cluster = app.add_subcommand("cluster", "run one method once, emit JSON");
  add_common(cluster, fc);
  CLI::App* compare = app.add_subcommand("compare", "sweep methods over trials, emit CSV");
  add_common(compare, fs);
  CLI::App* bound =
      app.add_subcommand("bound-check", "verify the clustering-loss bound on small instances");
  add_common(bound, fb);
  bound->add_option("--points", fb.points, "points per generated instance (2..12)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const Flags& f = cluster->parsed() ? fc : compare->parsed() ? fs : fb;
    if (f.threads < 0) throw std::invalid_argument("--threads must be >= 1");
    if (f.threads > 0) opkm::ThreadPool::set_default_threads(static_cast<unsigned>(f.threads));

    if (cluster->parsed()) return opkm::cmd_cluster(experiment_config(fc));
    if (compare->parsed()) return opkm::cmd_compare(experiment_config(fs));

    opkm::BoundCheckConfig bc;
    bc.trials = fb.trials;
    bc.points = fb.points;
    bc.rank = fb.rank;
    bc.oversample = fb.oversample;
    bc.clusters = fb.clusters;
    bc.seed = fb.seed;
    bc.out = fb.out;
    if (!fb.samples.empty()) bc.samples = static_cast<opkm::Index>(fb.samples.front());
    if (fb.methods.size() > 1)
      throw std::invalid_argument("bound-check takes at most one --method");
    if (!fb.methods.empty()) bc.method = opkm::parse_method(fb.methods.front());
    if (bound->count("--kernel") > 0) {
      bc.kernel_fixed = true;
      bc.kernel = opkm::parse_kernel(fb.kernel);
    }
    return opkm::cmd_bound_check(bc);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const opkm::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const opkm::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
