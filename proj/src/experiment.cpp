#include "opkm/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "opkm/cluster.hpp"
#include "opkm/metrics.hpp"
#include "opkm/parallel.hpp"
#include "opkm/rng.hpp"

namespace opkm {

namespace {

int to_int(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("cannot parse ") + what + " '" + s + "'");
  }
}

long long to_ll(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("cannot parse ") + what + " '" + s + "'");
  }
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("cannot parse ") + what + " '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    parts.push_back(s.substr(start, at == std::string::npos ? std::string::npos : at - start));
    if (at == std::string::npos) break;
    start = at + 1;
  }
  return parts;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw data_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw data_error("failed writing '" + path + "'");
}

std::string g10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::size_t bytes_of(Index a, Index b) {
  return static_cast<std::size_t>(a) * static_cast<std::size_t>(b) * sizeof(double);
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "one-pass") return Method::one_pass;
  if (name == "gaussian") return Method::gaussian;
  if (name == "nystrom") return Method::nystrom;
  if (name == "exact") return Method::exact;
  if (name == "full-kkm") return Method::full_kkm;
  if (name == "raw-kmeans") return Method::raw_kmeans;
  throw std::invalid_argument("unknown method '" + name +
                              "' (one-pass|gaussian|nystrom|exact|full-kkm|raw-kmeans)");
}

std::string method_label(Method m) {
  switch (m) {
    case Method::one_pass: return "one-pass";
    case Method::gaussian: return "gaussian";
    case Method::nystrom: return "nystrom";
    case Method::exact: return "exact";
    case Method::full_kkm: return "full-kkm";
    case Method::raw_kmeans: return "raw-kmeans";
  }
  return "?";
}

KernelSpec parse_kernel(const std::string& text) {
  const std::vector<std::string> parts = split(text, ':');
  if (parts[0] == "poly") {
    if (parts.size() < 2 || parts.size() > 3)
      throw std::invalid_argument("kernel '" + text + "': expected poly:D or poly:D:GAMMA");
    const int d = to_int(parts[1], "polynomial degree");
    const double gamma = parts.size() == 3 ? to_double(parts[2], "polynomial offset") : 0.0;
    return KernelSpec::poly(d, gamma);
  }
  if (parts[0] == "rbf") {
    if (parts.size() != 2)
      throw std::invalid_argument("kernel '" + text + "': expected rbf:GAMMA");
    return KernelSpec::rbf(to_double(parts[1], "rbf bandwidth"));
  }
  throw std::invalid_argument("unknown kernel family '" + parts[0] + "' (poly|rbf)");
}

LabeledDataset resolve_dataset(const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  if (!cfg.generate.empty() && !cfg.data_path.empty())
    throw std::invalid_argument("--generate and --data are mutually exclusive");
  LabeledDataset ds;
  if (!cfg.generate.empty()) {
    const std::size_t colon = cfg.generate.find(':');
    const std::string name = cfg.generate.substr(0, colon);
    if (name != "rings" || colon == std::string::npos)
      throw std::invalid_argument("unknown generator '" + cfg.generate +
                                  "' (expected rings:N)");
    const long long n = to_ll(cfg.generate.substr(colon + 1), "generator size");
    if (n < 1) throw std::invalid_argument("generator size must be positive");
    ds = generate_rings(static_cast<Index>(n), {0.4, 2.0}, 0.1, trial_seed);
  } else if (!cfg.data_path.empty()) {
    ds = load_csv(cfg.data_path, cfg.label_col, cfg.skip_rows);
  } else {
    throw std::invalid_argument("need --generate NAME:N or --data PATH");
  }
  if (cfg.normalize) normalize_rows_unit_l2(ds.X);
  return ds;
}

RunResult run_single(const LabeledDataset& ds, Method method, const ExperimentConfig& cfg,
                     std::uint64_t trial_seed, Index m) {
  const Matrix<double>& X = ds.X;
  const Index n = X.cols();
  RunResult res;
  res.method = method;
  res.seed = trial_seed;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<int> labels;
  LowRankFactor<double> factor;
  bool have_factor = false;

  switch (method) {
    case Method::one_pass:
    case Method::gaussian: {
      SketchConfig sc;
      sc.rank = cfg.rank;
      sc.oversample = cfg.oversample;
      sc.seed = trial_seed;
      sc.block = cfg.block;
      sc.method = method == Method::one_pass ? SketchMethod::one_pass_srht
                                             : SketchMethod::one_pass_gaussian;
      SketchStats stats;
      factor = one_pass_sketch(X, cfg.kernel, sc, &stats);
      have_factor = true;
      res.has_r = res.has_l = true;
      res.r = cfg.rank;
      res.l = cfg.oversample;
      res.peak_block_memory_bytes = stats.peak_bytes;
      break;
    }
    case Method::nystrom: {
      if (m < 1) throw std::invalid_argument("nystrom requires --samples");
      factor = nystrom(X, cfg.kernel, m, cfg.rank, trial_seed);
      have_factor = true;
      res.has_r = res.has_m = true;
      res.r = cfg.rank;
      res.m = m;
      res.peak_block_memory_bytes = bytes_of(n, m) + bytes_of(m, m) + bytes_of(cfg.rank, n);
      break;
    }
    case Method::exact: {
      factor = exact_truncated(X, cfg.kernel, cfg.rank);
      have_factor = true;
      res.has_r = true;
      res.r = cfg.rank;
      res.peak_block_memory_bytes = bytes_of(n, n) + bytes_of(cfg.rank, n);
      break;
    }
    case Method::full_kkm: {
      ClusterAssignment a = kernel_kmeans_full(X, cfg.kernel, cfg.clusters, cfg.max_iter,
                                               cfg.restarts, trial_seed);
      labels = std::move(a.labels);
      res.objective = a.objective;
      res.peak_block_memory_bytes = bytes_of(n, n) + 2 * bytes_of(n, cfg.clusters);
      break;
    }
    case Method::raw_kmeans: {
      ClusterAssignment a = kmeans(X, cfg.clusters, cfg.restarts, cfg.max_iter, trial_seed);
      labels = std::move(a.labels);
      res.objective = a.objective;
      res.peak_block_memory_bytes = bytes_of(X.rows(), n) + bytes_of(X.rows(), cfg.clusters);
      break;
    }
  }

  if (have_factor) {
    ClusterAssignment a =
        kmeans(factor.Y, cfg.clusters, cfg.restarts, cfg.max_iter, trial_seed);
    labels = std::move(a.labels);
    res.objective = a.objective;
  }

  const auto t1 = std::chrono::steady_clock::now();
  res.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  if (have_factor) {
    res.has_error = true;
    res.approx_error = approx_error(X, cfg.kernel, factor, cfg.block);
  }
  if (ds.has_truth) {
    res.has_accuracy = true;
    res.accuracy = clustering_accuracy(labels, ds.truth);
  }
  return res;
}

std::string result_json(const RunResult& res) {
  nlohmann::ordered_json j;
  j["method"] = method_label(res.method);
  if (res.has_r) j["r"] = res.r;
  if (res.has_l) j["l"] = res.l;
  if (res.has_m) j["m"] = static_cast<std::int64_t>(res.m);
  j["seed"] = res.seed;
  if (res.has_error) j["approx_error"] = res.approx_error;
  if (res.has_accuracy) j["accuracy"] = res.accuracy;
  j["objective"] = res.objective;
  j["wall_time_ms"] = res.wall_time_ms;
  j["peak_block_memory_bytes"] = res.peak_block_memory_bytes;
  return j.dump(2) + "\n";
}

int cmd_cluster(const ExperimentConfig& cfg) {
  if (cfg.methods.size() != 1)
    throw std::invalid_argument("cluster takes exactly one --method");
  Index m = 0;
  if (cfg.methods[0] == Method::nystrom) {
    if (cfg.samples.size() != 1)
      throw std::invalid_argument("nystrom takes exactly one --samples value here");
    m = cfg.samples[0];
  }
  const LabeledDataset ds = resolve_dataset(cfg, cfg.seed);
  const RunResult res = run_single(ds, cfg.methods[0], cfg, cfg.seed, m);
  write_output(cfg.out, result_json(res));
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw std::invalid_argument("compare needs at least one --method");
  if (cfg.trials < 1) throw std::invalid_argument("compare needs --trials >= 1");

  struct Cell {
    Method method;
    Index samples;  // CSV samples column: m, r+l, r, or 0 for the baselines
    Index m;        // nystrom budget, 0 otherwise
  };
  std::vector<Cell> cells;
  for (Method method : cfg.methods) {
    switch (method) {
      case Method::nystrom: {
        if (cfg.samples.empty())
          throw std::invalid_argument("nystrom requires --samples (a comma list sweeps m)");
        std::vector<Index> grid = cfg.samples;
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        for (Index m : grid) cells.push_back({method, m, m});
        break;
      }
      case Method::one_pass:
      case Method::gaussian:
        cells.push_back({method, static_cast<Index>(cfg.rank + cfg.oversample), 0});
        break;
      case Method::exact:
        cells.push_back({method, static_cast<Index>(cfg.rank), 0});
        break;
      case Method::full_kkm:
      case Method::raw_kmeans:
        cells.push_back({method, 0, 0});
        break;
    }
  }

  std::optional<LabeledDataset> file_ds;
  if (!cfg.data_path.empty()) file_ds = resolve_dataset(cfg, cfg.seed);

  const int T = cfg.trials;
  std::vector<std::vector<RunResult>> results(
      cells.size(), std::vector<RunResult>(static_cast<std::size_t>(T)));

  parallel_for(0, T, 1, [&](Index lo, Index hi) {
    for (Index t = lo; t < hi; ++t) {
      const std::uint64_t ts = cfg.seed + static_cast<std::uint64_t>(t);
      LabeledDataset gen;
      if (!file_ds) gen = resolve_dataset(cfg, ts);
      const LabeledDataset& ds = file_ds ? *file_ds : gen;
      for (std::size_t c = 0; c < cells.size(); ++c)
        results[c][static_cast<std::size_t>(t)] =
            run_single(ds, cells[c].method, cfg, ts, cells[c].m);
    }
  });

  std::ostringstream csv;
  csv << "method,samples,trial,approx_error,accuracy\n";
  const double nan = std::nan("");
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::string label = method_label(cells[c].method);
    double err_sum = 0.0, acc_sum = 0.0;
    bool err_all = true, acc_all = true;
    for (int t = 0; t < T; ++t) {
      const RunResult& r = results[c][static_cast<std::size_t>(t)];
      const double err = r.has_error ? r.approx_error : nan;
      const double acc = r.has_accuracy ? r.accuracy : nan;
      err_all = err_all && r.has_error;
      acc_all = acc_all && r.has_accuracy;
      err_sum += err;
      acc_sum += acc;
      csv << label << ',' << cells[c].samples << ',' << t << ',' << g10(err) << ','
          << g10(acc) << '\n';
    }
    csv << label << ',' << cells[c].samples << ",mean,"
        << g10(err_all ? err_sum / T : nan) << ',' << g10(acc_all ? acc_sum / T : nan)
        << '\n';
  }
  write_output(cfg.out, csv.str());
  return 0;
}

int cmd_bound_check(const BoundCheckConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("bound-check needs --trials >= 1");
  const Index n = cfg.points;
  if (n < 2 || n > 12)
    throw std::invalid_argument("bound-check: points must be in [2, 12] for the oracle");
  if (cfg.clusters < 1 || cfg.clusters > 3)
    throw std::invalid_argument("bound-check: clusters must be in [1, 3] for the oracle");
  if (cfg.method == Method::full_kkm || cfg.method == Method::raw_kmeans)
    throw std::invalid_argument("bound-check needs an approximation method");

  std::ostringstream rep;
  int violations = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    CounterRng rng(cfg.seed, Stream::bound_check, static_cast<std::uint64_t>(t));
    Matrix<double> X(3, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < 3; ++i) X(i, j) = rng.gaussian();
    const KernelSpec spec = cfg.kernel_fixed
                                ? cfg.kernel
                                : (t % 2 == 0 ? KernelSpec::poly(2) : KernelSpec::rbf(1.0));
    const Matrix<double> K = kernel_matrix(X, spec, kDenseCap);
    const std::uint64_t ts = cfg.seed + static_cast<std::uint64_t>(t);

    LowRankFactor<double> factor;
    switch (cfg.method) {
      case Method::one_pass:
      case Method::gaussian: {
        SketchConfig sc;
        sc.rank = cfg.rank;
        sc.oversample = cfg.oversample;
        sc.seed = ts;
        sc.method = cfg.method == Method::one_pass ? SketchMethod::one_pass_srht
                                                   : SketchMethod::one_pass_gaussian;
        factor = one_pass_sketch(X, spec, sc);
        break;
      }
      case Method::nystrom:
        if (cfg.samples < 1) throw std::invalid_argument("nystrom requires --samples");
        factor = nystrom(X, spec, cfg.samples, cfg.rank, ts);
        break;
      case Method::exact:
        factor = exact_truncated(X, spec, cfg.rank);
        break;
      default:
        break;
    }

    const Matrix<double> Kh = factor.Y.transpose() * factor.Y;
    const ClusterAssignment chat = brute_force_optimal(Kh, cfg.clusters);
    const double l_hat = trace_objective(K, chat.labels);
    const double l_opt = brute_force_optimal(K, cfg.clusters).objective;
    const ErrorFunctionals ef = error_functionals(K, Kh);
    const double gap = l_hat - l_opt;

    const bool eq9 = gap <= 2.0 * ef.trace_norm + 1e-8;
    const bool check10 = cfg.method == Method::exact;
    const bool eq10 = !check10 || gap <= ef.trace + 1e-8;
    if (!eq9 || !eq10) ++violations;

    rep << "trial " << t << ": n=" << n << " kernel=" << spec.name()
        << " L_hat=" << g10(l_hat) << " L_opt=" << g10(l_opt)
        << " 2||E||_*=" << g10(2.0 * ef.trace_norm) << " trace(E)=" << g10(ef.trace)
        << " eq9=" << (eq9 ? "PASS" : "FAIL");
    if (check10) rep << " eq10=" << (eq10 ? "PASS" : "FAIL");
    rep << '\n';
  }
  rep << "trials=" << cfg.trials << " violations=" << violations << '\n';
  write_output(cfg.out, rep.str());
  return violations == 0 ? 0 : 4;
}

}  // namespace opkm
