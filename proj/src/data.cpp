#include "opkm/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>
#include <unordered_map>

#include "opkm/rng.hpp"

namespace opkm {

LabeledDataset generate_rings(Index n, const std::vector<double>& radii,
                              double noise_sigma, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_rings: n must be positive");
  if (radii.empty()) throw std::invalid_argument("generate_rings: need at least one radius");
  for (double r : radii)
    if (!(r > 0.0)) throw std::invalid_argument("generate_rings: radii must be positive");
  if (noise_sigma < 0.0) throw std::invalid_argument("generate_rings: negative noise");
  const Index R = static_cast<Index>(radii.size());
  if (n < R) throw std::invalid_argument("generate_rings: fewer points than rings");

  LabeledDataset ds;
  ds.X.resize(2, n);
  ds.truth.resize(static_cast<std::size_t>(n));
  ds.has_truth = true;
  ds.name = "rings:" + std::to_string(n);

  constexpr double two_pi = 6.283185307179586476925286766559;
  Index at = 0;
  for (Index k = 0; k < R; ++k) {
    Index cnt = n / R + (k < n % R ? 1 : 0);
    CounterRng rng(seed, Stream::rings, static_cast<std::uint64_t>(k));
    for (Index i = 0; i < cnt; ++i, ++at) {
      const double angle = two_pi * rng.uniform01();
      const double rad = radii[static_cast<std::size_t>(k)] + noise_sigma * rng.gaussian();
      ds.X(0, at) = rad * std::cos(angle);
      ds.X(1, at) = rad * std::sin(angle);
      ds.truth[static_cast<std::size_t>(at)] = static_cast<int>(k);
    }
  }
  return ds;
}

namespace {

// trims spaces, tabs and a trailing CR
std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

double parse_field(std::string_view f, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = f.data();
  const char* last = f.data() + f.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw data_error("load_csv: cannot parse numeric field at row " + std::to_string(row) +
                     ", column " + std::to_string(col));
  return v;
}

}  // namespace

LabeledDataset load_csv(const std::string& path, int label_col, int skip_rows) {
  if (skip_rows < 0) throw std::invalid_argument("load_csv: negative skip_rows");
  std::ifstream in(path);
  if (!in) throw data_error("load_csv: cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;     // feature rows
  std::vector<std::string> raw_labels;
  std::string line;
  std::size_t lineno = 0;
  std::size_t arity = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (lineno <= static_cast<std::size_t>(skip_rows)) continue;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = sv.find(',', start);
      fields.push_back(trim(sv.substr(start, comma == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    if (arity == 0) {
      arity = fields.size();
      if (label_col >= 0 && static_cast<std::size_t>(label_col) >= arity)
        throw data_error("load_csv: label column " + std::to_string(label_col) +
                         " out of range for " + std::to_string(arity) + " columns");
      if (arity - (label_col >= 0 ? 1 : 0) == 0)
        throw data_error("load_csv: no feature columns");
    } else if (fields.size() != arity) {
      throw data_error("load_csv: row " + std::to_string(lineno) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(arity));
    }

    std::vector<double> feat;
    feat.reserve(arity);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (label_col >= 0 && c == static_cast<std::size_t>(label_col)) {
        raw_labels.emplace_back(fields[c]);
        continue;
      }
      feat.push_back(parse_field(fields[c], lineno, c + 1));
    }
    rows.push_back(std::move(feat));
  }

  if (rows.empty()) throw data_error("load_csv: no data rows in '" + path + "'");

  LabeledDataset ds;
  const Index n = static_cast<Index>(rows.size());
  const Index p = static_cast<Index>(rows.front().size());
  ds.X.resize(p, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < p; ++i)
      ds.X(i, j) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];

  if (label_col >= 0) {
    ds.has_truth = true;
    ds.truth.reserve(rows.size());
    std::unordered_map<std::string, int> ids;
    for (const std::string& s : raw_labels) {
      auto it = ids.find(s);
      if (it == ids.end()) it = ids.emplace(s, static_cast<int>(ids.size())).first;
      ds.truth.push_back(it->second);
    }
  }
  ds.name = path;
  return ds;
}

std::vector<Index> normalize_rows_unit_l2(Matrix<double>& X) {
  std::vector<Index> zeros;
  for (Index j = 0; j < X.cols(); ++j) {
    const double norm = X.col(j).norm();
    if (norm == 0.0)
      zeros.push_back(j);
    else
      X.col(j) /= norm;
  }
  return zeros;
}

}  // namespace opkm
