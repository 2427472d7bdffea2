#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "opkm/data.hpp"
#include "opkm/rng.hpp"

using opkm::Index;
using opkm::LabeledDataset;
using opkm::Matrix;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("noiseless rings lie exactly on their circles") {
  LabeledDataset ds = opkm::generate_rings(40, {1.0, 2.5}, 0.0, 3);
  REQUIRE(ds.X.cols() == 40);
  REQUIRE(ds.has_truth);
  for (Index i = 0; i < 40; ++i) {
    const double want = ds.truth[static_cast<std::size_t>(i)] == 0 ? 1.0 : 2.5;
    CHECK(ds.X.col(i).norm() == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("ring populations are balanced") {
  LabeledDataset ds = opkm::generate_rings(1000, {1.0, 2.0}, 0.1, 0);
  int c0 = 0, c1 = 0;
  for (int l : ds.truth) (l == 0 ? c0 : c1)++;
  CHECK(c0 == 500);
  CHECK(c1 == 500);

  LabeledDataset ds3 = opkm::generate_rings(10, {1, 2, 3}, 0.0, 0);
  int counts[3] = {0, 0, 0};
  for (int l : ds3.truth) ++counts[l];
  CHECK(counts[0] == 4);
  CHECK(counts[1] == 3);
  CHECK(counts[2] == 3);
}

TEST_CASE("ring generation is deterministic in the seed") {
  LabeledDataset a = opkm::generate_rings(64, {0.4, 2.0}, 0.1, 9);
  LabeledDataset b = opkm::generate_rings(64, {0.4, 2.0}, 0.1, 9);
  CHECK((a.X.array() == b.X.array()).all());
  LabeledDataset c = opkm::generate_rings(64, {0.4, 2.0}, 0.1, 10);
  CHECK_FALSE((a.X.array() == c.X.array()).all());
}

TEST_CASE("ring generator validates arguments") {
  CHECK_THROWS_AS(opkm::generate_rings(0, {1.0}, 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(opkm::generate_rings(10, {}, 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(opkm::generate_rings(10, {1.0, -2.0}, 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(opkm::generate_rings(10, {1.0}, -0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(opkm::generate_rings(1, {1.0, 2.0}, 0.1, 0), std::invalid_argument);
}

TEST_CASE("normalization scales samples to unit norm") {
  Matrix<double> X(2, 3);
  X << 3, 0, 1, 4, 0, 1;
  const std::vector<Index> zeros = opkm::normalize_rows_unit_l2(X);
  CHECK(X(0, 0) == doctest::Approx(0.6));
  CHECK(X(1, 0) == doctest::Approx(0.8));
  REQUIRE(zeros.size() == 1);
  CHECK(zeros[0] == 1);
  CHECK(X(0, 1) == 0.0);
  CHECK(X.col(2).norm() == doctest::Approx(1.0).epsilon(1e-12));

  // idempotent
  Matrix<double> Y = X;
  opkm::normalize_rows_unit_l2(Y);
  CHECK((Y - X).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("csv loading with a label column") {
  TempFile f("opkm_test_labels.csv",
             "1.5,2.5,cement\n"
             "3.5,4.5,grass\n"
             "\n"
             "5.5,6.5,cement\n");
  LabeledDataset ds = opkm::load_csv(f.path, 2);
  REQUIRE(ds.X.cols() == 3);
  REQUIRE(ds.X.rows() == 2);
  CHECK(ds.has_truth);
  CHECK(ds.truth == std::vector<int>{0, 1, 0});  // first-appearance ids
  CHECK(ds.X(0, 1) == doctest::Approx(3.5));
  CHECK(ds.X(1, 2) == doctest::Approx(6.5));
}

TEST_CASE("csv loading without labels and with skipped headers") {
  TempFile f("opkm_test_skip.csv",
             "header line one\n"
             "header line two\n"
             "1,2\n"
             "3,4\n");
  LabeledDataset ds = opkm::load_csv(f.path, -1, 2);
  CHECK_FALSE(ds.has_truth);
  REQUIRE(ds.X.cols() == 2);
  CHECK(ds.X(0, 0) == doctest::Approx(1.0));
  CHECK(ds.X(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("csv round-trips written values bitwise") {
  opkm::CounterRng rng(5, 908);
  Matrix<double> X(3, 7);
  for (Index j = 0; j < 7; ++j)
    for (Index i = 0; i < 3; ++i) X(i, j) = rng.gaussian();

  std::string content;
  char buf[64];
  for (Index j = 0; j < 7; ++j) {
    for (Index i = 0; i < 3; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", X(i, j));
      content += buf;
      content += i + 1 < 3 ? "," : "\n";
    }
  }
  TempFile f("opkm_test_roundtrip.csv", content);
  LabeledDataset ds = opkm::load_csv(f.path);
  REQUIRE(ds.X.rows() == 3);
  REQUIRE(ds.X.cols() == 7);
  CHECK((ds.X.array() == X.array()).all());
}

TEST_CASE("single-row file without labels") {
  TempFile f("opkm_test_single.csv", "1,2,3\n");
  LabeledDataset ds = opkm::load_csv(f.path);
  CHECK(ds.X.cols() == 1);
  CHECK(ds.X.rows() == 3);
  CHECK_FALSE(ds.has_truth);
}

TEST_CASE("csv errors carry coordinates") {
  TempFile ragged("opkm_test_ragged.csv", "1,2\n3,4,5\n");
  try {
    opkm::load_csv(ragged.path);
    FAIL("expected data_error");
  } catch (const opkm::data_error& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }

  TempFile bad("opkm_test_badnum.csv", "1,2\n3,oops\n");
  try {
    opkm::load_csv(bad.path);
    FAIL("expected data_error");
  } catch (const opkm::data_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
}

TEST_CASE("csv structural errors") {
  CHECK_THROWS_AS(opkm::load_csv("opkm_no_such_file.csv"), opkm::data_error);

  TempFile empty("opkm_test_empty.csv", "\n\n");
  CHECK_THROWS_AS(opkm::load_csv(empty.path), opkm::data_error);

  TempFile two("opkm_test_two.csv", "1,2\n3,4\n");
  CHECK_THROWS_AS(opkm::load_csv(two.path, 5), opkm::data_error);

  TempFile only_label("opkm_test_onlylabel.csv", "a\nb\n");
  CHECK_THROWS_AS(opkm::load_csv(only_label.path, 0), opkm::data_error);
}
