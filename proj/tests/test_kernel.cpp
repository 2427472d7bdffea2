#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "opkm/kernel.hpp"
#include "opkm/rng.hpp"

using opkm::Index;
using opkm::KernelSpec;
using opkm::Matrix;
using opkm::Vector;

namespace {

Matrix<double> random_matrix(Index rows, Index cols, std::uint64_t seed) {
  opkm::CounterRng rng(seed, 901);
  Matrix<double> M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = rng.gaussian();
  return M;
}

}  // namespace

TEST_CASE("polynomial kernel entries") {
  Vector<double> x(2), y(2);
  x << 1, 2;
  y << 3, 4;
  CHECK(opkm::kernel_entry(x, y, KernelSpec::poly(2)) == doctest::Approx(121.0));
  CHECK(opkm::kernel_entry(x, y, KernelSpec::poly(1)) == doctest::Approx(11.0));
  CHECK(opkm::kernel_entry(x, y, KernelSpec::poly(2, 1.0)) == doctest::Approx(144.0));
}

TEST_CASE("rbf kernel entries") {
  Vector<double> x(3), y(3);
  x << 0.3, -1.2, 2.0;
  y = x;
  CHECK(opkm::kernel_entry(x, y, KernelSpec::rbf(1.0)) == doctest::Approx(1.0));
  y << 0.3, -1.2, 1.0;
  CHECK(opkm::kernel_entry(x, y, KernelSpec::rbf(0.5)) ==
        doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("kernel_entry rejects dimension mismatch") {
  Vector<double> x(2), y(3);
  x.setOnes();
  y.setOnes();
  CHECK_THROWS_AS(opkm::kernel_entry(x, y, KernelSpec::poly(2)), std::invalid_argument);
}

TEST_CASE("KernelSpec validation") {
  CHECK_THROWS_AS(KernelSpec::poly(0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::poly(2, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::rbf(0.0), std::invalid_argument);
  CHECK(KernelSpec::poly(2).name() == "poly:2");
}

TEST_CASE("homogeneous quadratic kernel equals its explicit feature map") {
  // phi(x) = (x1^2, sqrt2*x1*x2, x2^2)
  const Matrix<double> X = random_matrix(2, 12, 2);
  auto phi = [](const Vector<double>& x) {
    Vector<double> f(3);
    f << x(0) * x(0), std::sqrt(2.0) * x(0) * x(1), x(1) * x(1);
    return f;
  };
  const KernelSpec spec = KernelSpec::poly(2);
  for (Index i = 0; i < X.cols(); ++i)
    for (Index j = 0; j < X.cols(); ++j) {
      const double k = opkm::kernel_entry(X.col(i), X.col(j), spec);
      const double f = phi(X.col(i)).dot(phi(X.col(j)));
      CHECK(k == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("kernel matrices are bitwise symmetric") {
  const Matrix<double> X = random_matrix(3, 32, 4);
  for (const KernelSpec& spec : {KernelSpec::poly(2), KernelSpec::rbf(0.7)}) {
    const Matrix<double> K = opkm::kernel_matrix(X, spec, 100);
    for (Index i = 0; i < K.rows(); ++i)
      for (Index j = 0; j < K.cols(); ++j) CHECK(K(i, j) == K(j, i));
  }
}

TEST_CASE("kernel matrices are positive semidefinite") {
  const Matrix<double> X = random_matrix(4, 24, 5);
  for (const KernelSpec& spec : {KernelSpec::poly(2), KernelSpec::poly(3, 0.5),
                                 KernelSpec::rbf(1.5)}) {
    const Matrix<double> K = opkm::kernel_matrix(X, spec, 100);
    Eigen::SelfAdjointEigenSolver<Matrix<double>> es(K, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-10 * K.trace());
  }
}

TEST_CASE("column blocks reassemble the kernel matrix bitwise") {
  const Index n = 23;
  const Matrix<double> X = random_matrix(3, n, 6);
  for (const KernelSpec& spec : {KernelSpec::poly(2), KernelSpec::rbf(0.9)}) {
    const Matrix<double> K = opkm::kernel_matrix(X, spec, 100);
    for (Index width : {Index(1), Index(3), Index(7), Index(16), n}) {
      Matrix<double> R(n, n);
      for (Index s = 0; s < n; s += width) {
        const Index w = std::min(width, n - s);
        R.middleCols(s, w) = opkm::kernel_column_block(X, s, w, spec);
      }
      CHECK((R.array() == K.array()).all());
    }
  }
}

TEST_CASE("kernel_column_block validates its range") {
  const Matrix<double> X = random_matrix(2, 8, 7);
  const KernelSpec spec = KernelSpec::poly(2);
  CHECK_THROWS_AS(opkm::kernel_column_block(X, -1, 2, spec), std::invalid_argument);
  CHECK_THROWS_AS(opkm::kernel_column_block(X, 7, 2, spec), std::invalid_argument);
  CHECK_THROWS_AS(opkm::kernel_column_block(X, 0, 0, spec), std::invalid_argument);
}

TEST_CASE("kernel_matrix enforces the dense cap") {
  const Matrix<double> X = random_matrix(2, 8, 8);
  CHECK_THROWS_AS(opkm::kernel_matrix(X, KernelSpec::poly(2), 4), std::invalid_argument);
}

TEST_CASE("kernel_diag matches the matrix diagonal") {
  const Matrix<double> X = random_matrix(3, 10, 9);
  for (const KernelSpec& spec : {KernelSpec::poly(2, 0.3), KernelSpec::rbf(2.0)}) {
    const Matrix<double> K = opkm::kernel_matrix(X, spec, 100);
    const Vector<double> d = opkm::kernel_diag(X, spec);
    CHECK((d - K.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("single-precision kernel evaluation") {
  Matrix<float> X(2, 6);
  X << 1, 2, 3, 4, 5, 6, 0.5f, -1, 2, -2, 1, 0;
  const Matrix<float> K = opkm::kernel_matrix(X, KernelSpec::poly(2), 10);
  CHECK(K(0, 0) == doctest::Approx(std::pow(1.25f, 2)).epsilon(1e-5));
}
