#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "matinfo/linalg.hpp"
#include "matinfo/rng.hpp"

using namespace matinfo;

namespace {

Eigen::MatrixXd random_matrix(long rows, long cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (long j = 0; j < cols; ++j) {
    for (long i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
  }
  return m;
}

Eigen::MatrixXd equicorrelation(int n, double alpha) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Constant(n, n, alpha);
  e.diagonal().setOnes();
  return e;
}

}  // namespace

TEST_CASE("normalize_columns scales a 3-4-5 column to the unit circle") {
  Eigen::MatrixXd z(2, 1);
  z << 3.0, 4.0;
  const FeatureMatrix out = normalize_columns(FeatureMatrix(z));
  CHECK(out.data()(0, 0) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(out.data()(1, 0) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("normalize_columns is idempotent on unit columns") {
  const Eigen::MatrixXd z = normalize_columns(FeatureMatrix(random_matrix(5, 7, 1))).data();
  const Eigen::MatrixXd again = normalize_columns(FeatureMatrix(z)).data();
  CHECK((z - again).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("normalize_columns leaves every column with unit norm") {
  const FeatureMatrix out = normalize_columns(FeatureMatrix(random_matrix(8, 16, 2)));
  for (int j = 0; j < out.count(); ++j) {
    CHECK(std::abs(out.data().col(j).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("normalize_columns rejects zero columns and passes labels through") {
  Eigen::MatrixXd z = random_matrix(4, 3, 3);
  z.col(1).setZero();
  CHECK_THROWS_AS(normalize_columns(FeatureMatrix(z)), ZeroNormColumn);

  const FeatureMatrix labeled(random_matrix(4, 3, 4), std::vector<int>{2, 0, 1});
  const FeatureMatrix out = normalize_columns(labeled);
  REQUIRE(out.has_labels());
  CHECK(out.labels() == std::vector<int>{2, 0, 1});
}

TEST_CASE("gram of identical columns is the all-ones matrix") {
  Eigen::MatrixXd z(3, 4);
  for (int j = 0; j < 4; ++j) z.col(j) << 1.0, 2.0, -1.0;
  const GramMatrix k = gram(FeatureMatrix(z));
  CHECK((k.data().array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("gram of orthogonal columns is the identity") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(5, 3);
  z(0, 0) = 2.0;
  z(2, 1) = -3.0;
  z(4, 2) = 0.5;
  const GramMatrix k = gram(FeatureMatrix(z));
  CHECK((k.data() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gram is invariant under positive column rescaling") {
  const Eigen::MatrixXd z = random_matrix(6, 10, 5);
  Rng rng(6);
  Eigen::MatrixXd scaled = z;
  for (int j = 0; j < 10; ++j) scaled.col(j) *= 0.05 + 10.0 * rng.uniform();
  const GramMatrix a = gram(FeatureMatrix(z));
  const GramMatrix b = gram(FeatureMatrix(scaled));
  CHECK((a.data() - b.data()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gram matrix invariants reject malformed inputs") {
  Eigen::MatrixXd asym = equicorrelation(3, 0.2);
  asym(0, 1) += 1e-6;
  CHECK_THROWS_AS(GramMatrix{asym}, InvariantViolation);

  Eigen::MatrixXd bad_diag = equicorrelation(3, 0.2);
  bad_diag(1, 1) = 1.5;
  CHECK_THROWS_AS(GramMatrix{bad_diag}, InvariantViolation);

  // Symmetric with unit diagonal but an eigenvalue at -1: not a Gram.
  CHECK_THROWS_AS(GramMatrix{equicorrelation(2, 2.0)}, NegativeEigenvalue);
}

TEST_CASE("eigh of the identity is flat") {
  const Spectrum s = eigh(GramMatrix(Eigen::MatrixXd::Identity(5, 5)));
  REQUIRE(s.values.size() == 5);
  for (const double v : s.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigh of the all-ones matrix is rank one") {
  const Spectrum s = eigh(GramMatrix(Eigen::MatrixXd::Ones(4, 4)));
  CHECK(s.values[0] == doctest::Approx(4.0).epsilon(1e-13));
  for (int i = 1; i < 4; ++i) CHECK(s.values[i] == 0.0);
}

TEST_CASE("eigh matches the equicorrelation closed form") {
  const int c = 6;
  const Spectrum s = eigh(GramMatrix(equicorrelation(c, -1.0 / (c - 1))));
  for (int i = 0; i < c - 1; ++i) {
    CHECK(std::abs(s.values[i] - static_cast<double>(c) / (c - 1)) <= 1e-10);
  }
  CHECK(std::abs(s.values[c - 1]) <= 1e-10);
}

TEST_CASE("eigh eigenvalue sum equals the trace") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GramMatrix k = gram(FeatureMatrix(random_matrix(12, 9, 100 + seed)));
    double sum = 0.0;
    for (const double v : eigh(k).values) sum += v;
    CHECK(std::abs(sum - 9.0) <= 1e-6 * 9.0);
  }
}

TEST_CASE("singular values of simple matrices") {
  const Spectrum id = singular_values(FeatureMatrix(Eigen::MatrixXd::Identity(3, 3)));
  for (const double v : id.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 1.0;
  const Spectrum s = singular_values(FeatureMatrix(d));
  CHECK(s.values[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.values[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("squared singular values match the eigenvalues of Z Z^T") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd z = random_matrix(4, 7, 200 + seed);
    const Spectrum sv = singular_values(FeatureMatrix(z));
    const Eigen::VectorXd ev = sym_eigenvalues(z * z.transpose());
    REQUIRE(sv.values.size() == 4);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(sv.values[i] * sv.values[i] - ev[i]) <= 1e-9);
    }
  }
}

TEST_CASE("hadamard against identity-structured and all-ones operands") {
  const GramMatrix k = gram(FeatureMatrix(random_matrix(9, 5, 7)));
  const GramMatrix id(Eigen::MatrixXd::Identity(5, 5));
  const GramMatrix ones(Eigen::MatrixXd::Ones(5, 5));

  CHECK((hadamard(k, id).data() - id.data()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((hadamard(k, ones).data() - k.data()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(hadamard(k, GramMatrix(Eigen::MatrixXd::Identity(4, 4))), DimensionMismatch);
}

TEST_CASE("hadamard of the collapse Gram squares the correlation") {
  const GramMatrix e = GramMatrix(equicorrelation(10, -1.0 / 9.0));
  const GramMatrix prod = hadamard(e, e);
  CHECK((prod.data() - equicorrelation(10, 1.0 / 81.0)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("hadamard of valid gram matrices satisfies the gram invariants") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GramMatrix a = gram(FeatureMatrix(random_matrix(10, 6, 300 + seed)));
    const GramMatrix b = gram(FeatureMatrix(random_matrix(10, 6, 400 + seed)));
    CHECK_NOTHROW(hadamard(a, b));  // construction re-validates PSD and diagonal
  }
}
