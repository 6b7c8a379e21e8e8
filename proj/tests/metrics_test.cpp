#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "matinfo/linalg.hpp"
#include "matinfo/metrics.hpp"
#include "matinfo/rng.hpp"
#include "matinfo/trainer.hpp"

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

// Entropy of E(1/(C-1)^2), written out from its two-level spectrum:
// (2 - 1/(C-1)) log(C-1) - ((C-2)/(C-1)) log(C-2).
double hadamard_entropy_closed_form(int c) {
  const double cm1 = c - 1.0;
  const double log_cm2 = c > 2 ? std::log(c - 2.0) : 0.0;
  return (2.0 - 1.0 / cm1) * std::log(cm1) - (c - 2.0) / cm1 * log_cm2;
}

// Two tight clusters far apart along different axes, plus labels.
FeatureMatrix two_blob_features(double spread, std::uint64_t seed) {
  Rng rng(seed);
  const int per = 12, d = 6;
  Eigen::MatrixXd x(d, 2 * per);
  std::vector<int> labels(2 * per);
  for (int j = 0; j < 2 * per; ++j) {
    const int cls = j < per ? 0 : 1;
    labels[j] = cls;
    x.col(j).setZero();
    x(cls, j) = 10.0;
    for (int i = 0; i < d; ++i) x(i, j) += spread * rng.gaussian();
  }
  return FeatureMatrix(std::move(x), std::move(labels));
}

}  // namespace

TEST_CASE("matrix entropy of the identity is log N") {
  for (const int n : {2, 5, 10, 37}) {
    const double h = matrix_entropy(GramMatrix(Eigen::MatrixXd::Identity(n, n)));
    CHECK(std::abs(h - std::log(static_cast<double>(n))) <= 1e-12);
  }
}

TEST_CASE("matrix entropy of the all-ones matrix is exactly zero") {
  CHECK(matrix_entropy(GramMatrix(Eigen::MatrixXd::Ones(8, 8))) == 0.0);

  // Identical columns reach the same rank-one Gram through the full pipeline.
  Eigen::MatrixXd z(5, 9);
  for (int j = 0; j < 9; ++j) z.col(j) << 0.3, -1.2, 0.7, 2.0, -0.4;
  CHECK(matrix_entropy(gram(FeatureMatrix(z))) == 0.0);
}

TEST_CASE("matrix entropy of the collapse Gram is log(C-1)") {
  const double h = matrix_entropy(GramMatrix(equicorrelation(10, -1.0 / 9.0)));
  CHECK(std::abs(h - std::log(9.0)) <= 1e-12);
  CHECK(std::log(9.0) == doctest::Approx(2.197225).epsilon(1e-6));
}

TEST_CASE("matrix entropy stays within [0, log N] and is permutation invariant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GramMatrix k = gram(FeatureMatrix(random_matrix(12, 8, 500 + seed)));
    const double h = matrix_entropy(k);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(8.0) + 1e-12);

    Rng rng(600 + seed);
    std::vector<int> perm(8);
    for (int i = 0; i < 8; ++i) perm[i] = i;
    rng.shuffle(perm);
    Eigen::MatrixXd shuffled(8, 8);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) shuffled(i, j) = k.data()(perm[i], perm[j]);
    }
    CHECK(std::abs(matrix_entropy(GramMatrix(shuffled)) - h) <= 1e-12);
  }
}

TEST_CASE("entropy vanishes only for rank-one spectra") {
  // Near-identical columns: tiny entropy and near-trivial spectrum.
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(4, 6) + 1e-9 * random_matrix(4, 6, 41);
  const GramMatrix collapsed = gram(FeatureMatrix(z));
  CHECK(matrix_entropy(collapsed) < 1e-9);
  CHECK(eigh(collapsed).values[0] == doctest::Approx(6.0).epsilon(1e-9));

  // A mildly spread spectrum cannot have near-zero entropy.
  const GramMatrix spread = gram(FeatureMatrix(random_matrix(12, 6, 42)));
  CHECK(matrix_entropy(spread) > 1e-3);
}

TEST_CASE("effective rank of identity, rank-one and collapse-mean matrices") {
  CHECK(std::abs(effective_rank(FeatureMatrix(Eigen::MatrixXd::Identity(5, 5))) - 5.0) <= 1e-12);

  const Eigen::MatrixXd rank1 =
      random_matrix(6, 1, 43) * random_matrix(1, 9, 44);
  CHECK(std::abs(effective_rank(FeatureMatrix(rank1)) - 1.0) <= 1e-9);

  CHECK_THROWS_AS(effective_rank(FeatureMatrix(Eigen::MatrixXd::Zero(3, 3))), ZeroMatrix);
}

TEST_CASE("matrix mutual information on identity and all-ones operands") {
  const GramMatrix id(Eigen::MatrixXd::Identity(7, 7));
  CHECK(std::abs(matrix_mi(id, id) - std::log(7.0)) <= 1e-12);

  const GramMatrix k = gram(FeatureMatrix(random_matrix(9, 7, 45)));
  const GramMatrix ones(Eigen::MatrixXd::Ones(7, 7));
  CHECK(std::abs(matrix_mi(k, ones)) <= 1e-12);
}

TEST_CASE("matrix mutual information of the collapse pair matches the closed form") {
  const int c = 10;
  const GramMatrix e(equicorrelation(c, -1.0 / (c - 1)));
  const double expected = 2.0 * std::log(9.0) - hadamard_entropy_closed_form(c);
  CHECK(expected == doctest::Approx(std::log(9.0) / 9.0 + 8.0 / 9.0 * std::log(8.0))
                        .epsilon(1e-12));
  CHECK(std::abs(matrix_mi(e, e) - expected) <= 1e-9);
  CHECK(expected == doctest::Approx(2.09253).epsilon(1e-5));
}

TEST_CASE("matrix mutual information is symmetric and empirically nonnegative") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const GramMatrix a = gram(FeatureMatrix(random_matrix(10, 6, 10000 + seed)));
    const GramMatrix b = gram(FeatureMatrix(random_matrix(10, 6, 20000 + seed)));
    const double ab = matrix_mi(a, b);
    CHECK(ab == matrix_mi(b, a));
    CHECK(ab >= -1e-9);
  }
}

TEST_CASE("mir of identity with itself is one") {
  const GramMatrix id(Eigen::MatrixXd::Identity(6, 6));
  CHECK(mir(id, id) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mir of the collapse pair matches the closed form") {
  const auto closed_form = [](int c) {
    return 1.0 / (c - 1.0) +
           (c - 2.0) * (c > 2 ? std::log(c - 2.0) : 0.0) / ((c - 1.0) * std::log(c - 1.0));
  };
  const GramMatrix e10(equicorrelation(10, -1.0 / 9.0));
  CHECK(std::abs(mir(e10, e10) - closed_form(10)) <= 1e-9);
  CHECK(closed_form(10) == doctest::Approx(0.9523507825).epsilon(1e-9));

  const GramMatrix e3(equicorrelation(3, -0.5));
  CHECK(mir(e3, e3) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("mir rejects degenerate entropies") {
  const GramMatrix ones(Eigen::MatrixXd::Ones(5, 5));
  const GramMatrix id(Eigen::MatrixXd::Identity(5, 5));
  CHECK_THROWS_AS(mir(ones, id), DegenerateEntropy);
}

TEST_CASE("mir(K, K) equals 2 - H(K o K) / H(K)") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GramMatrix k = gram(FeatureMatrix(random_matrix(8, 6, 700 + seed)));
    const double expected = 2.0 - matrix_entropy(hadamard(k, k)) / matrix_entropy(k);
    CHECK(mir(k, k) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("hdr endpoints and range") {
  const GramMatrix id(Eigen::MatrixXd::Identity(4, 4));
  const GramMatrix ones(Eigen::MatrixXd::Ones(4, 4));
  CHECK(hdr(id, id) == 0.0);
  CHECK(hdr(id, ones) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hdr(ones, ones) == 0.0);  // both entropies zero

  const GramMatrix e(equicorrelation(12, -1.0 / 11.0));
  CHECK(hdr(e, e) == 0.0);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GramMatrix a = gram(FeatureMatrix(random_matrix(10, 7, 800 + seed)));
    const GramMatrix b = gram(FeatureMatrix(random_matrix(10, 7, 900 + seed)));
    const double v = hdr(a, b);
    CHECK(v == hdr(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("silhouette of far-separated tight clusters is near one") {
  CHECK(silhouette(two_blob_features(0.01, 46)) > 0.9);
}

TEST_CASE("silhouette degenerate conventions") {
  // All samples identical across two labels: a = b = 0 scores 0.
  Eigen::MatrixXd x(3, 6);
  for (int j = 0; j < 6; ++j) x.col(j) << 1.0, 1.0, 1.0;
  const FeatureMatrix z(x, std::vector<int>{0, 0, 0, 1, 1, 1});
  CHECK(silhouette(z) == 0.0);
}

TEST_CASE("silhouette requires two samples per class") {
  Eigen::MatrixXd x = random_matrix(4, 5, 47);
  const FeatureMatrix z(x, std::vector<int>{0, 0, 0, 0, 1});
  CHECK_THROWS_AS(silhouette(z), InsufficientClassSize);
}

TEST_CASE("davies-bouldin of tight far clusters is small") {
  CHECK(davies_bouldin(two_blob_features(0.01, 48)) < 0.1);
}

TEST_CASE("davies-bouldin is zero for zero scatter and grows with it") {
  Eigen::MatrixXd x(3, 4);
  x.col(0) << 1, 0, 0;
  x.col(1) << 1, 0, 0;
  x.col(2) << 0, 1, 0;
  x.col(3) << 0, 1, 0;
  const FeatureMatrix z(x, std::vector<int>{0, 0, 1, 1});
  CHECK(davies_bouldin(z) == 0.0);

  const double loose = davies_bouldin(two_blob_features(0.4, 49));
  const double tight = davies_bouldin(two_blob_features(0.2, 49));
  CHECK(tight < loose);
}

TEST_CASE("davies-bouldin rejects coincident centroids") {
  Eigen::MatrixXd x(2, 4);
  x.col(0) << 1, 0;
  x.col(1) << 0, 1;
  x.col(2) << 1, 0;
  x.col(3) << 0, 1;
  const FeatureMatrix z(x, std::vector<int>{0, 0, 1, 1});
  CHECK_THROWS_AS(davies_bouldin(z), CoincidentCentroids);
}

TEST_CASE("tighter clusters mean lower batch entropy and higher silhouette") {
  const FeatureMatrix loose = make_blobs(4, 12, 24, 6.0, 1.5, 77);
  const FeatureMatrix tight = make_blobs(4, 12, 24, 6.0, 0.3, 77);
  CHECK(matrix_entropy(gram(tight)) < matrix_entropy(gram(loose)));
  CHECK(silhouette(tight) > silhouette(loose));
}
