#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "matinfo/collapse.hpp"
#include "matinfo/linalg.hpp"
#include "matinfo/metrics.hpp"
#include "matinfo/rng.hpp"
#include "matinfo/verify.hpp"

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

// Class means repeated per-class count times, labeled class-major.
FeatureMatrix repeat_means(const Eigen::MatrixXd& means, int per_class) {
  const int c = static_cast<int>(means.cols());
  Eigen::MatrixXd x(means.rows(), c * per_class);
  std::vector<int> labels(c * per_class);
  for (int cls = 0; cls < c; ++cls) {
    for (int r = 0; r < per_class; ++r) {
      x.col(cls * per_class + r) = means.col(cls);
      labels[cls * per_class + r] = cls;
    }
  }
  return FeatureMatrix(std::move(x), std::move(labels));
}

}  // namespace

TEST_CASE("simplex etf with two classes is an antipodal pair") {
  const FeatureMatrix etf = simplex_etf(2, 4, 9);
  CHECK(std::abs(etf.data().col(0).norm() - 1.0) <= 1e-12);
  CHECK((etf.data().col(0) + etf.data().col(1)).norm() <= 1e-12);
}

TEST_CASE("simplex etf cosines hit -1/(C-1)") {
  const FeatureMatrix etf = simplex_etf(10, 64, 10);
  const GramMatrix k = gram(etf);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double expected = i == j ? 1.0 : -1.0 / 9.0;
      CHECK(std::abs(k.data()(i, j) - expected) <= 1e-10);
    }
  }
}

TEST_CASE("simplex etf fills exactly C-1 dimensions") {
  const FeatureMatrix etf = simplex_etf(10, 9, 11);
  CHECK(numerical_rank(etf) == 9);
  CHECK_THROWS_AS(simplex_etf(10, 8, 11), DimensionTooSmall);
}

TEST_CASE("structure matrix endpoints") {
  CHECK((structure_matrix(0.0, 5).data() - Eigen::MatrixXd::Identity(5, 5))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((structure_matrix(1.0, 5).data() - Eigen::MatrixXd::Ones(5, 5)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK_THROWS_AS(structure_matrix(-0.3, 5), NotPsd);
}

TEST_CASE("structure matrix entropy matches the two-level closed form") {
  // alpha = 1/81, C = 10: H = (2 - 1/9) log 9 - (8/9) log 8.
  const double expected = (2.0 - 1.0 / 9.0) * std::log(9.0) - 8.0 / 9.0 * std::log(8.0);
  CHECK(expected == doctest::Approx(2.301921).epsilon(1e-6));
  CHECK(std::abs(matrix_entropy(structure_matrix(1.0 / 81.0, 10)) - expected) <= 1e-9);
}

TEST_CASE("structure matrix spectrum closed form over an alpha-C grid") {
  for (const int c : {3, 5, 9, 24}) {
    for (const double alpha :
         {-1.0 / (c - 1.0), -0.5 / (c - 1.0), 0.0, 0.2, 0.77, 1.0}) {
      const Spectrum s = eigh(structure_matrix(alpha, c));
      const double lo = 1.0 - alpha;
      const double hi = 1.0 + (c - 1.0) * alpha;
      std::vector<double> expected(c - 1, lo);
      expected.push_back(hi);
      std::sort(expected.begin(), expected.end(), std::greater<double>());
      for (int i = 0; i < c; ++i) CHECK(std::abs(s.values[i] - expected[i]) <= 1e-10);
    }
  }
}

TEST_CASE("collapse targets at small and large class counts") {
  const NcTargets t3 = nc_targets(3);
  CHECK(t3.mir_target == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t3.hdr_target == 0.0);
  CHECK(t3.h_target == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const NcTargets t10 = nc_targets(10);
  CHECK(t10.mir_target == doctest::Approx(0.9523507825).epsilon(1e-9));

  const NcTargets t100 = nc_targets(100);
  CHECK(t100.h_target == doctest::Approx(std::log(99.0)).epsilon(1e-12));
  CHECK(std::log(99.0) == doctest::Approx(4.59512).epsilon(1e-5));

  CHECK_THROWS_AS(nc_targets(2), DegenerateClassCount);
}

TEST_CASE("collapse closed forms hold across C in [3, 100]") {
  for (int c = 3; c <= 100; ++c) {
    const GramMatrix e = structure_matrix(-1.0 / (c - 1.0), c);
    CHECK(std::abs(matrix_entropy(e) - std::log(c - 1.0)) <= 1e-9);

    const NcTargets targets = nc_targets(c);
    CHECK(std::abs(mir(e, e) - targets.mir_target) <= 1e-9);
    CHECK(hdr(e, e) <= 1e-9);
  }
}

TEST_CASE("effective rank of the mean frame is C-1") {
  for (const int c : {3, 10, 25}) {
    const FeatureMatrix etf = simplex_etf(c, c + 6, 12);
    CHECK(std::abs(effective_rank(etf) - (c - 1.0)) <= 1e-9);
  }
}

TEST_CASE("nc_check accepts collapse-consistent inputs") {
  const FeatureMatrix etf = simplex_etf(6, 16, 13);
  const FeatureMatrix features = repeat_means(etf.data(), 4);

  const NcReport report = nc_check(features, etf);
  CHECK(report.nc1_residual <= 1e-9);
  CHECK(report.nc2_residual <= 1e-9);
  CHECK(report.nc3_residual <= 1e-9);
  CHECK(report.hdr_observed <= 1e-9);
  CHECK(std::abs(report.mir_observed - report.mir_target) <= 1e-6);

  // Frobenius normalization cancels a positive weight scale.
  const NcReport scaled = nc_check(features, FeatureMatrix(3.0 * etf.data()));
  CHECK(scaled.nc3_residual <= 1e-9);
}

TEST_CASE("nc_check flags random geometry") {
  int far = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FeatureMatrix features(random_matrix(16, 30, 3000 + seed),
                                 [&] {
                                   std::vector<int> labels(30);
                                   for (int i = 0; i < 30; ++i) labels[i] = i % 5;
                                   return labels;
                                 }());
    const NcReport report = nc_check(features, FeatureMatrix(random_matrix(16, 5, 4000 + seed)));
    far += report.nc2_residual > 0.1;
  }
  CHECK(far == 100);
}

TEST_CASE("nc_check requires every class to appear") {
  Eigen::MatrixXd x = random_matrix(8, 6, 14);
  const FeatureMatrix features(x, std::vector<int>{0, 0, 1, 1, 0, 1});
  CHECK_THROWS_AS(nc_check(features, FeatureMatrix(random_matrix(8, 3, 15))), MissingClass);
}

TEST_CASE("affine regression error basics") {
  const FeatureMatrix z1(random_matrix(6, 40, 16));
  const FeatureMatrix y(random_matrix(4, 40, 17));

  const RegressionErrors same = affine_regression_error(z1, z1, y);
  CHECK(same.err_z1_from_z2 <= 1e-9);
  CHECK(same.err_y_from_z2 == doctest::Approx(same.err_y_from_z1).epsilon(1e-9));

  // Exact affine images regress with zero error.
  const Eigen::MatrixXd a = random_matrix(4, 6, 18);
  const Eigen::VectorXd c = random_matrix(4, 1, 19);
  const Eigen::MatrixXd exact = (a * z1.data()).colwise() + c;
  const RegressionErrors hit = affine_regression_error(z1, z1, FeatureMatrix(exact));
  CHECK(hit.err_y_from_z1 <= 1e-9);
}

TEST_CASE("regression triangle inequality holds on random instances") {
  const SuiteResult result = run_lemma_suite(100, 21);
  for (const std::string& line : result.diagnostics) MESSAGE(line);
  CHECK(result.failures == 0);
}

TEST_CASE("rank bound chain on a full-rank versus low-rank pair") {
  const FeatureMatrix z1 = normalize_columns(FeatureMatrix(random_matrix(8, 30, 22)));
  const Eigen::MatrixXd low = random_matrix(8, 3, 23) * random_matrix(3, 30, 24);
  const RankBoundReport report = verify_rank_bound(z1, FeatureMatrix(low));

  CHECK(report.rank_z1 == 8);
  CHECK(report.rank_z2 == 3);
  CHECK(report.tail_bound_holds);
  CHECK(report.rank_ratio_holds);
  CHECK(report.rhs_rank_ratio == doctest::Approx(1.0 - 3.0 / 8.0).epsilon(1e-12));
  CHECK(report.entropy_surrogate > 0.0);
  CHECK(report.rank_ratio == doctest::Approx(3.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("rank bound tail sum is empty at adjacent ranks") {
  const FeatureMatrix z1 = normalize_columns(FeatureMatrix(random_matrix(5, 20, 25)));
  const Eigen::MatrixXd low = random_matrix(5, 4, 26) * random_matrix(4, 20, 27);
  const RankBoundReport report = verify_rank_bound(z1, FeatureMatrix(low));
  CHECK(report.rank_z2 == report.rank_z1 - 1);
  CHECK(report.rhs_tail == 0.0);
}

TEST_CASE("rank bound rejects non-decreasing rank pairs") {
  const FeatureMatrix z1(random_matrix(4, 20, 28));
  const FeatureMatrix z2(random_matrix(6, 20, 29));
  CHECK_THROWS_AS(verify_rank_bound(z1, z2), RankOrderViolation);
}

TEST_CASE("collapse verification suite passes end to end") {
  const SuiteResult result = run_nc_suite(50, 30);
  for (const std::string& line : result.diagnostics) MESSAGE(line);
  CHECK(result.failures == 0);
}
