#include "matinfo/collapse.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "matinfo/linalg.hpp"
#include "matinfo/metrics.hpp"
#include "matinfo/rng.hpp"

namespace matinfo {

namespace {

// Least-squares fit of target = W source + b 1^T; returns the Frobenius
// residual and ||W||_F of the minimum-norm solution.
std::pair<double, double> affine_fit(const Eigen::MatrixXd& target,
                                     const Eigen::MatrixXd& source) {
  const Eigen::VectorXd target_mean = target.rowwise().mean();
  const Eigen::VectorXd source_mean = source.rowwise().mean();
  const Eigen::MatrixXd tc = target.colwise() - target_mean;
  const Eigen::MatrixXd sc = source.colwise() - source_mean;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(sc.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw SvdFailure();
  const Eigen::MatrixXd w = svd.solve(tc.transpose()).transpose();
  return {(tc - w * sc).norm(), w.norm()};
}

}  // namespace

ClassStatistics class_statistics(const FeatureMatrix& features, int num_classes) {
  if (!features.has_labels()) throw InvariantViolation("class statistics require labels");
  if (num_classes < 2) throw DegenerateClassCount(num_classes);

  ClassStatistics stats;
  stats.counts.assign(num_classes, 0);
  stats.class_means = Eigen::MatrixXd::Zero(features.dim(), num_classes);
  for (int i = 0; i < features.count(); ++i) {
    const int y = features.labels()[i];
    if (y >= num_classes) {
      throw InvariantViolation("label " + std::to_string(y) + " outside [0, C)");
    }
    stats.class_means.col(y) += features.data().col(i);
    ++stats.counts[y];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (stats.counts[c] == 0) throw MissingClass(c);
    stats.class_means.col(c) /= static_cast<double>(stats.counts[c]);
  }
  stats.global_mean = features.data().rowwise().mean();
  stats.centered_means = stats.class_means.colwise() - stats.global_mean;
  return stats;
}

FeatureMatrix simplex_etf(int classes, int dim, std::uint64_t seed) {
  if (classes < 2) throw DegenerateClassCount(classes);
  if (dim < classes - 1) throw DimensionTooSmall(dim, classes - 1);
  const int c = classes;
  const int k = c - 1;

  // Unit-norm columns of the centering matrix I - (1/C) 11^T.
  Eigen::MatrixXd frame =
      (Eigen::MatrixXd::Identity(c, c) - Eigen::MatrixXd::Constant(c, c, 1.0 / c)) *
      std::sqrt(static_cast<double>(c) / (c - 1.0));

  // Orthonormal basis of the complement of the all-ones direction, via the
  // Householder reflector mapping e1 to 1/sqrt(C).
  Eigen::VectorXd v = Eigen::VectorXd::Constant(c, 1.0 / std::sqrt(static_cast<double>(c)));
  v[0] -= 1.0;
  const Eigen::MatrixXd reflector =
      Eigen::MatrixXd::Identity(c, c) - (2.0 / v.squaredNorm()) * (v * v.transpose());
  const Eigen::MatrixXd coords = reflector.rightCols(k).transpose() * frame;  // k x C

  // Seeded orthonormal embedding R^k -> R^d.
  Rng rng(seed);
  Eigen::MatrixXd gauss(dim, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < dim; ++i) gauss(i, j) = rng.gaussian();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(dim, k);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k);
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) basis.col(j) = -basis.col(j);
  }

  return FeatureMatrix(basis * coords);
}

GramMatrix structure_matrix(double alpha, int classes) {
  if (classes < 2) throw DegenerateClassCount(classes);
  const double low = 1.0 + (classes - 1.0) * alpha;
  if (low < -1e-8 || 1.0 - alpha < -1e-8) throw NotPsd();
  Eigen::MatrixXd e = Eigen::MatrixXd::Constant(classes, classes, alpha);
  e.diagonal().setOnes();
  return GramMatrix(e);
}

NcTargets nc_targets(int classes) {
  if (classes <= 2) throw DegenerateClassCount(classes);
  const double c = static_cast<double>(classes);
  NcTargets t;
  t.h_target = std::log(c - 1.0);
  t.hdr_target = 0.0;
  // log(C-2) vanishes at C = 3, leaving 1/(C-1).
  t.mir_target = 1.0 / (c - 1.0) + (c - 2.0) * std::log(c - 2.0) / ((c - 1.0) * t.h_target);
  return t;
}

NcReport nc_check(const FeatureMatrix& features, const FeatureMatrix& weights) {
  if (features.dim() != weights.dim()) throw DimensionMismatch(features.dim(), weights.dim());
  const int c = weights.count();
  const ClassStatistics stats = class_statistics(features, c);

  NcReport report;
  report.classes = c;

  double deviation = 0.0;
  for (int i = 0; i < features.count(); ++i) {
    deviation += (features.data().col(i) - stats.class_means.col(features.labels()[i])).norm();
  }
  report.nc1_residual = deviation / static_cast<double>(features.count());

  const Eigen::MatrixXd mhat = normalize_columns(FeatureMatrix(stats.centered_means)).data();
  const double on_diag = 1.0;
  const double off_diag = -1.0 / (c - 1.0);
  double nc2 = 0.0;
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      const double target = i == j ? on_diag : off_diag;
      nc2 = std::max(nc2, std::abs(mhat.col(i).dot(mhat.col(j)) - target));
    }
  }
  report.nc2_residual = nc2;

  report.nc3_residual =
      (weights.data() / weights.data().norm() - stats.centered_means / stats.centered_means.norm())
          .norm();

  // Per-sample class-weight matrix paired against the raw sample features.
  Eigen::MatrixXd per_sample(weights.dim(), features.count());
  for (int i = 0; i < features.count(); ++i) {
    per_sample.col(i) = weights.data().col(features.labels()[i]);
  }
  const GramMatrix g1 = gram(FeatureMatrix(features.data()));
  const GramMatrix g2 = gram(FeatureMatrix(per_sample));
  report.hdr_observed = hdr(g1, g2);
  try {
    report.mir_observed = mir(g1, g2);
  } catch (const DegenerateEntropy&) {
    report.mir_observed = std::numeric_limits<double>::quiet_NaN();
  }

  report.hdr_target = 0.0;
  report.mir_target = c >= 3 ? nc_targets(c).mir_target
                             : std::numeric_limits<double>::quiet_NaN();
  return report;
}

RegressionErrors affine_regression_error(const FeatureMatrix& z1, const FeatureMatrix& z2,
                                         const FeatureMatrix& y) {
  if (z1.count() != z2.count()) throw DimensionMismatch(z1.count(), z2.count());
  if (z1.count() != y.count()) throw DimensionMismatch(z1.count(), y.count());

  RegressionErrors errors;
  const auto [err1, w1] = affine_fit(y.data(), z1.data());
  errors.err_y_from_z1 = err1;
  errors.w1_frobenius = w1;
  errors.err_y_from_z2 = affine_fit(y.data(), z2.data()).first;
  errors.err_z1_from_z2 = affine_fit(z1.data(), z2.data()).first;
  return errors;
}

RankBoundReport verify_rank_bound(const FeatureMatrix& z1, const FeatureMatrix& z2) {
  if (z1.count() != z2.count()) throw DimensionMismatch(z1.count(), z2.count());
  RankBoundReport report;
  report.rank_z1 = numerical_rank(z1);
  report.rank_z2 = numerical_rank(z2);
  if (report.rank_z1 <= report.rank_z2) {
    throw RankOrderViolation(report.rank_z1, report.rank_z2);
  }

  const double n = static_cast<double>(z1.count());
  const double residual = affine_fit(z1.data(), z2.data()).first;
  report.lhs = residual * residual / n;

  const Spectrum sv = singular_values(z1);
  double tail = 0.0;
  for (int j = report.rank_z2 + 2; j <= report.rank_z1; ++j) {  // 1-indexed
    tail += sv.values[j - 1] * sv.values[j - 1] / n;
  }
  report.rhs_tail = tail;
  report.rank_ratio = static_cast<double>(report.rank_z2) / report.rank_z1;
  report.rhs_rank_ratio = 1.0 - report.rank_ratio;
  report.tail_bound_holds = report.lhs >= report.rhs_tail - 1e-9;
  report.rank_ratio_holds = report.rhs_tail <= report.rhs_rank_ratio + 1e-12;
  report.entropy_surrogate = std::exp(matrix_entropy(gram(z2)) - matrix_entropy(gram(z1)));
  return report;
}

int numerical_rank(const FeatureMatrix& z) {
  const Spectrum sv = singular_values(z);
  if (sv.values.empty() || sv.values.front() <= 0.0) return 0;
  const double cutoff = 1e-10 * sv.values.front();
  int rank = 0;
  for (const double v : sv.values) {
    if (v > cutoff) ++rank;
  }
  return rank;
}

}  // namespace matinfo
