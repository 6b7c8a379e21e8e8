// Neural-Collapse reference constructions and checkers: simplex ETF frames,
// equi-correlation structure matrices, closed-form MIR/HDR/entropy targets,
// NC1-NC3 residuals and the regression-error rank bounds.
#pragma once

#include <cstdint>

#include "matinfo/matrix.hpp"

namespace matinfo {

// Per-class first and second order statistics of a labeled feature matrix.
struct ClassStatistics {
  Eigen::VectorXd global_mean;    // d
  Eigen::MatrixXd class_means;    // d x C
  Eigen::MatrixXd centered_means; // d x C, class means minus the global mean
  std::vector<int> counts;        // per-class sample counts
};

ClassStatistics class_statistics(const FeatureMatrix& features, int num_classes);

// C unit vectors in R^d with pairwise cosine -1/(C-1): the normalized columns
// of the centering matrix I - (1/C) 11^T, carried into R^d by a seeded random
// orthonormal basis. Requires d >= C-1.
FeatureMatrix simplex_etf(int classes, int dim, std::uint64_t seed);

// E(alpha) = (1-alpha) I + alpha 11^T with spectrum {1-alpha (C-1 times),
// 1+(C-1)alpha}. Throws NotPsd when 1+(C-1)alpha < -1e-8.
GramMatrix structure_matrix(double alpha, int classes);

struct NcTargets {
  double mir_target = 0.0;
  double hdr_target = 0.0;
  double h_target = 0.0;  // log(C-1), nats
};

// Collapse-state targets: MIR = 1/(C-1) + (C-2)log(C-2)/((C-1)log(C-1)),
// HDR = 0, H = log(C-1). Throws DegenerateClassCount for C <= 2 where the
// MIR denominator vanishes.
NcTargets nc_targets(int classes);

struct NcReport {
  int classes = 0;
  double nc1_residual = 0.0;  // mean within-class deviation norm
  double nc2_residual = 0.0;  // max ETF-cosine deviation of centered means
  double nc3_residual = 0.0;  // || W/|W|_F - M/|M|_F ||_F
  double hdr_observed = 0.0;
  double mir_observed = 0.0;
  double mir_target = 0.0;    // NaN when C = 2 (closed form undefined)
  double hdr_target = 0.0;
};

// Residuals of the three collapse conditions plus observed MIR/HDR between
// the sample Gram and the per-sample class-weight Gram. weights holds one
// class vector per column (d x C).
NcReport nc_check(const FeatureMatrix& features, const FeatureMatrix& weights);

struct RegressionErrors {
  double err_y_from_z1 = 0.0;  // min_{W,b} ||Y - (W Z1 + b 1^T)||_F
  double err_y_from_z2 = 0.0;
  double err_z1_from_z2 = 0.0;
  double w1_frobenius = 0.0;   // ||W*_1||_F of the minimum-norm argmin
};

// Minimum affine regression errors between representation sets, solved by
// least squares on mean-centered data (minimum-norm solution when rank
// deficient).
RegressionErrors affine_regression_error(const FeatureMatrix& z1, const FeatureMatrix& z2,
                                         const FeatureMatrix& y);

struct RankBoundReport {
  double lhs = 0.0;          // min_{H,eta} (1/N) ||Z1 - (H Z2 + eta 1^T)||_F^2
  double rhs_tail = 0.0;   // tail singular-value mass of Z1/sqrt(N)
  double rhs_rank_ratio = 0.0;  // 1 - rank(Z2)/rank(Z1)
  bool tail_bound_holds = false;
  bool rank_ratio_holds = false;
  int rank_z1 = 0;
  int rank_z2 = 0;
  double rank_ratio = 0.0;         // rank(Z2)/rank(Z1)
  double entropy_surrogate = 0.0;  // exp(H(G(Z2)) - H(G(Z1)))
};

// Checks the rank-based lower bound on the affine regression error and its
// rank-ratio relaxation. Requires rank(Z1) > rank(Z2); the theorem branch
// additionally assumes unit-norm Z1 columns.
RankBoundReport verify_rank_bound(const FeatureMatrix& z1, const FeatureMatrix& z2);

// Count of singular values above 1e-10 times the largest.
int numerical_rank(const FeatureMatrix& z);

}  // namespace matinfo
