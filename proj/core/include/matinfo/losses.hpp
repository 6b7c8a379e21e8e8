// Information-based training losses (per-class alignment entropy, mutual
// information, entropy difference) with analytic spectral gradients, plus the
// central-difference gradient oracle used to verify them.
#pragma once

#include <Eigen/Dense>
#include <functional>

#include "matinfo/matrix.hpp"

namespace matinfo {

// Spectral entropy of (m + m^T)/2 on a plain matrix: the smooth evaluation
// path (no invariant checks, no spectrum snapping) that gradients and
// finite differences run through. Negative roundoff eigenvalues are treated
// as zero via the 0 log 0 convention.
double sym_entropy(const Eigen::MatrixXd& m);

// Gradient of sym_entropy: g'(K) applied spectrally with
// g'(x) = -(1/N)(log(x/N) + 1), eigenvalues clipped at 1e-12. Symmetric.
Eigen::MatrixXd sym_entropy_grad(const Eigen::MatrixXd& m);

// Same gradient evaluated on a validated Gram matrix.
Eigen::MatrixXd entropy_grad(const GramMatrix& k);

struct LossValueAndGrad {
  double value = 0.0;
  Eigen::MatrixXd feature_grad;  // d x N, gradient w.r.t. raw features
  Eigen::MatrixXd weight_grad;   // d x C, gradient w.r.t. class-weight columns
};

// Cross-modal alignment loss: group features by label, append the class
// weight column, and accumulate H(G(group)) / |group| over groups with more
// than one member. Gradients flow to both features and weights through the
// column normalization and Gram construction.
LossValueAndGrad cma_loss(const FeatureMatrix& features, const FeatureMatrix& weights);

// -lambda * MI(G(f), G(V)) where V stacks the class weight of each sample's
// label. Gradients are emitted for both features and weights.
LossValueAndGrad mi_loss(const FeatureMatrix& features, const FeatureMatrix& weights,
                         double lambda_mi);

// lambda * |H(G(f)) - H(G(V))| with subgradient 0 at the tie.
LossValueAndGrad hd_loss(const FeatureMatrix& features, const FeatureMatrix& weights,
                         double lambda_id);

// Entrywise central-difference gradient of an arbitrary scalar function of a
// matrix. step must lie in [1e-7, 1e-3].
Eigen::MatrixXd fd_gradient_oracle(const std::function<double(const Eigen::MatrixXd&)>& fn,
                                   const Eigen::MatrixXd& at, double step);

}  // namespace matinfo
