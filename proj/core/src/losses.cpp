#include "matinfo/losses.hpp"

#include <cmath>
#include <vector>

#include "matinfo/linalg.hpp"

namespace matinfo {

namespace {

double entropy_from_eigenvalues(const Eigen::VectorXd& ev) {
  const double n = static_cast<double>(ev.size());
  double h = 0.0;
  for (long i = 0; i < ev.size(); ++i) {
    const double p = ev[i] / n;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

Eigen::MatrixXd grad_from_eigensystem(const Eigen::VectorXd& ev, const Eigen::MatrixXd& vectors) {
  const double n = static_cast<double>(ev.size());
  Eigen::VectorXd gprime(ev.size());
  for (long i = 0; i < ev.size(); ++i) {
    const double x = std::max(ev[i], 1e-12);
    gprime[i] = -(std::log(x / n) + 1.0) / n;
  }
  return vectors * gprime.asDiagonal() * vectors.transpose();
}

// Columns scaled to unit norm, plus the original norms.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> unit_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out = z;
  Eigen::VectorXd norms(z.cols());
  for (long j = 0; j < z.cols(); ++j) {
    norms[j] = out.col(j).norm();
    if (norms[j] <= 1e-12) throw ZeroNormColumn(static_cast<int>(j));
    out.col(j) /= norms[j];
  }
  return {std::move(out), std::move(norms)};
}

// Pulls a Gram-space gradient S = dL/dG back to the raw columns of z, through
// G = Zhat^T Zhat and the per-column normalization.
Eigen::MatrixXd gram_grad_to_columns(const Eigen::MatrixXd& zhat, const Eigen::VectorXd& norms,
                                     const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd dhat = 2.0 * zhat * s;
  Eigen::MatrixXd out(zhat.rows(), zhat.cols());
  for (long j = 0; j < zhat.cols(); ++j) {
    const auto zj = zhat.col(j);
    out.col(j) = (dhat.col(j) - zj.dot(dhat.col(j)) * zj) / norms[j];
  }
  return out;
}

Eigen::MatrixXd per_sample_weights(const FeatureMatrix& features, const FeatureMatrix& weights) {
  const int c = weights.count();
  Eigen::MatrixXd v(weights.dim(), features.count());
  for (int i = 0; i < features.count(); ++i) {
    const int y = features.labels()[i];
    if (y >= c) throw InvariantViolation("label " + std::to_string(y) + " outside [0, C)");
    v.col(i) = weights.data().col(y);
  }
  return v;
}

}  // namespace

double sym_entropy(const Eigen::MatrixXd& m) {
  return entropy_from_eigenvalues(sym_eigenvalues(m));
}

Eigen::MatrixXd sym_entropy_grad(const Eigen::MatrixXd& m) {
  const auto [ev, vectors] = sym_eigendecomposition(m);
  return grad_from_eigensystem(ev, vectors);
}

Eigen::MatrixXd entropy_grad(const GramMatrix& k) { return sym_entropy_grad(k.data()); }

LossValueAndGrad cma_loss(const FeatureMatrix& features, const FeatureMatrix& weights) {
  if (!features.has_labels()) throw InvariantViolation("cma_loss requires labels");
  if (features.dim() != weights.dim()) throw DimensionMismatch(features.dim(), weights.dim());
  const int c = weights.count();

  std::vector<std::vector<int>> members(c);
  for (int i = 0; i < features.count(); ++i) {
    const int y = features.labels()[i];
    if (y >= c) throw InvariantViolation("label " + std::to_string(y) + " outside [0, C)");
    members[y].push_back(i);
  }

  LossValueAndGrad result;
  result.feature_grad = Eigen::MatrixXd::Zero(features.dim(), features.count());
  result.weight_grad = Eigen::MatrixXd::Zero(weights.dim(), c);

  for (int cls = 0; cls < c; ++cls) {
    // The class weight joins its group; groups with no batch member have a
    // single column and are skipped.
    if (members[cls].empty()) continue;
    const int m = static_cast<int>(members[cls].size()) + 1;

    Eigen::MatrixXd group(features.dim(), m);
    for (int j = 0; j + 1 < m; ++j) group.col(j) = features.data().col(members[cls][j]);
    group.col(m - 1) = weights.data().col(cls);

    const auto [zhat, norms] = unit_columns(group);
    const auto [ev, vectors] = sym_eigendecomposition(zhat.transpose() * zhat);
    result.value += entropy_from_eigenvalues(ev) / m;

    const Eigen::MatrixXd s = grad_from_eigensystem(ev, vectors) / m;
    const Eigen::MatrixXd dgroup = gram_grad_to_columns(zhat, norms, s);
    for (int j = 0; j + 1 < m; ++j) result.feature_grad.col(members[cls][j]) += dgroup.col(j);
    result.weight_grad.col(cls) += dgroup.col(m - 1);
  }
  return result;
}

LossValueAndGrad mi_loss(const FeatureMatrix& features, const FeatureMatrix& weights,
                         double lambda_mi) {
  if (!features.has_labels()) throw InvariantViolation("mi_loss requires labels");
  if (features.dim() != weights.dim()) throw DimensionMismatch(features.dim(), weights.dim());
  if (lambda_mi < 0.0) throw InvariantViolation("lambda_mi must be nonnegative");

  LossValueAndGrad result;
  result.feature_grad = Eigen::MatrixXd::Zero(features.dim(), features.count());
  result.weight_grad = Eigen::MatrixXd::Zero(weights.dim(), weights.count());
  if (lambda_mi == 0.0) return result;

  const Eigen::MatrixXd v = per_sample_weights(features, weights);
  const auto [fhat, fnorms] = unit_columns(features.data());
  const auto [vhat, vnorms] = unit_columns(v);
  const Eigen::MatrixXd kf = fhat.transpose() * fhat;
  const Eigen::MatrixXd kv = vhat.transpose() * vhat;
  const Eigen::MatrixXd kh = kf.cwiseProduct(kv);

  const auto [evf, vecf] = sym_eigendecomposition(kf);
  const auto [evv, vecv] = sym_eigendecomposition(kv);
  const auto [evh, vech] = sym_eigendecomposition(kh);

  const double mi = entropy_from_eigenvalues(evf) + entropy_from_eigenvalues(evv) -
                    entropy_from_eigenvalues(evh);
  result.value = -lambda_mi * mi;

  const Eigen::MatrixXd gh = grad_from_eigensystem(evh, vech);
  const Eigen::MatrixXd sf =
      -lambda_mi * (grad_from_eigensystem(evf, vecf) - gh.cwiseProduct(kv));
  const Eigen::MatrixXd sv =
      -lambda_mi * (grad_from_eigensystem(evv, vecv) - gh.cwiseProduct(kf));

  result.feature_grad = gram_grad_to_columns(fhat, fnorms, sf);
  const Eigen::MatrixXd dv = gram_grad_to_columns(vhat, vnorms, sv);
  for (int i = 0; i < features.count(); ++i) {
    result.weight_grad.col(features.labels()[i]) += dv.col(i);
  }
  return result;
}

LossValueAndGrad hd_loss(const FeatureMatrix& features, const FeatureMatrix& weights,
                         double lambda_id) {
  if (!features.has_labels()) throw InvariantViolation("hd_loss requires labels");
  if (features.dim() != weights.dim()) throw DimensionMismatch(features.dim(), weights.dim());
  if (lambda_id < 0.0) throw InvariantViolation("lambda_id must be nonnegative");

  LossValueAndGrad result;
  result.feature_grad = Eigen::MatrixXd::Zero(features.dim(), features.count());
  result.weight_grad = Eigen::MatrixXd::Zero(weights.dim(), weights.count());
  if (lambda_id == 0.0) return result;

  const Eigen::MatrixXd v = per_sample_weights(features, weights);
  const auto [fhat, fnorms] = unit_columns(features.data());
  const auto [vhat, vnorms] = unit_columns(v);

  const auto [evf, vecf] = sym_eigendecomposition(fhat.transpose() * fhat);
  const auto [evv, vecv] = sym_eigendecomposition(vhat.transpose() * vhat);
  const double diff = entropy_from_eigenvalues(evf) - entropy_from_eigenvalues(evv);
  result.value = lambda_id * std::abs(diff);
  if (diff == 0.0) return result;  // subgradient 0 at the tie

  const double sign = diff > 0.0 ? 1.0 : -1.0;
  result.feature_grad = gram_grad_to_columns(
      fhat, fnorms, lambda_id * sign * grad_from_eigensystem(evf, vecf));
  const Eigen::MatrixXd dv = gram_grad_to_columns(
      vhat, vnorms, -lambda_id * sign * grad_from_eigensystem(evv, vecv));
  for (int i = 0; i < features.count(); ++i) {
    result.weight_grad.col(features.labels()[i]) += dv.col(i);
  }
  return result;
}

Eigen::MatrixXd fd_gradient_oracle(const std::function<double(const Eigen::MatrixXd&)>& fn,
                                   const Eigen::MatrixXd& at, double step) {
  if (step < 1e-7 || step > 1e-3) {
    throw InvariantViolation("finite-difference step must lie in [1e-7, 1e-3]");
  }
  Eigen::MatrixXd grad(at.rows(), at.cols());
  Eigen::MatrixXd probe = at;
  for (long j = 0; j < at.cols(); ++j) {
    for (long i = 0; i < at.rows(); ++i) {
      probe(i, j) = at(i, j) + step;
      const double up = fn(probe);
      probe(i, j) = at(i, j) - step;
      const double down = fn(probe);
      probe(i, j) = at(i, j);
      grad(i, j) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace matinfo
