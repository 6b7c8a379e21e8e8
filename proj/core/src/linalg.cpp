#include "matinfo/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>

namespace matinfo {

FeatureMatrix normalize_columns(const FeatureMatrix& z) {
  Eigen::MatrixXd out = z.data();
  for (int j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm <= 1e-12) throw ZeroNormColumn(j);
    out.col(j) /= norm;
  }
  return FeatureMatrix(std::move(out),
                       z.has_labels() ? std::optional(z.labels()) : std::nullopt);
}

GramMatrix gram(const FeatureMatrix& z) {
  const FeatureMatrix unit = normalize_columns(z);
  Eigen::MatrixXd k = unit.data().transpose() * unit.data();
  return GramMatrix(k);
}

Spectrum eigh(const GramMatrix& k) { return k.spectrum(); }

Spectrum singular_values(const FeatureMatrix& z) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(z.data());
  if (svd.info() != Eigen::Success) throw SvdFailure();
  const Eigen::VectorXd& sv = svd.singularValues();
  Spectrum s;
  s.source_dim = static_cast<int>(std::min(z.data().rows(), z.data().cols()));
  s.values.assign(sv.data(), sv.data() + sv.size());
  s.values.resize(s.source_dim, 0.0);  // BDCSVD already returns min(d,N) values
  std::sort(s.values.begin(), s.values.end(), std::greater<double>());
  return s;
}

GramMatrix hadamard(const GramMatrix& k1, const GramMatrix& k2) {
  if (k1.size() != k2.size()) throw DimensionMismatch(k1.size(), k2.size());
  return GramMatrix(k1.data().cwiseProduct(k2.data()));
}

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EigFailure();
  return solver.eigenvalues().reverse();
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> sym_eigendecomposition(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw EigFailure();
  return {solver.eigenvalues().reverse(),
          solver.eigenvectors().rowwise().reverse()};
}

}  // namespace matinfo
