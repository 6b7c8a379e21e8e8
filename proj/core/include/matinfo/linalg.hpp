// Dense linear-algebra kernels: column normalization, Gram construction,
// symmetric eigendecomposition, SVD and Hadamard products.
#pragma once

#include <Eigen/Dense>
#include <utility>

#include "matinfo/matrix.hpp"

namespace matinfo {

// Scales every column to unit Euclidean norm; labels pass through.
// Throws ZeroNormColumn if any column norm is <= 1e-12.
FeatureMatrix normalize_columns(const FeatureMatrix& z);

// Gram matrix of column-normalized features: entry (i,j) is the cosine
// similarity of columns i and j.
GramMatrix gram(const FeatureMatrix& z);

// Eigenvalues of a validated Gram matrix, descending, clamped to >= 0.
// The sum equals the trace (= N) exactly.
Spectrum eigh(const GramMatrix& k);

// Descending nonnegative singular values, length min(d, N).
// Throws SvdFailure on non-convergence.
Spectrum singular_values(const FeatureMatrix& z);

// Entrywise product of two Gram matrices of equal dimension. PSD by the Schur
// product theorem; the result is re-validated against the Gram invariants.
GramMatrix hadamard(const GramMatrix& k1, const GramMatrix& k2);

// Raw kernels on plain matrices. These skip the Gram invariants and spectrum
// hygiene, giving the smooth evaluation path used by gradients and
// finite-difference checks.

// Eigenvalues of (m + m^T)/2, descending. Throws EigFailure.
Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m);

// Eigenvalues (descending) and matching eigenvectors of (m + m^T)/2.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sym_eigendecomposition(const Eigen::MatrixXd& m);

}  // namespace matinfo
