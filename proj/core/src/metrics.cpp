#include "matinfo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <vector>

#include "matinfo/linalg.hpp"

namespace matinfo {

namespace {

double entropy_of_spectrum(const Spectrum& s) {
  const double n = static_cast<double>(s.source_dim);
  double h = 0.0;
  for (const double lambda : s.values) {
    const double p = lambda / n;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h + 0.0;  // normalize -0.0
}

// Pairwise Euclidean distances between columns.
Eigen::MatrixXd column_distances(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.cols());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (x.col(i) - x.col(j)).norm();
    }
  }
  return d;
}

std::vector<std::vector<int>> group_by_class(const FeatureMatrix& z) {
  if (!z.has_labels()) throw InvariantViolation("clustering metrics require labels");
  const int c = z.num_classes();
  if (c < 2) throw DegenerateClassCount(c);
  std::vector<std::vector<int>> members(c);
  for (int i = 0; i < z.count(); ++i) members[z.labels()[i]].push_back(i);
  return members;
}

}  // namespace

double matrix_entropy(const GramMatrix& k) { return entropy_of_spectrum(k.spectrum()); }

double effective_rank(const FeatureMatrix& z) {
  const Spectrum s = singular_values(z);
  double total = 0.0;
  for (const double v : s.values) total += v;
  if (s.values.empty() || s.values.front() <= 1e-14) throw ZeroMatrix();
  double h = 0.0;
  for (const double v : s.values) {
    const double p = v / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::exp(h);
}

double matrix_mi(const GramMatrix& k1, const GramMatrix& k2) {
  if (k1.size() != k2.size()) throw DimensionMismatch(k1.size(), k2.size());
  const double mi =
      matrix_entropy(k1) + matrix_entropy(k2) - matrix_entropy(hadamard(k1, k2));
  if (mi < -1e-9) {
    std::cerr << "warning: matrix mutual information " << mi << " is negative\n";
  }
  return mi;
}

double mir(const GramMatrix& k1, const GramMatrix& k2) {
  const double h1 = matrix_entropy(k1);
  const double h2 = matrix_entropy(k2);
  const double denom = std::min(h1, h2);
  if (denom <= 1e-12) throw DegenerateEntropy();
  return matrix_mi(k1, k2) / denom;
}

double hdr(const GramMatrix& k1, const GramMatrix& k2) {
  const double h1 = matrix_entropy(k1);
  const double h2 = matrix_entropy(k2);
  const double denom = std::max(h1, h2);
  if (denom <= 1e-12) return 0.0;
  return std::abs(h1 - h2) / denom;
}

double silhouette(const FeatureMatrix& z) {
  const auto members = group_by_class(z);
  for (int c = 0; c < static_cast<int>(members.size()); ++c) {
    if (members[c].size() < 2) throw InsufficientClassSize(c);
  }
  const Eigen::MatrixXd x = normalize_columns(z).data();
  const Eigen::MatrixXd dist = column_distances(x);
  const auto& labels = z.labels();
  const int n = z.count();
  const int c = static_cast<int>(members.size());

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = 0.0;
    for (const int j : members[labels[i]]) a += dist(i, j);
    a /= static_cast<double>(members[labels[i]].size() - 1);

    double b = std::numeric_limits<double>::infinity();
    for (int other = 0; other < c; ++other) {
      if (other == labels[i]) continue;
      double mean = 0.0;
      for (const int j : members[other]) mean += dist(i, j);
      mean /= static_cast<double>(members[other].size());
      b = std::min(b, mean);
    }

    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

double davies_bouldin(const FeatureMatrix& z) {
  const auto members = group_by_class(z);
  const Eigen::MatrixXd x = normalize_columns(z).data();
  const int c = static_cast<int>(members.size());

  Eigen::MatrixXd centroids(x.rows(), c);
  Eigen::VectorXd scatter(c);
  for (int k = 0; k < c; ++k) {
    if (members[k].empty()) throw MissingClass(k);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(x.rows());
    for (const int j : members[k]) mu += x.col(j);
    mu /= static_cast<double>(members[k].size());
    centroids.col(k) = mu;
    double s = 0.0;
    for (const int j : members[k]) s += (x.col(j) - mu).norm();
    scatter[k] = s / static_cast<double>(members[k].size());
  }

  double total = 0.0;
  for (int i = 0; i < c; ++i) {
    double worst = 0.0;
    for (int j = 0; j < c; ++j) {
      if (j == i) continue;
      const double sep = (centroids.col(i) - centroids.col(j)).norm();
      if (sep <= 1e-12) throw CoincidentCentroids(i, j);
      worst = std::max(worst, (scatter[i] + scatter[j]) / sep);
    }
    total += worst;
  }
  return total / static_cast<double>(c);
}

const char* to_string(Split split) { return split == Split::train ? "train" : "test"; }

}  // namespace matinfo
