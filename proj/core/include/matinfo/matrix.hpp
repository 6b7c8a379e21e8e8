// Core value types: feature matrices (column-per-sample), Gram matrices with a
// validated spectrum, and eigen/singular spectra.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "matinfo/errors.hpp"

namespace matinfo {

// Nonnegative eigenvalues or singular values, sorted descending. source_dim is
// the normalizing dimension for entropy-style quantities; values is padded
// with zeros to that length.
struct Spectrum {
  std::vector<double> values;
  int source_dim = 0;
};

// A d x N real matrix holding one sample per column, with optional integer
// labels (one per column, values in [0, C)).
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Eigen::MatrixXd data,
                         std::optional<std::vector<int>> labels = std::nullopt);

  const Eigen::MatrixXd& data() const { return data_; }
  int dim() const { return static_cast<int>(data_.rows()); }
  int count() const { return static_cast<int>(data_.cols()); }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const { return *labels_; }
  // max label + 1; requires labels.
  int num_classes() const;

 private:
  Eigen::MatrixXd data_;
  std::optional<std::vector<int>> labels_;
};

// A unit-diagonal symmetric PSD similarity matrix of cosine similarities.
// Construction validates symmetry (1e-12 abs), diagonal (1 within 1e-9, then
// snapped to exactly 1), trace (N within 1e-6) and the eigenvalue floor
// (-1e-8; anything above the floor but below zero is clamped to 0). The
// spectrum is computed eagerly so a shared, fully immutable value is safe to
// read from any number of threads.
class GramMatrix {
 public:
  explicit GramMatrix(const Eigen::MatrixXd& raw);

  const Eigen::MatrixXd& data() const { return data_; }
  const Spectrum& spectrum() const { return spectrum_; }
  int size() const { return static_cast<int>(data_.rows()); }

 private:
  Eigen::MatrixXd data_;
  Spectrum spectrum_;
};

}  // namespace matinfo
