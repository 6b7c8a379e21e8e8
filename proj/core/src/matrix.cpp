#include "matinfo/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace matinfo {

namespace {

constexpr double kEigenvalueFloor = -1e-8;

}  // namespace

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd data, std::optional<std::vector<int>> labels)
    : data_(std::move(data)), labels_(std::move(labels)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw InvariantViolation("feature matrix must have at least one row and one column");
  }
  if (!data_.allFinite()) {
    throw InvariantViolation("feature matrix contains non-finite entries");
  }
  if (labels_) {
    if (static_cast<long>(labels_->size()) != data_.cols()) {
      throw DimensionMismatch(static_cast<long>(labels_->size()), data_.cols());
    }
    for (const int y : *labels_) {
      if (y < 0) throw InvariantViolation("labels must be nonnegative");
    }
  }
}

int FeatureMatrix::num_classes() const {
  if (!labels_) throw InvariantViolation("feature matrix has no labels");
  return *std::max_element(labels_->begin(), labels_->end()) + 1;
}

GramMatrix::GramMatrix(const Eigen::MatrixXd& raw) {
  const long n = raw.rows();
  if (n != raw.cols()) throw DimensionMismatch(raw.rows(), raw.cols());
  if (!raw.allFinite()) throw InvariantViolation("gram matrix contains non-finite entries");

  const double asym = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) {
    throw InvariantViolation("gram matrix asymmetry " + std::to_string(asym) + " exceeds 1e-12");
  }
  const double diag_err = (raw.diagonal().array() - 1.0).abs().maxCoeff();
  if (diag_err > 1e-9) {
    throw InvariantViolation("gram diagonal deviates from 1 by " + std::to_string(diag_err));
  }
  const double trace_err = std::abs(raw.trace() - static_cast<double>(n));
  if (trace_err > 1e-6) {
    throw InvariantViolation("gram trace deviates from N by " + std::to_string(trace_err));
  }

  // Symmetrize away roundoff and pin the unit diagonal, so trace == N holds
  // exactly and the spectrum below can be calibrated against it.
  data_ = 0.5 * (raw + raw.transpose());
  data_.diagonal().setOnes();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(data_, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EigFailure();
  Eigen::VectorXd ev = solver.eigenvalues();

  const double min_ev = ev.minCoeff();
  if (min_ev < kEigenvalueFloor) throw NegativeEigenvalue(min_ev);

  // Clamp negatives and numerically-zero values, then rescale so the
  // eigenvalue sum matches the trace exactly. For rank-deficient inputs this
  // makes lambda_max/N land on representable values like 1.0.
  const double zero_tol = 1e-14 * static_cast<double>(n) * std::max(ev.maxCoeff(), 1.0);
  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    if (ev[i] < zero_tol) ev[i] = 0.0;
    sum += ev[i];
  }
  if (sum > 0.0) ev *= static_cast<double>(n) / sum;

  spectrum_.source_dim = static_cast<int>(n);
  spectrum_.values.assign(ev.data(), ev.data() + n);
  std::sort(spectrum_.values.begin(), spectrum_.values.end(), std::greater<double>());
}

}  // namespace matinfo
