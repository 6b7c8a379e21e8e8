// Error types thrown by the matinfo library.
#pragma once

#include <stdexcept>
#include <string>

namespace matinfo {

// Base class for all library errors. The CLI maps these to exit code 3
// (data/invariant violations) unless they derive from ParseError (exit 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files or unusable flag values.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ZeroNormColumn : public Error {
 public:
  explicit ZeroNormColumn(int index)
      : Error("column " + std::to_string(index) + " has zero norm"), index(index) {}
  int index;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(long a, long b)
      : Error("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class EigFailure : public Error {
 public:
  EigFailure() : Error("symmetric eigendecomposition did not converge") {}
};

class NegativeEigenvalue : public Error {
 public:
  explicit NegativeEigenvalue(double value)
      : Error("eigenvalue " + std::to_string(value) + " below PSD floor"), value(value) {}
  double value;
};

class SvdFailure : public Error {
 public:
  SvdFailure() : Error("singular value decomposition did not converge") {}
};

class ZeroMatrix : public Error {
 public:
  ZeroMatrix() : Error("matrix has no singular value above 1e-14") {}
};

class DegenerateEntropy : public Error {
 public:
  DegenerateEntropy() : Error("matrix entropy too small for a ratio denominator") {}
};

class DegenerateClassCount : public Error {
 public:
  explicit DegenerateClassCount(int classes)
      : Error("class count " + std::to_string(classes) + " leaves the closed form undefined") {}
};

class InsufficientClassSize : public Error {
 public:
  explicit InsufficientClassSize(int cls)
      : Error("class " + std::to_string(cls) + " has fewer than 2 samples"), cls(cls) {}
  int cls;
};

class CoincidentCentroids : public Error {
 public:
  CoincidentCentroids(int i, int j)
      : Error("centroids of classes " + std::to_string(i) + " and " + std::to_string(j) +
              " coincide") {}
};

class DimensionTooSmall : public Error {
 public:
  DimensionTooSmall(int dim, int needed)
      : Error("embedding dimension " + std::to_string(dim) + " below required " +
              std::to_string(needed)) {}
};

class NotPsd : public Error {
 public:
  NotPsd() : Error("matrix is not positive semidefinite") {}
};

class MissingClass : public Error {
 public:
  explicit MissingClass(int cls)
      : Error("class " + std::to_string(cls) + " has no samples"), cls(cls) {}
  int cls;
};

class RankOrderViolation : public Error {
 public:
  RankOrderViolation(int r1, int r2)
      : Error("rank(Z1)=" + std::to_string(r1) + " must exceed rank(Z2)=" + std::to_string(r2)) {}
};

class ArchitectureMismatch : public Error {
 public:
  ArchitectureMismatch() : Error("checkpoints have different architectures") {}
};

class NonFiniteActivation : public Error {
 public:
  NonFiniteActivation() : Error("forward pass produced a non-finite activation") {}
};

class DivergedLoss : public Error {
 public:
  explicit DivergedLoss(long step)
      : Error("loss became non-finite at step " + std::to_string(step)) {}
};

// Violated construction-time invariant (non-symmetric Gram, bad diagonal, ...).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace matinfo
