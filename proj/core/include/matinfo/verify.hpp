// Seeded property suites behind the `verify` command: collapse closed forms,
// the regression-error bounds and the analytic-vs-finite-difference gradient
// checks.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace matinfo {

struct SuiteResult {
  int instances = 0;
  int failures = 0;
  double max_rel_err = 0.0;               // populated by the gradient suite
  std::vector<std::string> diagnostics;   // one line per failed instance
};

// ETF pipeline against the collapse closed forms: Gram geometry, entropy,
// effective rank, MIR/HDR targets and the NC residual checker.
SuiteResult run_nc_suite(int instances, std::uint64_t seed);

// Affine-regression inequality, the tail-singular-value bound and its
// rank-ratio relaxation on random instances; least-squares residuals are
// cross-checked against a normal-equations solver.
SuiteResult run_lemma_suite(int instances, std::uint64_t seed);

// Analytic gradients of the entropy and of the three information losses
// against central finite differences (relative error < 1e-4).
SuiteResult run_gradient_suite(int instances, std::uint64_t seed);

}  // namespace matinfo
