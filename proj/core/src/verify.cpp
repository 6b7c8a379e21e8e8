#include "matinfo/verify.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "matinfo/collapse.hpp"
#include "matinfo/linalg.hpp"
#include "matinfo/losses.hpp"
#include "matinfo/metrics.hpp"
#include "matinfo/rng.hpp"

namespace matinfo {

namespace {

Eigen::MatrixXd gaussian_matrix(long rows, long cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (long j = 0; j < cols; ++j) {
    for (long i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
  }
  return m;
}

// Independent least-squares route: normal equations with an eigenvalue
// pseudo-inverse, mean-centered like the production solver.
double normal_equation_residual(const Eigen::MatrixXd& target, const Eigen::MatrixXd& source) {
  const Eigen::MatrixXd tc = target.colwise() - target.rowwise().mean().eval();
  const Eigen::MatrixXd sc = source.colwise() - source.rowwise().mean().eval();
  const Eigen::MatrixXd gram = sc * sc.transpose();
  const auto [ev, vectors] = sym_eigendecomposition(gram);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  const double cutoff = 1e-12 * std::max(ev.maxCoeff(), 1.0);
  for (long i = 0; i < ev.size(); ++i) {
    if (ev[i] > cutoff) inv[i] = 1.0 / ev[i];
  }
  const Eigen::MatrixXd pinv = vectors * inv.asDiagonal() * vectors.transpose();
  const Eigen::MatrixXd w = tc * sc.transpose() * pinv;
  return (tc - w * sc).norm();
}

double rel_frobenius_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-12);
}

struct GradientInstance {
  Eigen::MatrixXd features;  // d x B
  std::vector<int> labels;
  Eigen::MatrixXd weights;   // d x C
};

// Rejection-samples an instance whose Gram spectra stay away from zero and
// whose entropies are untied, keeping every finite-difference probe inside
// the smooth region. d > b so the feature Gram can be full rank.
GradientInstance sample_gradient_instance(Rng& rng) {
  constexpr int d = 14, b = 10, c = 3;
  while (true) {
    GradientInstance inst;
    inst.features = gaussian_matrix(d, b, rng);
    inst.weights = gaussian_matrix(d, c, rng);
    inst.labels.resize(b);
    for (int j = 0; j < b; ++j) inst.labels[j] = j % c;
    rng.shuffle(inst.labels);

    const FeatureMatrix f(inst.features, inst.labels);
    const GramMatrix kf = gram(f);
    const Eigen::VectorXd evf = sym_eigenvalues(kf.data());
    if (evf.minCoeff() < 1e-3) continue;

    const Eigen::VectorXd evw =
        sym_eigenvalues(gram(FeatureMatrix(inst.weights)).data());
    if (evw.minCoeff() < 1e-3) continue;

    Eigen::MatrixXd v(d, b);
    for (int j = 0; j < b; ++j) v.col(j) = inst.weights.col(inst.labels[j]);
    const double hf = sym_entropy(kf.data());
    const double hv = sym_entropy(gram(FeatureMatrix(v)).data());
    if (std::abs(hf - hv) < 1e-3) continue;

    // Per-class alignment groups must be well-conditioned too.
    bool ok = true;
    for (int cls = 0; cls < c && ok; ++cls) {
      std::vector<int> cols;
      for (int j = 0; j < b; ++j) {
        if (inst.labels[j] == cls) cols.push_back(j);
      }
      Eigen::MatrixXd group(d, cols.size() + 1);
      for (std::size_t j = 0; j < cols.size(); ++j) group.col(j) = inst.features.col(cols[j]);
      group.col(cols.size()) = inst.weights.col(cls);
      const Eigen::VectorXd ev = sym_eigenvalues(gram(FeatureMatrix(group)).data());
      ok = ev.minCoeff() >= 1e-3;
    }
    if (ok) return inst;
  }
}

}  // namespace

SuiteResult run_nc_suite(int instances, std::uint64_t seed) {
  SuiteResult result;
  result.instances = instances;

  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, i));
    const int c = 3 + static_cast<int>(rng.uniform_index(18));
    const int d = c - 1 + static_cast<int>(rng.uniform_index(32));
    std::ostringstream why;

    try {
      const FeatureMatrix etf = simplex_etf(c, d, derive_seed(seed, 1000 + i));
      const GramMatrix k = gram(etf);
      const NcTargets targets = nc_targets(c);

      double off_err = 0.0;
      for (int a = 0; a < c; ++a) {
        for (int b = 0; b < c; ++b) {
          if (a == b) continue;
          off_err = std::max(off_err, std::abs(k.data()(a, b) + 1.0 / (c - 1.0)));
        }
      }
      if (off_err > 1e-10) why << "gram off-diagonal error " << off_err << "; ";

      const double h = matrix_entropy(k);
      if (std::abs(h - targets.h_target) > 1e-9) why << "entropy " << h << "; ";

      const double er = effective_rank(etf);
      if (std::abs(er - (c - 1.0)) > 1e-9) why << "erank " << er << "; ";

      const double m = mir(k, k);
      if (std::abs(m - targets.mir_target) > 1e-9) why << "mir " << m << "; ";
      if (hdr(k, k) > 1e-9) why << "hdr nonzero; ";

      // Structure-matrix spectrum closed form on a random PSD alpha.
      const double alpha = -1.0 / (c - 1.0) + rng.uniform() * (1.0 + 1.0 / (c - 1.0));
      const Spectrum spec = eigh(structure_matrix(alpha, c));
      const double hi = 1.0 + (c - 1.0) * alpha;
      const double lo = 1.0 - alpha;
      for (int j = 0; j < c; ++j) {
        const double expected = alpha >= 0.0 ? (j == 0 ? hi : lo)
                                             : (j == c - 1 ? hi : lo);
        if (std::abs(spec.values[j] - expected) > 1e-10) {
          why << "structure spectrum entry " << j << "; ";
          break;
        }
      }

      // Collapse-consistent features: ETF class means repeated, scaled weights.
      const int per_class = 3;
      Eigen::MatrixXd feats(d, c * per_class);
      std::vector<int> labels(c * per_class);
      for (int cls = 0; cls < c; ++cls) {
        for (int r = 0; r < per_class; ++r) {
          feats.col(cls * per_class + r) = etf.data().col(cls);
          labels[cls * per_class + r] = cls;
        }
      }
      const double scale = 0.5 + rng.uniform() * 4.0;
      const NcReport report =
          nc_check(FeatureMatrix(feats, labels), FeatureMatrix(scale * etf.data()));
      if (report.nc1_residual > 1e-9 || report.nc2_residual > 1e-9 ||
          report.nc3_residual > 1e-9) {
        why << "nc residuals " << report.nc1_residual << "/" << report.nc2_residual << "/"
            << report.nc3_residual << "; ";
      }
      if (report.hdr_observed > 1e-9) why << "hdr_observed " << report.hdr_observed << "; ";
      if (std::abs(report.mir_observed - report.mir_target) > 1e-6) {
        why << "mir_observed " << report.mir_observed << " vs " << report.mir_target << "; ";
      }
    } catch (const std::exception& e) {
      why << "exception: " << e.what();
    }

    if (!why.str().empty()) {
      ++result.failures;
      result.diagnostics.push_back("nc instance " + std::to_string(i) + " (C=" +
                                   std::to_string(c) + ", d=" + std::to_string(d) +
                                   "): " + why.str());
    }
  }
  return result;
}

SuiteResult run_lemma_suite(int instances, std::uint64_t seed) {
  SuiteResult result;
  result.instances = instances;

  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, 5000 + i));
    std::ostringstream why;

    try {
      // Regression-error triangle inequality on random representations.
      const int n = 40;
      const int d1 = 4 + static_cast<int>(rng.uniform_index(5));
      const int d2 = 4 + static_cast<int>(rng.uniform_index(5));
      const int dy = 3 + static_cast<int>(rng.uniform_index(4));
      const FeatureMatrix z1(gaussian_matrix(d1, n, rng));
      const FeatureMatrix z2(gaussian_matrix(d2, n, rng));
      const FeatureMatrix y(gaussian_matrix(dy, n, rng));

      const RegressionErrors errors = affine_regression_error(z1, z2, y);
      const double bound =
          errors.err_y_from_z1 + errors.w1_frobenius * errors.err_z1_from_z2;
      if (errors.err_y_from_z2 > bound + 1e-9) {
        why << "triangle inequality violated: " << errors.err_y_from_z2 << " > " << bound
            << "; ";
      }

      const double ne1 = normal_equation_residual(y.data(), z1.data());
      const double ne2 = normal_equation_residual(y.data(), z2.data());
      const double ne3 = normal_equation_residual(z1.data(), z2.data());
      if (std::abs(ne1 - errors.err_y_from_z1) > 1e-8 ||
          std::abs(ne2 - errors.err_y_from_z2) > 1e-8 ||
          std::abs(ne3 - errors.err_z1_from_z2) > 1e-8) {
        why << "normal-equation residual mismatch; ";
      }

      // Tail-singular-value bound: full-rank unit columns against a low-rank
      // approximation set.
      const int d = 8 + static_cast<int>(rng.uniform_index(5));
      const int nb = 30;
      const FeatureMatrix zfull = normalize_columns(FeatureMatrix(gaussian_matrix(d, nb, rng)));
      const int low_rank = 1 + static_cast<int>(rng.uniform_index(d - 1));
      const Eigen::MatrixXd zlow =
          gaussian_matrix(d, low_rank, rng) * gaussian_matrix(low_rank, nb, rng);

      const RankBoundReport report = verify_rank_bound(zfull, FeatureMatrix(zlow));
      if (!report.tail_bound_holds) {
        why << "lhs " << report.lhs << " < rhs " << report.rhs_tail << "; ";
      }
      if (!report.rank_ratio_holds) {
        why << "rhs " << report.rhs_tail << " > rank bound " << report.rhs_rank_ratio << "; ";
      }
    } catch (const std::exception& e) {
      why << "exception: " << e.what();
    }

    if (!why.str().empty()) {
      ++result.failures;
      result.diagnostics.push_back("lemma instance " + std::to_string(i) + ": " + why.str());
    }
  }
  return result;
}

SuiteResult run_gradient_suite(int instances, std::uint64_t seed) {
  SuiteResult result;
  result.instances = instances;
  constexpr double kStep = 1e-5;
  constexpr double kTol = 1e-4;

  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, 9000 + i));
    std::ostringstream why;

    try {
      const GradientInstance inst = sample_gradient_instance(rng);
      const FeatureMatrix f(inst.features, inst.labels);
      const FeatureMatrix w(inst.weights);

      const auto record = [&](const char* name, double err) {
        result.max_rel_err = std::max(result.max_rel_err, err);
        if (err >= kTol) why << name << " rel err " << err << "; ";
      };

      const Eigen::MatrixXd k = gram(f).data();
      record("entropy", rel_frobenius_err(
                            sym_entropy_grad(k),
                            fd_gradient_oracle([](const Eigen::MatrixXd& m) {
                              return sym_entropy(m);
                            }, k, kStep)));

      const auto check_loss = [&](const char* name, auto&& loss_fn) {
        const LossValueAndGrad lv = loss_fn(f, w);
        const Eigen::MatrixXd fd_f = fd_gradient_oracle(
            [&](const Eigen::MatrixXd& m) {
              return loss_fn(FeatureMatrix(m, inst.labels), w).value;
            },
            inst.features, kStep);
        const Eigen::MatrixXd fd_w = fd_gradient_oracle(
            [&](const Eigen::MatrixXd& m) { return loss_fn(f, FeatureMatrix(m)).value; },
            inst.weights, kStep);
        record((std::string(name) + " features").c_str(),
               rel_frobenius_err(lv.feature_grad, fd_f));
        record((std::string(name) + " weights").c_str(),
               rel_frobenius_err(lv.weight_grad, fd_w));
      };

      check_loss("cma", [](const FeatureMatrix& a, const FeatureMatrix& b) {
        return cma_loss(a, b);
      });
      check_loss("mi", [](const FeatureMatrix& a, const FeatureMatrix& b) {
        return mi_loss(a, b, 0.7);
      });
      check_loss("hd", [](const FeatureMatrix& a, const FeatureMatrix& b) {
        return hd_loss(a, b, 0.9);
      });
    } catch (const std::exception& e) {
      why << "exception: " << e.what();
    }

    if (!why.str().empty()) {
      ++result.failures;
      result.diagnostics.push_back("gradient instance " + std::to_string(i) + ": " + why.str());
    }
  }
  return result;
}

}  // namespace matinfo
