// Information quantities over similarity matrices: matrix entropy, effective
// rank, matrix mutual information and its two normalized ratios, plus the
// silhouette and Davies-Bouldin clustering indices.
#pragma once

#include <cstdint>
#include <string>

#include "matinfo/matrix.hpp"

namespace matinfo {

// Spectral entropy -sum_i (l_i/N) log(l_i/N) in nats, with 0 log 0 := 0.
// Lies in [0, log N]; zero exactly when the spectrum is (N, 0, ..., 0).
double matrix_entropy(const GramMatrix& k);

// exp of the Shannon entropy of the normalized singular values; a continuous
// rank surrogate in [1, rank]. Throws ZeroMatrix if every singular value is
// <= 1e-14.
double effective_rank(const FeatureMatrix& z);

// H(K1) + H(K2) - H(K1 o K2) where o is the Hadamard product. Values below
// -1e-9 are reported on stderr as a warning (nonnegativity is empirical, not
// proven).
double matrix_mi(const GramMatrix& k1, const GramMatrix& k2);

// Mutual information normalized by the smaller entropy. Throws
// DegenerateEntropy when min(H1, H2) <= 1e-12.
double mir(const GramMatrix& k1, const GramMatrix& k2);

// |H(K1) - H(K2)| / max(H1, H2), in [0, 1]. Defined as 0 when both entropies
// are zero (two maximally collapsed inputs differ by nothing).
double hdr(const GramMatrix& k1, const GramMatrix& k2);

// Mean silhouette coefficient over samples, Euclidean distance on
// L2-normalized features. Degenerate samples with a(i) = b(i) = 0 score 0.
// Requires >= 2 classes and >= 2 samples per class.
double silhouette(const FeatureMatrix& z);

// Davies-Bouldin index on L2-normalized features; smaller is better.
// Throws CoincidentCentroids if two class centroids are closer than 1e-12.
double davies_bouldin(const FeatureMatrix& z);

enum class Split { train, test };

const char* to_string(Split split);

// One evaluation snapshot of a training run.
struct MetricRecord {
  long step = 0;
  Split split = Split::train;
  double h_feat = 0.0;
  double h_weights = 0.0;
  double mi = 0.0;
  double mir = 0.0;
  double hdr = 0.0;
  double accuracy = 0.0;
  double loss = 0.0;
};

}  // namespace matinfo
