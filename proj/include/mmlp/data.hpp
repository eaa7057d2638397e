#pragma once

// Synthetic dataset generators, PCA ingestion, and dataset persistence.
//
// File formats:
//  - vectors: CSV whose first line is "# mmlp-dataset v1 seed=<seed>",
//    second line the column names, then one sample per row.
//  - SPD targets: binary tensor container (see README for the byte layout):
//    magic "MTNS", u32 version, u32 seed, u64 tensor count, then per tensor
//    u64 rows, u64 cols and rows*cols little-endian doubles in row-major
//    order.

#include <string>
#include <vector>

#include "mmlp/linalg.hpp"

namespace mmlp {

// Regression pairs: per-class input vectors with trace-one SPD targets.
struct SpdDataset {
  Matrix x;               // n x input_dim, row i is the class input X_i
  std::vector<Matrix> y;  // n trace-one SPD matrices, d0 x d0
  // population counterpart of y (A Sigma_i A^T, trace-normalized); not
  // persisted, kept for sampling-error checks
  std::vector<Matrix> pop_y;
  unsigned seed = 0;
};

// Per class: a Gaussian with random mean and random SPD covariance (eigen-
// values log-uniform in [0.1, 2]) is sampled 10^4 times, mapped through a
// fixed matrix A, and the sample covariance is trace-normalized into Y_i.
// X_i is the class mean. With n_classes in (0, n), rows cycle through that
// many classes and reused classes get fresh draws (held-out rows then probe
// new samples of the training classes, as in the loss-comparison setup).
// Deterministic under seed.
SpdDataset gen_spd_dataset(Index n, Index input_dim, Index d0, unsigned seed,
                           Index draws_per_class = 10000, Index n_classes = 0);

// Linear-Gaussian latent data x = W_true s + noise with known ground truth.
struct VaeDataset {
  Matrix x;       // n x d
  Matrix w_true;  // d x k
  double noise_sd = 0.1;
  unsigned seed = 0;
};
VaeDataset gen_vae_dataset(Index n, Index d, Index k_true, unsigned seed,
                           double noise_sd = 0.1);

// Centered PCA of row-sample data via the eigendecomposition of the sample
// covariance. Throws RankDeficient when n_components exceeds the data rank.
struct PcaResult {
  Matrix scores;    // n x m
  Matrix loadings;  // d x m, orthonormal columns
  RowVec mean;      // 1 x d column means
};
PcaResult pca_reduce(const Matrix& data, Index n_components);

// CSV with the seed header described above.
void save_matrix_csv(const Matrix& m, unsigned seed, const std::string& path);
std::pair<Matrix, unsigned> load_matrix_csv(const std::string& path);

// Binary tensor container.
void save_tensors(const std::vector<Matrix>& tensors, unsigned seed,
                  const std::string& path);
std::pair<std::vector<Matrix>, unsigned> load_tensors(const std::string& path);

// Paired files <stem>.csv (inputs) and <stem>.tns (targets).
void save_dataset(const SpdDataset& ds, const std::string& stem);
SpdDataset load_dataset(const std::string& stem);

}  // namespace mmlp
