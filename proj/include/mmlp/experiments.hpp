#pragma once

// Experiment drivers shared by the command-line runner and the acceptance
// suite: the SPD-regression loss comparison, the deep-vs-shallow comparison,
// the mPE sampler approximation study, the VAE training runs, and the
// finite-difference gradient audit.

#include <string>
#include <vector>

#include "mmlp/data.hpp"
#include "mmlp/network.hpp"
#include "mmlp/vae.hpp"

namespace mmlp {

// ---------------------------------------------------------------------------
// SPD regression: one mMLP per loss, common data, cross-evaluated errors.

struct Example1Config {
  Index d0 = 10;
  Index input_dim = 20;
  Index n_train = 20;
  Index n_test = 1000;
  std::vector<Index> hidden = {20, 20, 20};
  int iterations = 200000;
  int batch = 5;
  double lr = 1e-1;        // plain SGD; gradient scale separates the losses
  double lr_decay = 0.1;   // factor applied for the tail of the run
  double decay_at = 0.75;  // fraction of iterations before the decay
  unsigned seed = 0;
  // enough draws that the sampling noise of the targets sits well below the
  // trained models' errors
  Index draws_per_class = 100000;
};

struct Example1Row {
  std::string trained_with;  // qre | stein | quad
  double e_quad = 0.0;
  double e_qre = 0.0;
  double e_stein = 0.0;
};

std::vector<Example1Row> run_example1(const Example1Config& config);

// ---------------------------------------------------------------------------
// Deep (sandwich layers throughout) vs shallow (kernel head only) designs.

struct Example2Config {
  Index d0 = 10;
  Index input_dim = 20;
  Index n_train = 20;
  Index n_test = 1000;
  std::vector<Index> depths = {2, 4};  // j
  Index width = 20;
  int iterations = 200000;
  int batch = 5;
  double lr = 1e-1;
  double lr_decay = 0.1;
  double decay_at = 0.75;
  unsigned seed = 0;
  Index draws_per_class = 100000;
};

struct Example2Row {
  Index depth = 0;
  double deep_e_qre = 0.0;
  double shallow_e_qre = 0.0;
};

std::vector<Example2Row> run_example2(const Example2Config& config);

// ---------------------------------------------------------------------------
// Radial-draw approximation study: exact gamma vs normal-approximated radius.

struct GammaVsGaussConfig {
  std::vector<double> alphas = {0.6, 1.0, 1.4};
  std::vector<double> betas = {0.6, 1.0, 1.4};
  std::vector<Index> dims = {2, 6};
  long draws = 100000;
  unsigned seed = 0;
};

struct GammaVsGaussRow {
  double alpha = 0.0;
  double beta = 0.0;
  Index d = 0;
  std::string mode;  // gamma | gauss-approx
  double cov_sqre = 0.0;      // sample vs analytic covariance
  double max_mean_err = 0.0;  // worst per-dimension mean error
};

std::vector<GammaVsGaussRow> run_gamma_vs_gauss(const GammaVsGaussConfig& config);

// ---------------------------------------------------------------------------
// VAE runs on the linear-Gaussian toy data.

struct VaeRunConfig {
  VaeVariant variant = VaeVariant::kNfNf;
  Index data_dim = 10;
  Index latent_dim = 3;
  std::vector<Index> hidden = {10};
  Index n_train = 200;
  Index n_test = 100;
  Index k_true = 3;
  double noise_sd = 0.1;
  Index n_samples = 0;  // rows of generated data to hand back
  VaeTrainConfig train;
};

struct VaeRunResult {
  TrainResult result;
  Matrix samples;  // n_samples x data_dim draws from the trained model
};

VaeRunResult run_vae_experiment(const VaeRunConfig& config);

// ---------------------------------------------------------------------------
// Gradient audit: every analytic derivative against its finite-difference
// oracle, at the tolerance each chain depth warrants.

struct GradCheckRow {
  std::string name;
  int seeds = 0;
  double max_rel = 0.0;
  double tol = 0.0;
  bool pass = false;
};

std::vector<GradCheckRow> run_gradcheck(int seeds = 20);

}  // namespace mmlp
