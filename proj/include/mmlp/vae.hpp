#pragma once

// VAE with trace-one Gaussian / mPE conditionals whose parameters are emitted
// by general-form mMLP heads: the six model variants, the closed-form-KLD and
// fully Monte-Carlo ELBO estimators, their pathwise gradients, and the
// training loop.

#include <string>
#include <vector>

#include "mmlp/distributions.hpp"
#include "mmlp/network.hpp"
#include "mmlp/optim.hpp"

namespace mmlp {

enum class Family { kGaussian, kMpe };
enum class VaeVariant { kNdNd, kNdNf, kNfNd, kNfNf, kEfNf, kEfEf };

const char* variant_name(VaeVariant v);
VaeVariant variant_from_name(const std::string& name);

struct VaeModelSpec {
  VaeVariant variant = VaeVariant::kNfNf;
  Index data_dim = 0;    // d
  Index latent_dim = 0;  // k
  std::vector<Index> hidden;  // widths shared by the matrix and vector paths

  Family gen_family() const;
  Family rec_family() const;
  KernelForm gen_kernel() const;  // dispersion form of p(x|s)
  KernelForm rec_kernel() const;
  // Closed-form KLD (Gaussian recognition); only the EfEf variant is fully MC.
  bool closed_form_kld() const;
};

struct VaeParams {
  GeneralMmlpParams rec;  // x -> q(s|x) parameter heads
  GeneralMmlpParams gen;  // s -> p(x|s) parameter heads

  static VaeParams init(const VaeModelSpec& spec, std::mt19937& rng);
  std::vector<Matrix*> tensors();
};

struct VaeGrads {
  GeneralGrads rec;
  GeneralGrads gen;
  std::vector<Matrix*> tensors();
};

// One conditional distribution as emitted by a head; alpha/beta stay 1 for
// Gaussian families.
struct VaeDist {
  Family family = Family::kGaussian;
  Vector mu;
  Matrix omega;
  double log_eta = 0.0;
  double alpha = 1.0;
  double beta = 1.0;

  TraceOneGaussian gaussian() const { return {mu, omega, log_eta}; }
  TraceOneMpe mpe() const { return {mu, omega, log_eta, alpha, beta}; }
  double logpdf(const Vector& v) const;
};

struct Encoded {
  VaeDist dist;
  GeneralForwardTrace trace;
};

Encoded encode(const VaeModelSpec& spec, const VaeParams& params,
               const Vector& x);
Encoded decode(const VaeModelSpec& spec, const VaeParams& params,
               const Vector& s);

struct ElboStats {
  double elbo = 0.0;
  double kld = 0.0;     // closed form, or the MC estimate for EfEf
  double loglik = 0.0;  // reconstruction term
};

// Estimator with the closed-form KLD; requires Gaussian recognition.
ElboStats elbo_gaussian(const VaeModelSpec& spec, const VaeParams& params,
                        const Vector& x, int r, std::mt19937& rng);
// Fully Monte-Carlo estimator; requires mPE recognition.
ElboStats elbo_mpe(const VaeModelSpec& spec, const VaeParams& params,
                   const Vector& x, int r, std::mt19937& rng);
ElboStats elbo(const VaeModelSpec& spec, const VaeParams& params,
               const Vector& x, int r, std::mt19937& rng);

// Gradients of the per-datum ELBO estimate; consumes the same RNG stream as
// the matching elbo call would.
std::pair<ElboStats, VaeGrads> elbo_grads(const VaeModelSpec& spec,
                                          const VaeParams& params,
                                          const Vector& x, int r,
                                          std::mt19937& rng);

struct VaeTrainConfig {
  int epochs = 20;
  int batch = 10;
  int r_train = 1;
  int r_eval = 100;
  double lr = 1e-3;
  unsigned seed = 0;
  std::string metrics_path;     // CSV appended per epoch when nonempty
  std::string checkpoint_path;  // JSON written per epoch when nonempty
};

struct MetricsRow {
  int epoch = 0;
  std::string split;  // "train" or "test"
  double elbo = 0.0;
  double kld = 0.0;
  double loglik = 0.0;
  long wall_ms = 0;
};

struct TrainResult {
  VaeParams params;
  std::vector<MetricsRow> metrics;
};

// Rows of train/test are samples. Throws DivergedTraining on NaN ELBO.
TrainResult train_vae(const VaeModelSpec& spec, const Matrix& train,
                      const Matrix& test, const VaeTrainConfig& config);

// Checkpointing: params + optimizer state + RNG stream + epoch counter.
struct VaeCheckpoint {
  VaeModelSpec spec;
  VaeParams params;
  AdamState opt;
  int epoch = 0;
  std::string rng_state;
};
void save_checkpoint(const VaeCheckpoint& ckpt, const std::string& path);
VaeCheckpoint load_checkpoint(const std::string& path);

// Resume a run from a checkpoint for additional epochs.
TrainResult resume_vae(VaeCheckpoint ckpt, const Matrix& train,
                       const Matrix& test, const VaeTrainConfig& config);

}  // namespace mmlp
