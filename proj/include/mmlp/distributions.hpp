#pragma once

// Trace-one Gaussian and trace-one multivariate power exponential (mPE)
// distributions: log-densities, moments, reparameterized samplers, and the
// parameter derivatives needed by the ELBO estimators. Scale eta is carried
// as log eta throughout; the mPE's alpha/beta are its scale/shape parameters,
// unrelated to the kernel slope/intercept.

#include <random>
#include <utility>

#include "mmlp/linalg.hpp"

namespace mmlp {

struct TraceOneGaussian {
  Vector mu;
  Matrix omega;  // trace-one SPD
  double log_eta = 0.0;

  Index dim() const { return mu.size(); }
  double eta() const { return std::exp(log_eta); }
  void validate() const;
};

struct TraceOneMpe {
  Vector mu;
  Matrix omega;
  double log_eta = 0.0;
  double alpha = 1.0;  // in (0.5, 1.5)
  double beta = 1.0;   // in (0.5, 1.5)

  Index dim() const { return mu.size(); }
  double eta() const { return std::exp(log_eta); }
  void validate() const;
};

// Auxiliary randomness of one mPE draw, retained for pathwise gradients.
struct MpeSampleAux {
  Vector nu;          // uniform on the unit sphere
  double sigma = 0.0; // radial scale, sigma^(2 beta) gamma-distributed
  double eps = 0.0;   // the normal draw behind sigma (exact or backed out)
  int rejects = 0;    // redraws needed to keep sigma^(2 beta) positive
};

enum class MpeSampleMode { kGamma, kGaussApprox };

// ---------------------------------------------------------------------------
// Trace-one Gaussian

double t1g_logpdf(const TraceOneGaussian& dist, const Vector& theta);

// Returns (theta, eps) with theta = mu + Phi eps, Phi Phi^T = eta Omega.
std::pair<Vector, Vector> t1g_sample(const TraceOneGaussian& dist,
                                     std::mt19937& rng);

struct T1gLogpdfGrads {
  RowVec d_omega;  // 1 x d^2, symmetric-direction rows
  RowVec d_mu;     // 1 x d
  double d_log_eta = 0.0;
};
T1gLogpdfGrads t1g_logpdf_grads(const TraceOneGaussian& dist,
                                const Vector& theta);

struct T1gSampleGrads {
  Matrix d_mu;       // d x d identity
  Matrix d_omega;    // d x d^2, columns are symmetric directions
  Vector d_log_eta;  // d
};
T1gSampleGrads t1g_sample_grads(const TraceOneGaussian& dist,
                                const Vector& eps);

// ---------------------------------------------------------------------------
// Trace-one mPE

double mpe_logpdf(const TraceOneMpe& dist, const Vector& theta);

// (mean, covariance) with covariance alpha eta nu(beta) Omega.
std::pair<Vector, Matrix> mpe_moments(const TraceOneMpe& dist);
double mpe_nu_factor(double beta, Index d);

std::pair<Vector, MpeSampleAux> mpe_sample(const TraceOneMpe& dist,
                                           std::mt19937& rng,
                                           MpeSampleMode mode);

struct MpeLogpdfGrads {
  RowVec d_omega;
  RowVec d_mu;
  double d_log_eta = 0.0;
  double d_alpha = 0.0;
  double d_beta = 0.0;
};
MpeLogpdfGrads mpe_logpdf_grads(const TraceOneMpe& dist, const Vector& theta);

struct MpeSampleGrads {
  Matrix d_mu;
  Matrix d_omega;
  Vector d_log_eta;
  Vector d_alpha;
  Vector d_beta;  // through the normal approximation of the radial draw
};
MpeSampleGrads mpe_sample_grads(const TraceOneMpe& dist,
                                const MpeSampleAux& aux);

// ---------------------------------------------------------------------------
// KL divergence against the standard normal prior

double kld_t1g_vs_standard_normal(const TraceOneGaussian& dist);

struct KldGrads {
  RowVec d_omega;
  RowVec d_mu;
  double d_log_eta = 0.0;
};
KldGrads kld_t1g_grads(const TraceOneGaussian& dist);

// Lower Cholesky factor; throws NotPositiveDefinite.
Matrix chol_lower(const Matrix& s);

}  // namespace mmlp
