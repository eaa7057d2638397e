#include "mmlp/distributions.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace mmlp {

namespace {

constexpr double kTraceTol = 1e-10;

void check_shape(const Vector& mu, const Matrix& omega) {
  if (omega.rows() != omega.cols() || omega.rows() != mu.size()) {
    throw DimensionMismatch("distribution: mu/omega shape mismatch");
  }
  if (std::abs(omega.trace() - 1.0) > kTraceTol) {
    throw TraceUnderflow("distribution: omega trace deviates from one by " +
                         std::to_string(std::abs(omega.trace() - 1.0)));
  }
}

Matrix inverse_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("inverse_spd: Cholesky failed");
  }
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

double log_det_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("log_det_spd: Cholesky failed");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// The lower-triangular "half diagonal" projector from the Cholesky
// differential: dL = L phi(L^-1 dS L^-T).
Matrix phi_half(const Matrix& a) {
  Matrix p = a.triangularView<Eigen::StrictlyLower>();
  p.diagonal() = 0.5 * a.diagonal();
  return p;
}

// d x d^2 pathwise Jacobian of theta through the Cholesky factor of
// S = scale * Omega, along symmetrized coordinate directions of Omega.
Matrix chol_direction_grads(const Matrix& phi, double scale,
                            const Vector& tail) {
  const Index d = phi.rows();
  auto lower = phi.triangularView<Eigen::Lower>();
  Matrix grads(d, d * d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      Matrix ds = Matrix::Zero(d, d);
      ds(i, j) += 0.5 * scale;
      ds(j, i) += 0.5 * scale;
      Matrix x = lower.solve(ds);
      x = lower.solve(x.transpose()).transpose();
      grads.col(i + j * d) = phi * (phi_half(x) * tail);
    }
  }
  return grads;
}

Vector normal_vector(Index d, std::mt19937& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = nd(rng);
  return v;
}

// digamma via the shift recurrence and the asymptotic series
double digamma(double x) {
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

double log_c_mpe(double alpha, double beta, Index dim) {
  const double d = static_cast<double>(dim);
  return std::log(beta) + std::lgamma(0.5 * d) - 0.5 * d * std::log(M_PI) -
         std::lgamma(0.5 * d / beta) - (0.5 * d / beta) * std::log(2.0) -
         0.5 * d * std::log(alpha);
}

}  // namespace

Matrix chol_lower(const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("chol_lower: matrix is not positive definite");
  }
  return llt.matrixL();
}

void TraceOneGaussian::validate() const {
  check_shape(mu, omega);
  if (!std::isfinite(log_eta)) throw NonFinite("TraceOneGaussian: log_eta");
}

void TraceOneMpe::validate() const {
  check_shape(mu, omega);
  if (!std::isfinite(log_eta)) throw NonFinite("TraceOneMpe: log_eta");
  if (alpha < 0.5 || alpha > 1.5 || beta < 0.5 || beta > 1.5) {
    throw DimensionMismatch("TraceOneMpe: alpha/beta outside [0.5, 1.5]");
  }
}

// ---------------------------------------------------------------------------
// Trace-one Gaussian

double t1g_logpdf(const TraceOneGaussian& dist, const Vector& theta) {
  dist.validate();
  const double d = static_cast<double>(dist.dim());
  Vector delta = theta - dist.mu;
  Matrix omega_inv = inverse_spd(dist.omega);
  const double quad = delta.dot(omega_inv * delta) / dist.eta();
  const double log_det = d * (std::log(2.0 * M_PI) + dist.log_eta) +
                         log_det_spd(dist.omega);
  return -0.5 * (log_det + quad);
}

std::pair<Vector, Vector> t1g_sample(const TraceOneGaussian& dist,
                                     std::mt19937& rng) {
  dist.validate();
  Matrix phi = chol_lower(dist.eta() * dist.omega);
  Vector eps = normal_vector(dist.dim(), rng);
  return {dist.mu + phi * eps, eps};
}

T1gLogpdfGrads t1g_logpdf_grads(const TraceOneGaussian& dist,
                                const Vector& theta) {
  dist.validate();
  Vector delta = theta - dist.mu;
  Matrix omega_inv = inverse_spd(dist.omega);
  Vector oid = omega_inv * delta;

  T1gLogpdfGrads g;
  Matrix d_omega = -0.5 * omega_inv +
                   (0.5 / dist.eta()) * (oid * oid.transpose());
  g.d_omega = vec(d_omega).transpose();
  g.d_mu = (oid / dist.eta()).transpose();
  g.d_log_eta = -0.5 * static_cast<double>(dist.dim()) +
                0.5 * delta.dot(oid) / dist.eta();
  return g;
}

T1gSampleGrads t1g_sample_grads(const TraceOneGaussian& dist,
                                const Vector& eps) {
  dist.validate();
  const Index d = dist.dim();
  Matrix phi = chol_lower(dist.eta() * dist.omega);

  T1gSampleGrads g;
  g.d_mu = Matrix::Identity(d, d);
  g.d_omega = chol_direction_grads(phi, dist.eta(), eps);
  g.d_log_eta = 0.5 * phi * eps;
  return g;
}

// ---------------------------------------------------------------------------
// Trace-one mPE

double mpe_logpdf(const TraceOneMpe& dist, const Vector& theta) {
  dist.validate();
  Vector delta = theta - dist.mu;
  Matrix omega_inv = inverse_spd(dist.omega);
  const double t = delta.dot(omega_inv * delta);
  const double scaled = t / (dist.alpha * dist.eta());
  return log_c_mpe(dist.alpha, dist.beta, dist.dim()) -
         0.5 * (static_cast<double>(dist.dim()) * dist.log_eta +
                log_det_spd(dist.omega)) -
         0.5 * std::pow(scaled, dist.beta);
}

double mpe_nu_factor(double beta, Index dim) {
  const double d = static_cast<double>(dim);
  return std::exp(std::log(2.0) / beta +
                  std::lgamma((d + 2.0) / (2.0 * beta)) -
                  std::lgamma(d / (2.0 * beta))) /
         d;
}

std::pair<Vector, Matrix> mpe_moments(const TraceOneMpe& dist) {
  dist.validate();
  const double scale =
      dist.alpha * dist.eta() * mpe_nu_factor(dist.beta, dist.dim());
  return {dist.mu, scale * dist.omega};
}

std::pair<Vector, MpeSampleAux> mpe_sample(const TraceOneMpe& dist,
                                           std::mt19937& rng,
                                           MpeSampleMode mode) {
  dist.validate();
  const double d = static_cast<double>(dist.dim());
  const double two_beta = 2.0 * dist.beta;

  MpeSampleAux aux;
  Vector raw = normal_vector(dist.dim(), rng);
  while (raw.norm() < 1e-12) raw = normal_vector(dist.dim(), rng);
  aux.nu = raw / raw.norm();

  const double spread = std::sqrt(2.0 * d / dist.beta);
  double u = 0.0;
  if (mode == MpeSampleMode::kGamma) {
    std::gamma_distribution<double> gd(d / two_beta, 2.0);
    u = gd(rng);
    // back out the normal-approximation draw so the beta path stays defined
    aux.eps = (u - d / dist.beta) / spread;
  } else {
    std::normal_distribution<double> nd(0.0, 1.0);
    for (;;) {
      aux.eps = nd(rng);
      u = d / dist.beta + aux.eps * spread;
      if (u > 0.0) break;
      ++aux.rejects;
    }
  }
  aux.sigma = std::pow(u, 1.0 / two_beta);

  Matrix phi = chol_lower(dist.alpha * dist.eta() * dist.omega);
  return {dist.mu + aux.sigma * (phi * aux.nu), aux};
}

MpeLogpdfGrads mpe_logpdf_grads(const TraceOneMpe& dist, const Vector& theta) {
  dist.validate();
  const double d = static_cast<double>(dist.dim());
  const double ae = dist.alpha * dist.eta();
  Vector delta = theta - dist.mu;
  Matrix omega_inv = inverse_spd(dist.omega);
  Vector oid = omega_inv * delta;
  const double t = delta.dot(oid);
  const double scaled = t / ae;
  // beta (t/ae)^(beta-1) / ae, kept finite at t = 0
  const double ring =
      t > 0.0 ? dist.beta * std::pow(scaled, dist.beta - 1.0) / ae : 0.0;

  MpeLogpdfGrads g;
  Matrix d_omega = -0.5 * omega_inv + 0.5 * ring * (oid * oid.transpose());
  g.d_omega = vec(d_omega).transpose();
  g.d_mu = (ring * oid).transpose();
  g.d_log_eta = -0.5 * d + 0.5 * ring * t;
  g.d_alpha = (-0.5 * d + 0.5 * ring * t) / dist.alpha;
  const double d_log_c =
      1.0 / dist.beta +
      (0.5 * d / (dist.beta * dist.beta)) *
          (digamma(0.5 * d / dist.beta) + std::log(2.0));
  g.d_beta = d_log_c -
             (t > 0.0 ? 0.5 * std::pow(scaled, dist.beta) * std::log(scaled)
                      : 0.0);
  return g;
}

MpeSampleGrads mpe_sample_grads(const TraceOneMpe& dist,
                                const MpeSampleAux& aux) {
  dist.validate();
  const Index d = dist.dim();
  const double dd = static_cast<double>(d);
  Matrix phi = chol_lower(dist.alpha * dist.eta() * dist.omega);
  Vector phinu = phi * aux.nu;

  MpeSampleGrads g;
  g.d_mu = Matrix::Identity(d, d);
  g.d_omega = chol_direction_grads(phi, dist.alpha * dist.eta(),
                                   Vector(aux.sigma * aux.nu));
  g.d_log_eta = 0.5 * aux.sigma * phinu;
  g.d_alpha = aux.sigma / (2.0 * dist.alpha) * phinu;

  // radial path: sigma = u^(1/2 beta), u = d/beta + eps sqrt(2 d/beta)
  const double beta = dist.beta;
  const double u = dd / beta + aux.eps * std::sqrt(2.0 * dd / beta);
  const double du_dbeta =
      -dd / (beta * beta) -
      0.5 * aux.eps * std::sqrt(2.0 * dd / (beta * beta * beta));
  const double dsigma_dbeta =
      aux.sigma * (du_dbeta / (2.0 * beta * u) -
                   std::log(u) / (2.0 * beta * beta));
  g.d_beta = dsigma_dbeta * phinu;
  return g;
}

// ---------------------------------------------------------------------------
// KLD against the standard normal prior

double kld_t1g_vs_standard_normal(const TraceOneGaussian& dist) {
  dist.validate();
  const double d = static_cast<double>(dist.dim());
  return 0.5 * (dist.eta() * dist.omega.trace() + dist.mu.squaredNorm() - d -
                d * dist.log_eta - log_det_spd(dist.omega));
}

KldGrads kld_t1g_grads(const TraceOneGaussian& dist) {
  dist.validate();
  const Index d = dist.dim();
  KldGrads g;
  Matrix d_omega =
      0.5 * (dist.eta() * Matrix::Identity(d, d) - inverse_spd(dist.omega));
  g.d_omega = vec(d_omega).transpose();
  g.d_mu = dist.mu.transpose();
  g.d_log_eta =
      0.5 * (dist.eta() * dist.omega.trace() - static_cast<double>(d));
  return g;
}

}  // namespace mmlp
