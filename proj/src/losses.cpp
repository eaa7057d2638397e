#include "mmlp/losses.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace mmlp {

namespace {

// Jitter policy: retry once on a strictness failure, then propagate.
Matrix safe_log(const Matrix& a) {
  try {
    return mat_log_spd(a);
  } catch (const NotPositiveDefinite&) {
    return mat_log_spd(jitter_spd(a));
  }
}

LogEigTensor safe_dlog(const Matrix& a) {
  try {
    return dlog_through_eig(a);
  } catch (const DegenerateSpectrum&) {
    return dlog_through_eig(jitter_spd(a));
  } catch (const NotPositiveDefinite&) {
    return dlog_through_eig(jitter_spd(a));
  }
}

double log_det_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("log_det_spd: Cholesky failed");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Matrix inverse_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("inverse_spd: Cholesky failed");
  }
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

}  // namespace

double qre_divergence(const Matrix& x_tilde, const Matrix& x) {
  Matrix log_xt = safe_log(x_tilde);
  Matrix log_x = safe_log(x);
  return (x_tilde * (log_xt - log_x)).trace();
}

double qre_loss(const Matrix& y_hat, const Matrix& y) {
  return 0.5 * (qre_divergence(y_hat, y) + qre_divergence(y, y_hat));
}

RowVec qre_loss_grad(const Matrix& y_hat, const Matrix& y) {
  const Index d = y_hat.rows();
  Matrix log_yh = safe_log(y_hat);
  Matrix log_y = safe_log(y);
  LogEigTensor dlog = safe_dlog(y_hat);

  Matrix diff = y_hat - y;
  RowVec grad(d * d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      grad(i + j * d) = (diff * dlog.partial(i, j)).trace();
    }
  }
  return 0.5 * (vec(log_yh).transpose() + grad - vec(log_y).transpose());
}

double stein_loss(const Matrix& y_hat, const Matrix& y) {
  Matrix mid = 0.5 * (y_hat + y);
  return log_det_spd(mid) - 0.5 * log_det_spd(y_hat) - 0.5 * log_det_spd(y);
}

RowVec stein_loss_grad(const Matrix& y_hat, const Matrix& y) {
  Matrix mid = 0.5 * (y_hat + y);
  Matrix g = 0.5 * inverse_spd(mid) - 0.5 * inverse_spd(y_hat);
  return vec(g).transpose();
}

double quad_loss(const Matrix& y_hat, const Matrix& y) {
  return (y_hat - y).squaredNorm();
}

RowVec quad_loss_grad(const Matrix& y_hat, const Matrix& y) {
  return 2.0 * vec(Matrix(y_hat - y)).transpose();
}

double loss_value(LossKind kind, const Matrix& y_hat, const Matrix& y) {
  switch (kind) {
    case LossKind::kQre:
      return qre_loss(y_hat, y);
    case LossKind::kStein:
      return stein_loss(y_hat, y);
    case LossKind::kQuad:
      return quad_loss(y_hat, y);
  }
  return 0.0;
}

RowVec loss_grad(LossKind kind, const Matrix& y_hat, const Matrix& y) {
  switch (kind) {
    case LossKind::kQre:
      return qre_loss_grad(y_hat, y);
    case LossKind::kStein:
      return stein_loss_grad(y_hat, y);
    case LossKind::kQuad:
      return quad_loss_grad(y_hat, y);
  }
  return RowVec();
}

}  // namespace mmlp
