#include "mmlp/gradcheck.hpp"

#include <cmath>

namespace mmlp {

namespace {

AlphaJacobian fd_impl(const MatrixFn& f, const Matrix& x, double h,
                      bool symmetrize) {
  const Index n = x.rows();
  const Index q = x.cols();
  Matrix xp = x, xm = x;
  AlphaJacobian jac;
  bool first = true;
  for (Index j = 0; j < q; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double step = h * (1.0 + std::abs(x(i, j)));
      xp = x;
      xm = x;
      if (symmetrize && i != j) {
        xp(i, j) += 0.5 * step;
        xp(j, i) += 0.5 * step;
        xm(i, j) -= 0.5 * step;
        xm(j, i) -= 0.5 * step;
      } else {
        xp(i, j) += step;
        xm(i, j) -= step;
      }
      const Matrix fp = f(xp);
      const Matrix fm = f(xm);
      if (!fp.allFinite() || !fm.allFinite()) {
        throw NonFinite("fd_jacobian: non-finite function value");
      }
      if (first) {
        jac = AlphaJacobian({fp.rows(), fp.cols()}, {n, q});
        first = false;
      }
      jac.entries.col(i + j * n) = (vec(fp) - vec(fm)) / (2.0 * step);
    }
  }
  return jac;
}

}  // namespace

AlphaJacobian fd_jacobian(const MatrixFn& f, const Matrix& x, double h) {
  return fd_impl(f, x, h, false);
}

AlphaJacobian fd_jacobian_sym(const MatrixFn& f, const Matrix& x, double h) {
  return fd_impl(f, x, h, true);
}

RowVec fd_gradient(const ScalarFn& f, const Matrix& x, double h) {
  MatrixFn wrap = [&f](const Matrix& m) {
    Matrix out(1, 1);
    out(0, 0) = f(m);
    return out;
  };
  return fd_impl(wrap, x, h, false).entries.row(0);
}

RowVec fd_gradient_sym(const ScalarFn& f, const Matrix& x, double h) {
  MatrixFn wrap = [&f](const Matrix& m) {
    Matrix out(1, 1);
    out(0, 0) = f(m);
    return out;
  };
  return fd_impl(wrap, x, h, true).entries.row(0);
}

double rel_error(const Matrix& a, const Matrix& b, double atol) {
  const double denom =
      atol + std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / denom;
}

McMoments mc_moments(const std::function<Vector()>& sampler, long n) {
  Vector first = sampler();
  const Index d = first.size();
  Vector sum = Vector::Zero(d);
  Matrix outer = Matrix::Zero(d, d);
  sum += first;
  outer += first * first.transpose();
  for (long i = 1; i < n; ++i) {
    Vector s = sampler();
    sum += s;
    outer += s * s.transpose();
  }
  McMoments m;
  m.n = n;
  m.mean = sum / static_cast<double>(n);
  m.cov = outer / static_cast<double>(n) - m.mean * m.mean.transpose();
  m.cov = sym_part(m.cov) * (static_cast<double>(n) / (n - 1.0));
  m.mean_se = (m.cov.diagonal() / static_cast<double>(n)).array().sqrt();
  return m;
}

}  // namespace mmlp
