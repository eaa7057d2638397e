#include "mmlp/activations.hpp"

#include <cmath>

namespace mmlp {

namespace {

Matrix tanh_features(const Matrix& z, const MercerParams& p) {
  return ((p.slope * z).array() + p.intercept).tanh().matrix();
}

}  // namespace

Matrix mercer_kernel(const Matrix& z, const MercerParams& p) {
  Matrix f = tanh_features(z, p);
  return sym_part(f.transpose() * f);
}

Matrix diag_mercer_kernel(const Matrix& z, const MercerParams& p) {
  Matrix f = tanh_features(z, p);
  return Matrix(f.colwise().squaredNorm().asDiagonal());
}

Matrix trace_one_normalize(const Matrix& k, double trace_floor) {
  const double tr = k.trace();
  if (tr <= trace_floor) {
    throw TraceUnderflow("trace_one_normalize: kernel trace " +
                         std::to_string(tr) + " at or below floor");
  }
  return k / tr;
}

AlphaJacobian mercer_activation_jacobian(const Matrix& z,
                                         const MercerParams& p) {
  const Index d = z.rows();
  Matrix f = tanh_features(z, p);
  Matrix g = p.slope * (1.0 - f.array().square());  // d tanh columns
  Matrix k = f.transpose() * f;
  const double tr = k.trace();
  if (tr <= kTraceFloor) {
    throw TraceUnderflow("mercer_activation_jacobian: collapsed kernel");
  }

  // dtr(i) = d trK / d z_i as a column
  Matrix dtr(d, d);
  for (Index i = 0; i < d; ++i) dtr.col(i) = 2.0 * f.col(i).cwiseProduct(g.col(i));

  AlphaJacobian jac({d, d}, {d, d});
  const double tr2 = tr * tr;
  for (Index n = 0; n < d; ++n) {
    for (Index m = 0; m < d; ++m) {
      const Index row = m + n * d;
      const double kmn = k(m, n);
      for (Index i = 0; i < d; ++i) {
        // quotient rule: (trK * dkappa_mn - kappa_mn * dtrK) / trK^2
        Vector dk = Vector::Zero(d);
        if (i == m) dk += f.col(n).cwiseProduct(g.col(i));
        if (i == n) dk += f.col(m).cwiseProduct(g.col(i));
        jac.entries.block(row, i * d, 1, d) =
            ((tr * dk - kmn * dtr.col(i)) / tr2).transpose();
      }
    }
  }
  return jac;
}

AlphaJacobian diag_mercer_activation_jacobian(const Matrix& z,
                                              const MercerParams& p) {
  const Index d = z.rows();
  Matrix f = tanh_features(z, p);
  Matrix g = p.slope * (1.0 - f.array().square());
  Vector kdiag(d);
  for (Index i = 0; i < d; ++i) kdiag(i) = f.col(i).squaredNorm();
  const double tr = kdiag.sum();
  if (tr <= kTraceFloor) {
    throw TraceUnderflow("diag_mercer_activation_jacobian: collapsed kernel");
  }

  Matrix dtr(d, d);
  for (Index i = 0; i < d; ++i) dtr.col(i) = 2.0 * f.col(i).cwiseProduct(g.col(i));

  AlphaJacobian jac({d, d}, {d, d});
  const double tr2 = tr * tr;
  for (Index m = 0; m < d; ++m) {
    const Index row = m + m * d;
    for (Index i = 0; i < d; ++i) {
      Vector dk = Vector::Zero(d);
      if (i == m) dk = dtr.col(m);
      jac.entries.block(row, i * d, 1, d) =
          ((tr * dk - kdiag(m) * dtr.col(i)) / tr2).transpose();
    }
  }
  return jac;
}

RowVec mercer_activation_vjp(const Matrix& z, const RowVec& v,
                             const MercerParams& p) {
  const Index d = z.rows();
  Matrix f = tanh_features(z, p);
  Matrix g = p.slope * (1.0 - f.array().square());
  Matrix k = f.transpose() * f;
  const double tr = k.trace();
  if (tr <= kTraceFloor) {
    throw TraceUnderflow("mercer_activation_vjp: collapsed kernel");
  }
  Matrix s = unvec(v, d, d);
  // v.DK through the Gram structure, then the trace-one quotient rule
  Matrix t = g.cwiseProduct(f * (s + s.transpose()));
  Matrix dtr = 2.0 * f.cwiseProduct(g);
  const double sk = s.cwiseProduct(k).sum();
  return vec(Matrix(t / tr - (sk / (tr * tr)) * dtr)).transpose();
}

RowVec diag_mercer_activation_vjp(const Matrix& z, const RowVec& v,
                                  const MercerParams& p) {
  const Index d = z.rows();
  Matrix f = tanh_features(z, p);
  Matrix g = p.slope * (1.0 - f.array().square());
  Vector kdiag(d);
  for (Index i = 0; i < d; ++i) kdiag(i) = f.col(i).squaredNorm();
  const double tr = kdiag.sum();
  if (tr <= kTraceFloor) {
    throw TraceUnderflow("diag_mercer_activation_vjp: collapsed kernel");
  }
  Matrix s = unvec(v, d, d);
  Matrix dtr = 2.0 * f.cwiseProduct(g);
  Matrix t = dtr * s.diagonal().asDiagonal();
  const double sk = s.diagonal().dot(kdiag);
  return vec(Matrix(t / tr - (sk / (tr * tr)) * dtr)).transpose();
}

Vector ScalarActivation::apply(const Vector& v) const {
  switch (kind) {
    case Kind::kTanh:
      return v.array().tanh();
    case Kind::kLinear:
      return v;
    case Kind::kSigmoidBounded:
      return offset + 1.0 / (1.0 + (-v.array()).exp());
  }
  return v;
}

Matrix ScalarActivation::jacobian(const Vector& v) const {
  switch (kind) {
    case Kind::kTanh:
      return Matrix(Vector(1.0 - v.array().tanh().square()).asDiagonal());
    case Kind::kLinear:
      return Matrix::Identity(v.size(), v.size());
    case Kind::kSigmoidBounded: {
      Vector s = 1.0 / (1.0 + (-v.array()).exp());
      return Matrix(Vector(s.array() * (1.0 - s.array())).asDiagonal());
    }
  }
  return Matrix::Identity(v.size(), v.size());
}

Vector HeadActivation::apply(const Vector& v) const {
  if (v.size() != size()) {
    throw DimensionMismatch("HeadActivation: segment lengths do not cover input");
  }
  Vector out(v.size());
  Index at = 0;
  for (const auto& [len, act] : segments) {
    out.segment(at, len) = act.apply(v.segment(at, len));
    at += len;
  }
  return out;
}

Matrix HeadActivation::jacobian(const Vector& v) const {
  if (v.size() != size()) {
    throw DimensionMismatch("HeadActivation: segment lengths do not cover input");
  }
  Matrix out = Matrix::Zero(v.size(), v.size());
  Index at = 0;
  for (const auto& [len, act] : segments) {
    out.block(at, at, len, len) = act.jacobian(v.segment(at, len));
    at += len;
  }
  return out;
}

Index HeadActivation::size() const {
  Index n = 0;
  for (const auto& [len, act] : segments) n += len;
  return n;
}

}  // namespace mmlp
