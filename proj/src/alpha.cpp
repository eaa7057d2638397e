#include "mmlp/alpha.hpp"

#include <cmath>

namespace mmlp {

AlphaJacobian alpha_product(const AlphaJacobian& df, const AlphaJacobian& dg,
                            const Matrix& f_val, const Matrix& g_val) {
  if (df.in != dg.in) {
    throw DimensionMismatch("alpha_product: factors differentiate different variables");
  }
  if (f_val.rows() != df.out.rows || f_val.cols() != df.out.cols ||
      g_val.rows() != dg.out.rows || g_val.cols() != dg.out.cols) {
    throw DimensionMismatch("alpha_product: value/Jacobian shape mismatch");
  }
  if (df.out.cols != dg.out.rows) {
    throw DimensionMismatch("alpha_product: F and G are not conformable");
  }
  const Index m = f_val.rows();
  const Index r = g_val.cols();
  Matrix entries =
      kron(g_val.transpose(), Matrix::Identity(m, m)) * df.entries +
      kron(Matrix::Identity(r, r), f_val) * dg.entries;
  return AlphaJacobian({m, r}, df.in, std::move(entries));
}

AlphaJacobian alpha_chain(const AlphaJacobian& outer,
                          const AlphaJacobian& inner) {
  if (outer.in != inner.out) {
    throw DimensionMismatch("alpha_chain: outer input shape != inner output shape");
  }
  return AlphaJacobian(outer.out, inner.in, outer.entries * inner.entries);
}

Matrix LogEigTensor::as_jacobian() const {
  const Index d2 = dim * dim;
  Matrix jac(d2, d2);
  for (Index c = 0; c < d2; ++c) {
    jac.col(c) = vec(partials[static_cast<size_t>(c)]);
  }
  return jac;
}

LogEigTensor dlog_through_eig(const Matrix& y, double gap_tol,
                              EigGradDivisor divisor) {
  const Index d = y.rows();
  EigDecomposition eig = sym_eig(y);
  if (eig.values.minCoeff() <= kEigenFloor) {
    throw NotPositiveDefinite("dlog_through_eig: input is not strictly PD");
  }
  const Vector& lam = eig.values;
  const Vector loglam = lam.array().log();
  for (Index k = 0; k < d; ++k) {
    for (Index l = k + 1; l < d; ++l) {
      if (std::abs(loglam(k) - loglam(l)) < gap_tol) {
        throw DegenerateSpectrum("dlog_through_eig: eigenvalue gap below tolerance");
      }
    }
  }

  const Matrix& u = eig.vectors;
  LogEigTensor out;
  out.dim = d;
  out.partials.resize(static_cast<size_t>(d * d));

  Matrix xi(d, d);
  Matrix inner(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      // Symmetrized perturbation direction sym(e_i e_j^T).
      for (Index k = 0; k < d; ++k) {
        xi(k, k) = 0.0;
        for (Index l = k + 1; l < d; ++l) {
          const double num = 0.5 * (u(i, k) * u(j, l) + u(i, l) * u(j, k));
          const double den = divisor == EigGradDivisor::kEigenvalueDiff
                                 ? (lam(l) - lam(k))
                                 : (loglam(l) - loglam(k));
          xi(k, l) = num / den;
          xi(l, k) = -xi(k, l);
        }
      }
      // inner = Xi*Lambda - Lambda*Xi + dLambda with Lambda = diag(log lam)
      for (Index k = 0; k < d; ++k) {
        for (Index l = 0; l < d; ++l) {
          inner(k, l) = xi(k, l) * (loglam(l) - loglam(k));
        }
        const double dlam = u(i, k) * u(j, k);
        inner(k, k) = divisor == EigGradDivisor::kEigenvalueDiff
                          ? dlam / lam(k)
                          : dlam;
      }
      out.partials[static_cast<size_t>(i + j * d)] =
          u * inner * u.transpose();
    }
  }
  return out;
}

Matrix jitter_spd(const Matrix& y) {
  const double delta = 1e-9 * y.trace() / static_cast<double>(y.rows());
  return y + delta * Matrix::Identity(y.rows(), y.cols());
}

}  // namespace mmlp
