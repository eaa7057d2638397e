#include "mmlp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mmlp {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

void fix_sign(Matrix& vectors) {
  for (Index k = 0; k < vectors.cols(); ++k) {
    for (Index i = 0; i < vectors.rows(); ++i) {
      const double v = vectors(i, k);
      if (v != 0.0) {
        if (v < 0.0) vectors.col(k) = -vectors.col(k);
        break;
      }
    }
  }
}

}  // namespace

EigDecomposition sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("sym_eig: matrix is not square");
  }
  if (!a.allFinite()) {
    throw NonFinite("sym_eig: non-finite entries");
  }
  const Index d = a.rows();
  Matrix m = sym_part(a);
  Matrix v = Matrix::Identity(d, d);

  const double tol = 1e-12 * std::max(m.norm(), 1e-300);
  constexpr int kMaxSweeps = 100;

  int sweep = 0;
  while (off_diagonal_norm(m) >= tol) {
    if (++sweep > kMaxSweeps) {
      throw NoConvergence("sym_eig: Jacobi sweep budget exceeded");
    }
    for (Index p = 0; p < d - 1; ++p) {
      for (Index q = p + 1; q < d; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = m(p, p), aqq = m(q, q);
        m(p, p) = app - t * apq;
        m(q, q) = aqq + t * apq;
        m(p, q) = m(q, p) = 0.0;
        for (Index r = 0; r < d; ++r) {
          if (r != p && r != q) {
            const double arp = m(r, p), arq = m(r, q);
            m(r, p) = m(p, r) = arp - s * (arq + tau * arp);
            m(r, q) = m(q, r) = arq + s * (arp - tau * arq);
          }
          const double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  EigDecomposition eig;
  eig.values.resize(d);
  eig.vectors.resize(d, d);
  std::vector<Index> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&m](Index i, Index j) { return m(i, i) > m(j, j); });
  for (Index k = 0; k < d; ++k) {
    eig.values(k) = m(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
    eig.vectors.col(k) = v.col(order[static_cast<size_t>(k)]);
  }
  fix_sign(eig.vectors);
  return eig;
}

Matrix mat_log_spd(const Matrix& a, double eigen_floor) {
  EigDecomposition eig = sym_eig(a);
  if (eig.values.minCoeff() <= eigen_floor) {
    throw NotPositiveDefinite("mat_log_spd: eigenvalue " +
                              std::to_string(eig.values.minCoeff()) +
                              " at or below floor");
  }
  Vector logs = eig.values.array().log();
  return eig.vectors * logs.asDiagonal() * eig.vectors.transpose();
}

Matrix mat_exp_sym(const Matrix& a) {
  EigDecomposition eig = sym_eig(a);
  Vector exps = eig.values.array().exp();
  if (!exps.allFinite()) {
    throw NonFinite("mat_exp_sym: overflow in exp of eigenvalues");
  }
  return eig.vectors * exps.asDiagonal() * eig.vectors.transpose();
}

Matrix commutation_matrix(Index m, Index n) {
  Matrix k = Matrix::Zero(m * n, m * n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      k(j + i * n, i + j * m) = 1.0;  // vec(A^T) index <- vec(A) index
  return k;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double min_eigenvalue(const Matrix& a) { return sym_eig(a).values.minCoeff(); }

}  // namespace mmlp
