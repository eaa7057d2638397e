#pragma once

// Dense small-matrix linear algebra: symmetric eigendecomposition via cyclic
// Jacobi rotations, matrix log/exp on SPD matrices, and the vec / unvec /
// commutation / Kronecker operator set used by the matrix calculus layer.

#include <Eigen/Core>

#include "mmlp/errors.hpp"

namespace mmlp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using Index = Eigen::Index;

struct EigDecomposition {
  Matrix vectors;  // orthonormal, columns are eigenvectors
  Vector values;   // sorted descending

  Matrix reconstruct() const {
    return vectors * values.asDiagonal() * vectors.transpose();
  }
};

// Cyclic Jacobi eigensolver for symmetric matrices. Eigenvalues sorted
// descending; each eigenvector's first nonzero component is made positive so
// downstream gradients are reproducible.
// Throws NonFinite on NaN/Inf input, NoConvergence past the sweep budget.
EigDecomposition sym_eig(const Matrix& a);

// log of an SPD matrix through its eigendecomposition.
// Eigenvalues at or below eigen_floor raise NotPositiveDefinite.
inline constexpr double kEigenFloor = 1e-12;
Matrix mat_log_spd(const Matrix& a, double eigen_floor = kEigenFloor);

// exp of a symmetric matrix; the result is SPD.
Matrix mat_exp_sym(const Matrix& a);

// Column-by-column stacking.
inline Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

inline Matrix unvec(const Vector& v, Index m, Index n) {
  if (v.size() != m * n) {
    throw DimensionMismatch("unvec: vector of length " +
                            std::to_string(v.size()) + " is not " +
                            std::to_string(m) + "x" + std::to_string(n));
  }
  return Eigen::Map<const Matrix>(v.data(), m, n);
}

inline Matrix unvec(const RowVec& v, Index m, Index n) {
  return unvec(Vector(v.transpose()), m, n);
}

// Permutation K with K*vec(A) == vec(A^T) for all m x n matrices A.
Matrix commutation_matrix(Index m, Index n);

Matrix kron(const Matrix& a, const Matrix& b);

inline Matrix sym_part(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

// min eigenvalue via sym_eig; convenience for SPD checks in tests
double min_eigenvalue(const Matrix& a);

}  // namespace mmlp
