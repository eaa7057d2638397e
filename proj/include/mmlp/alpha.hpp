#pragma once

// The matrix-derivative engine: dense Jacobians of vec-stacked partials with
// product and chain rules that compose by matrix multiplication, plus the
// derivative of the matrix logarithm through the eigendecomposition.

#include <utility>

#include "mmlp/linalg.hpp"

namespace mmlp {

struct Shape {
  Index rows = 0;
  Index cols = 0;
  Index size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

// Row r, column c holds d(vec F)_r / d(vec X)_c for F of shape out and X of
// shape in.
struct AlphaJacobian {
  Shape out;
  Shape in;
  Matrix entries;

  AlphaJacobian() = default;
  AlphaJacobian(Shape out_shape, Shape in_shape)
      : out(out_shape),
        in(in_shape),
        entries(Matrix::Zero(out_shape.size(), in_shape.size())) {}
  AlphaJacobian(Shape out_shape, Shape in_shape, Matrix m)
      : out(out_shape), in(in_shape), entries(std::move(m)) {
    if (entries.rows() != out.size() || entries.cols() != in.size()) {
      throw DimensionMismatch("AlphaJacobian: entries do not match shapes");
    }
  }

  static AlphaJacobian identity(Shape s) {
    return AlphaJacobian(s, s, Matrix::Identity(s.size(), s.size()));
  }
};

// Product rule: D_X(FG) = (G^T kron I_m) D_X F + (I_r kron F) D_X G
// for F (m x p), G (p x r), both functions of the same X.
AlphaJacobian alpha_product(const AlphaJacobian& df, const AlphaJacobian& dg,
                            const Matrix& f_val, const Matrix& g_val);

// Chain rule: D_X G(F(X)) = D_Y G * D_X F.
AlphaJacobian alpha_chain(const AlphaJacobian& outer,
                          const AlphaJacobian& inner);

// Derivative of log of an SPD matrix through its eigendecomposition.
// partial(i, j) is the d x d matrix d(log Y)/dY_ij under the symmetrized
// perturbation convention: entry (i, j) and (j, i) move together, each slice
// reports the derivative along sym(E_ij).
struct LogEigTensor {
  Index dim = 0;
  std::vector<Matrix> partials;  // d*d slices, (i, j) at i + j*dim

  const Matrix& partial(Index i, Index j) const {
    return partials[static_cast<size_t>(i + j * dim)];
  }
  // Full d^2 x d^2 Jacobian of vec log(Y) w.r.t. vec Y.
  Matrix as_jacobian() const;
};

// The eigenvector-perturbation divisor. As printed the construction divides
// by differences of log eigenvalues; the classical formula divides by the
// eigenvalue differences themselves. Only the latter passes the
// finite-difference oracle, so it is the default.
enum class EigGradDivisor { kEigenvalueDiff, kLogEigenvalueDiff };

inline constexpr double kEigenGapTol = 1e-8;

// Throws DegenerateSpectrum when the relevant eigenvalue gaps fall under
// gap_tol; callers apply the jitter policy (jitter_spd) and retry.
LogEigTensor dlog_through_eig(
    const Matrix& y, double gap_tol = kEigenGapTol,
    EigGradDivisor divisor = EigGradDivisor::kEigenvalueDiff);

// delta * I with delta = 1e-9 * trace(Y) / d; the retry step for degenerate
// spectra during training.
Matrix jitter_spd(const Matrix& y);

}  // namespace mmlp
