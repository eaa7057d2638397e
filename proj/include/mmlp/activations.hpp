#pragma once

// PD activation-matrix functions: the Mercer sigmoid kernel, trace-one
// normalization, their Jacobians, and the scalar activations used on the
// vector path and distribution heads.

#include "mmlp/alpha.hpp"

namespace mmlp {

// Kernel slope/intercept; distinct from the mPE's scale/shape parameters.
struct MercerParams {
  double slope = 1.0;
  double intercept = 0.0;
};

inline constexpr double kTraceFloor = 1e-12;

// K_ij = tanh(slope*z_i + intercept) . tanh(slope*z_j + intercept), the Gram
// matrix of tanh-mapped columns of Z. Symmetric PSD.
Matrix mercer_kernel(const Matrix& z, const MercerParams& p = {});

// Diagonal-only variant: off-diagonal entries exactly zero.
Matrix diag_mercer_kernel(const Matrix& z, const MercerParams& p = {});

// H = K / tr(K); throws TraceUnderflow for a collapsed kernel.
Matrix trace_one_normalize(const Matrix& k, double trace_floor = kTraceFloor);

// d^2 x d^2 Jacobian of vec H(Z) w.r.t. vec Z, through the trace-one quotient.
AlphaJacobian mercer_activation_jacobian(const Matrix& z,
                                         const MercerParams& p = {});
AlphaJacobian diag_mercer_activation_jacobian(const Matrix& z,
                                              const MercerParams& p = {});

// v * Jacobian without materializing the d^2 x d^2 matrix.
RowVec mercer_activation_vjp(const Matrix& z, const RowVec& v,
                             const MercerParams& p = {});
RowVec diag_mercer_activation_vjp(const Matrix& z, const RowVec& v,
                                  const MercerParams& p = {});

// Whether the matrix head uses the full Gram kernel or its diagonal cut.
enum class KernelForm { kFull, kDiagonal };

inline Matrix kernel_activation(const Matrix& z, KernelForm form,
                                const MercerParams& p = {}) {
  return trace_one_normalize(form == KernelForm::kFull
                                 ? mercer_kernel(z, p)
                                 : diag_mercer_kernel(z, p));
}
inline AlphaJacobian kernel_activation_jacobian(const Matrix& z,
                                                KernelForm form,
                                                const MercerParams& p = {}) {
  return form == KernelForm::kFull ? mercer_activation_jacobian(z, p)
                                   : diag_mercer_activation_jacobian(z, p);
}
inline RowVec kernel_activation_vjp(const Matrix& z, const RowVec& v,
                                    KernelForm form,
                                    const MercerParams& p = {}) {
  return form == KernelForm::kFull ? mercer_activation_vjp(z, v, p)
                                   : diag_mercer_activation_vjp(z, v, p);
}

// Elementwise scalar activations for the vector path. SigmoidBounded maps to
// (offset, offset + 1).
struct ScalarActivation {
  enum class Kind { kTanh, kLinear, kSigmoidBounded };
  Kind kind = Kind::kTanh;
  double offset = 0.5;

  static ScalarActivation tanh() { return {Kind::kTanh, 0.0}; }
  static ScalarActivation linear() { return {Kind::kLinear, 0.0}; }
  static ScalarActivation sigmoid_bounded(double lo = 0.5) {
    return {Kind::kSigmoidBounded, lo};
  }

  Vector apply(const Vector& v) const;
  // Diagonal Jacobian d apply(v) / d v^T.
  Matrix jacobian(const Vector& v) const;
};

// Per-component activation for mixed distribution heads (e.g. linear mean and
// log-scale next to sigmoid-bounded shape parameters).
struct HeadActivation {
  std::vector<std::pair<Index, ScalarActivation>> segments;  // (length, act)

  Vector apply(const Vector& v) const;
  Matrix jacobian(const Vector& v) const;  // block diagonal
  Index size() const;
};

}  // namespace mmlp
