#pragma once

// The matrix multilayer perceptron: the basic form (SPD output only), the
// general form (vector + SPD outputs with cross-coupling), and the shallow
// baseline that applies the kernel head only at the output layer.
//
// Layer indexing runs from the output: layer 0 is the head, layer j+1 takes
// the network input. All backprop quantities are 1 x n row Jacobians of the
// scalar loss, composed left-to-right and reshaped only for the update step.

#include <random>
#include <vector>

#include "mmlp/activations.hpp"
#include "mmlp/losses.hpp"

namespace mmlp {

// ---------------------------------------------------------------------------
// Basic form

struct BasicMmlpParams {
  // dims[l] = d_l for l in 0..j+1
  std::vector<Index> dims;
  Index input_size = 0;  // p1 * p2
  std::vector<Matrix> w;  // w[l]: d_l x d_{l+1}, w[j+1]: d_{j+1} x input_size
  std::vector<Matrix> b;  // b[l]: d_l x d_l
  MercerParams kernel;

  Index depth() const { return static_cast<Index>(dims.size()) - 2; }  // j
  static BasicMmlpParams init(std::vector<Index> dims, Index input_size,
                              std::mt19937& rng);
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
};

struct BasicGrads {
  std::vector<Matrix> w;
  std::vector<Matrix> b;
  std::vector<Matrix*> tensors();
};

struct BasicForwardTrace {
  std::vector<Matrix> z;  // z[l]: d_l x d_l
  std::vector<Matrix> h;  // h[l]: trace-one SPD; h[0] is the output
  Vector input;           // vec X, kept for the input-layer Jacobian
  const Matrix& output() const { return h[0]; }
};

// head_kernel applies at layer 0 only; hidden layers always use the full form.
BasicForwardTrace forward_basic(const BasicMmlpParams& params, const Matrix& x,
                                KernelForm head_kernel = KernelForm::kFull);
BasicGrads backward_basic(const BasicMmlpParams& params,
                          const BasicForwardTrace& trace,
                          const Matrix& y_target, LossKind loss);
// Backprop from an externally supplied head gradient (1 x d_0^2).
BasicGrads backward_basic_from(const BasicMmlpParams& params,
                               const BasicForwardTrace& trace,
                               const RowVec& d_output);

// ---------------------------------------------------------------------------
// General form

struct GeneralMmlpParams {
  BasicMmlpParams mat;          // matrix path (shares layer dims d_l)
  std::vector<Index> vec_dims;  // r_l for l in 0..j+1
  std::vector<Matrix> a;        // a[l]: d_l x r_{l+1} (a[j+1]: d_{j+1} x r_{j+1})
  std::vector<Matrix> c;        // c[l]: r_l x d_l
  std::vector<Matrix> bv;       // bv[l]: r_l x 1
  HeadActivation vec_head;      // activation at z_0; tanh elsewhere
  KernelForm head_kernel = KernelForm::kFull;  // output layer only

  Index depth() const { return mat.depth(); }
  static GeneralMmlpParams init(std::vector<Index> mat_dims,
                                std::vector<Index> vec_dims, Index input_size,
                                std::mt19937& rng);
  std::vector<Matrix*> tensors();
};

struct GeneralGrads {
  BasicGrads mat;
  std::vector<Matrix> a;
  std::vector<Matrix> c;
  std::vector<Matrix> bv;          // r_l x 1
  RowVec input;                    // 1 x input_size, d loss / d vec X
  std::vector<Matrix*> tensors();  // excludes input
};

struct GeneralForwardTrace {
  BasicForwardTrace mat;   // Z_l, H_l with H_0 = Y_hat
  std::vector<Vector> zv;  // z_l
  std::vector<Vector> hv;  // h_l with h_0 = y_hat
  const Matrix& mat_output() const { return mat.h[0]; }
  const Vector& vec_output() const { return hv[0]; }
};

GeneralForwardTrace forward_general(const GeneralMmlpParams& params,
                                    const Matrix& x);
// d_vec_out: 1 x r_0 loss gradient at y_hat; d_mat_out: 1 x d_0^2 at Y_hat.
GeneralGrads backward_general(const GeneralMmlpParams& params,
                              const GeneralForwardTrace& trace,
                              const RowVec& d_vec_out, const RowVec& d_mat_out);

// ---------------------------------------------------------------------------
// Shallow baseline: standard tanh MLP with a kernel head at the output only.

struct ShallowMmlpParams {
  Index out_dim = 0;              // d_0
  std::vector<Index> hidden;      // r_1..r_{j+1}
  Index input_size = 0;
  std::vector<Matrix> w;          // w[0]: d_0 x r_1; w[l]: r_l x r_{l+1}; w[j+1]: r_{j+1} x p
  Matrix b0;                      // d_0 x d_0
  std::vector<Matrix> bv;         // b_1..b_{j+1}, r_l x 1
  MercerParams kernel;

  static ShallowMmlpParams init(Index out_dim, std::vector<Index> hidden,
                                Index input_size, std::mt19937& rng);
  std::vector<Matrix*> tensors();
};

struct ShallowGrads {
  std::vector<Matrix> w;
  Matrix b0;
  std::vector<Matrix> bv;
  std::vector<Matrix*> tensors();
};

struct ShallowForwardTrace {
  std::vector<Vector> zv;  // hidden preactivations, index 1..j+1
  std::vector<Vector> hv;
  Vector input;
  Matrix z0;
  Matrix y_hat;
};

ShallowForwardTrace forward_shallow(const ShallowMmlpParams& params,
                                    const Matrix& x);
ShallowGrads backward_shallow(const ShallowMmlpParams& params,
                              const ShallowForwardTrace& trace,
                              const Matrix& y_target, LossKind loss);

// ---------------------------------------------------------------------------
// Shared layer Jacobians (exposed for tests)

// D_W (W H W^T) for H symmetric
Matrix jac_sandwich_w(const Matrix& w, const Matrix& h);
// D_H (W H W^T) = W kron W
Matrix jac_sandwich_h(const Matrix& w);
// D_W [(W u)(W 1)^T] for fixed u
Matrix jac_rank_one_w(const Matrix& w, const Vector& u);
// D_u [(W u)(W 1)^T]
Matrix jac_rank_one_u(const Matrix& w);

// Random init helper: i.i.d. uniform on +-sqrt(6 / (fan_in + fan_out))
Matrix glorot_uniform(Index rows, Index cols, std::mt19937& rng);

}  // namespace mmlp
