#include "mmlp/network.hpp"

#include <cmath>

namespace mmlp {

Matrix glorot_uniform(Index rows, Index cols, std::mt19937& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> ud(-bound, bound);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = ud(rng);
  return m;
}

namespace {

// Small identity bias keeps the kernel alive at step zero (tanh(0) = 0 would
// collapse the Gram matrix).
constexpr double kBiasDelta = 0.01;

Matrix identity_bias(Index d) { return kBiasDelta * Matrix::Identity(d, d); }

// Row-form applications of the layer Jacobians: v * J computed through
// vec(A)^T (B kron C) = vec(C^T A B)^T instead of materializing J. The
// explicit jac_* builders below stay as the reference implementations.
RowVec row_sandwich_w(const RowVec& v, const Matrix& w, const Matrix& h) {
  Matrix s = unvec(v, w.rows(), w.rows());
  return vec(Matrix((s + s.transpose()) * w * h)).transpose();
}

RowVec row_sandwich_h(const RowVec& v, const Matrix& w) {
  Matrix s = unvec(v, w.rows(), w.rows());
  return vec(Matrix(w.transpose() * s * w)).transpose();
}

RowVec row_rank_one_w(const RowVec& v, const Matrix& w, const Vector& u) {
  Matrix s = unvec(v, w.rows(), w.rows());
  Vector w1 = w * Vector::Ones(w.cols());
  Matrix grad = (s * w1) * u.transpose() +
                (s.transpose() * (w * u)) * RowVec::Ones(w.cols());
  return vec(grad).transpose();
}

RowVec row_rank_one_u(const RowVec& v, const Matrix& w) {
  Matrix s = unvec(v, w.rows(), w.rows());
  return RowVec((s * (w * Vector::Ones(w.cols()))).transpose() * w);
}

}  // namespace

Matrix jac_sandwich_w(const Matrix& w, const Matrix& h) {
  const Index d = w.rows();
  const Index dn = w.cols();
  Matrix wh = w * h;
  return kron(wh, Matrix::Identity(d, d)) +
         kron(Matrix::Identity(d, d), wh) * commutation_matrix(d, dn);
}

Matrix jac_sandwich_h(const Matrix& w) { return kron(w, w); }

Matrix jac_rank_one_w(const Matrix& w, const Vector& u) {
  const Index d = w.rows();
  const Index p = w.cols();
  Vector w1 = w * Vector::Ones(p);
  Vector wu = w * u;
  Matrix id = Matrix::Identity(d, d);
  return kron(Matrix(w1), id) * kron(Matrix(u.transpose()), id) +
         kron(id, Matrix(wu)) * kron(Matrix(RowVec::Ones(p)), id);
}

Matrix jac_rank_one_u(const Matrix& w) {
  const Index d = w.rows();
  Vector w1 = w * Vector::Ones(w.cols());
  return kron(Matrix(w1), Matrix::Identity(d, d)) * w;
}

// ---------------------------------------------------------------------------
// Basic form

BasicMmlpParams BasicMmlpParams::init(std::vector<Index> dims,
                                      Index input_size, std::mt19937& rng) {
  BasicMmlpParams p;
  p.dims = std::move(dims);
  p.input_size = input_size;
  const Index top = static_cast<Index>(p.dims.size()) - 1;  // j+1
  for (Index l = 0; l <= top; ++l) {
    const Index cols = (l == top) ? input_size : p.dims[l + 1];
    p.w.push_back(glorot_uniform(p.dims[l], cols, rng));
    p.b.push_back(identity_bias(p.dims[l]));
  }
  return p;
}

std::vector<Matrix*> BasicMmlpParams::tensors() {
  std::vector<Matrix*> out;
  for (auto& m : w) out.push_back(&m);
  for (auto& m : b) out.push_back(&m);
  return out;
}

std::vector<const Matrix*> BasicMmlpParams::tensors() const {
  std::vector<const Matrix*> out;
  for (const auto& m : w) out.push_back(&m);
  for (const auto& m : b) out.push_back(&m);
  return out;
}

std::vector<Matrix*> BasicGrads::tensors() {
  std::vector<Matrix*> out;
  for (auto& m : w) out.push_back(&m);
  for (auto& m : b) out.push_back(&m);
  return out;
}

BasicForwardTrace forward_basic(const BasicMmlpParams& params, const Matrix& x,
                                KernelForm head_kernel) {
  const Index top = static_cast<Index>(params.dims.size()) - 1;
  if (x.size() != params.input_size) {
    throw DimensionMismatch("forward_basic: input size mismatch");
  }
  BasicForwardTrace t;
  t.z.resize(params.dims.size());
  t.h.resize(params.dims.size());

  Vector u = vec(x);
  t.input = u;
  Vector w1 = params.w[top] * Vector::Ones(params.input_size);
  Vector wu = params.w[top] * u;
  t.z[top] = wu * w1.transpose() + params.b[top];
  t.h[top] = kernel_activation(
      t.z[top], top == 0 ? head_kernel : KernelForm::kFull, params.kernel);
  for (Index l = top - 1; l >= 0; --l) {
    t.z[l] = params.w[l] * t.h[l + 1] * params.w[l].transpose() + params.b[l];
    t.h[l] = kernel_activation(
        t.z[l], l == 0 ? head_kernel : KernelForm::kFull, params.kernel);
  }
  return t;
}

BasicGrads backward_basic_from(const BasicMmlpParams& params,
                               const BasicForwardTrace& trace,
                               const RowVec& d_output) {
  const Index top = static_cast<Index>(params.dims.size()) - 1;
  BasicGrads g;
  g.w.resize(params.w.size());
  g.b.resize(params.b.size());

  RowVec d_h = d_output;  // D_{H_l} loss, starting at l = 0
  for (Index l = 0; l <= top; ++l) {
    const Index d = params.dims[l];
    RowVec d_z =
        kernel_activation_vjp(trace.z[l], d_h, KernelForm::kFull, params.kernel);

    if (l < top) {
      g.w[l] = unvec(row_sandwich_w(d_z, params.w[l], trace.h[l + 1]), d,
                     params.dims[l + 1]);
      d_h = row_sandwich_h(d_z, params.w[l]);
    } else {
      g.w[l] = unvec(row_rank_one_w(d_z, params.w[l], trace.input), d,
                     params.input_size);
    }
    g.b[l] = unvec(d_z, d, d);
  }
  return g;
}

BasicGrads backward_basic(const BasicMmlpParams& params,
                          const BasicForwardTrace& trace,
                          const Matrix& y_target, LossKind loss) {
  return backward_basic_from(params, trace,
                             loss_grad(loss, trace.output(), y_target));
}

// ---------------------------------------------------------------------------
// General form

GeneralMmlpParams GeneralMmlpParams::init(std::vector<Index> mat_dims,
                                          std::vector<Index> vec_dims,
                                          Index input_size,
                                          std::mt19937& rng) {
  if (mat_dims.size() != vec_dims.size()) {
    throw DimensionMismatch("GeneralMmlpParams: path depth mismatch");
  }
  GeneralMmlpParams p;
  p.mat = BasicMmlpParams::init(std::move(mat_dims), input_size, rng);
  p.vec_dims = std::move(vec_dims);
  const Index top = static_cast<Index>(p.vec_dims.size()) - 1;
  for (Index l = 0; l <= top; ++l) {
    const Index r_next = (l == top) ? p.vec_dims[top] : p.vec_dims[l + 1];
    p.a.push_back(glorot_uniform(p.mat.dims[l], r_next, rng));
    p.c.push_back(glorot_uniform(p.vec_dims[l], p.mat.dims[l], rng));
    p.bv.push_back(Matrix::Zero(p.vec_dims[l], 1));
  }
  p.vec_head.segments = {{p.vec_dims[0], ScalarActivation::tanh()}};
  return p;
}

std::vector<Matrix*> GeneralMmlpParams::tensors() {
  std::vector<Matrix*> out = mat.tensors();
  for (auto& m : a) out.push_back(&m);
  for (auto& m : c) out.push_back(&m);
  for (auto& m : bv) out.push_back(&m);
  return out;
}

std::vector<Matrix*> GeneralGrads::tensors() {
  std::vector<Matrix*> out = mat.tensors();
  for (auto& m : a) out.push_back(&m);
  for (auto& m : c) out.push_back(&m);
  for (auto& m : bv) out.push_back(&m);
  return out;
}

GeneralForwardTrace forward_general(const GeneralMmlpParams& params,
                                    const Matrix& x) {
  const Index top = static_cast<Index>(params.mat.dims.size()) - 1;
  GeneralForwardTrace t;
  t.mat = forward_basic(params.mat, x, params.head_kernel);
  t.zv.resize(params.vec_dims.size());
  t.hv.resize(params.vec_dims.size());

  Vector ones = Vector::Ones(params.vec_dims[top]);
  t.zv[top] = params.c[top] * t.mat.h[top] * params.a[top] * ones +
              params.bv[top].col(0);
  t.hv[top] = ScalarActivation::tanh().apply(t.zv[top]);
  for (Index l = top - 1; l >= 0; --l) {
    t.zv[l] = params.c[l] * t.mat.h[l] * params.a[l] * t.hv[l + 1] +
              params.bv[l].col(0);
    t.hv[l] = (l == 0) ? params.vec_head.apply(t.zv[l])
                       : ScalarActivation::tanh().apply(t.zv[l]);
  }
  return t;
}

GeneralGrads backward_general(const GeneralMmlpParams& params,
                              const GeneralForwardTrace& trace,
                              const RowVec& d_vec_out,
                              const RowVec& d_mat_out) {
  const Index top = static_cast<Index>(params.mat.dims.size()) - 1;
  const auto& dims = params.mat.dims;
  const auto& rdims = params.vec_dims;

  GeneralGrads g;
  g.mat.w.resize(params.mat.w.size());
  g.mat.b.resize(params.mat.b.size());
  g.a.resize(params.a.size());
  g.c.resize(params.c.size());
  g.bv.resize(params.bv.size());

  // h input to the z_l coupling: h_{l+1} for l < top, the ones vector at top
  auto coupling_h = [&](Index l) -> Vector {
    return l == top ? Vector::Ones(rdims[top]) : trace.hv[l + 1];
  };

  RowVec d_z;  // D_{z_l} loss
  RowVec d_zm; // D_{Z_l} loss
  RowVec d_hm; // D_{H_l} loss
  for (Index l = 0; l <= top; ++l) {
    // vector path at layer l
    RowVec d_h;  // D_{h_l} loss
    if (l == 0) {
      d_h = d_vec_out;
    } else {
      d_h = d_z * (params.c[l - 1] * trace.mat.h[l - 1] * params.a[l - 1]);
    }
    Matrix act_jac = (l == 0)
                         ? params.vec_head.jacobian(trace.zv[0])
                         : ScalarActivation::tanh().jacobian(trace.zv[l]);
    d_z = d_h * act_jac;

    // matrix path at layer l, merging the z_l coupling
    Vector ah = params.a[l] * coupling_h(l);
    RowVec d_z_Hl =
        vec(Matrix(params.c[l].transpose() * d_z.transpose() * ah.transpose()))
            .transpose();
    if (l == 0) {
      d_hm = d_z_Hl + d_mat_out;
    } else {
      d_hm = d_z_Hl + row_sandwich_h(d_zm, params.mat.w[l - 1]);
    }
    d_zm = kernel_activation_vjp(
        trace.mat.z[l], d_hm, l == 0 ? params.head_kernel : KernelForm::kFull,
        params.mat.kernel);

    // parameter gradients at layer l
    Vector h_in = coupling_h(l);
    Matrix ch = params.c[l] * trace.mat.h[l];
    g.a[l] = Matrix(ch.transpose() * d_z.transpose() * h_in.transpose());
    Vector hah = trace.mat.h[l] * params.a[l] * h_in;
    g.c[l] = Matrix(d_z.transpose() * hah.transpose());
    g.bv[l] = unvec(d_z, rdims[l], 1);

    if (l < top) {
      g.mat.w[l] = unvec(row_sandwich_w(d_zm, params.mat.w[l],
                                        trace.mat.h[l + 1]),
                         dims[l], dims[l + 1]);
    } else {
      g.mat.w[l] = unvec(row_rank_one_w(d_zm, params.mat.w[l],
                                        trace.mat.input),
                         dims[l], params.mat.input_size);
    }
    g.mat.b[l] = unvec(d_zm, dims[l], dims[l]);
  }

  g.input = row_rank_one_u(d_zm, params.mat.w[top]);
  return g;
}

// ---------------------------------------------------------------------------
// Shallow baseline

ShallowMmlpParams ShallowMmlpParams::init(Index out_dim,
                                          std::vector<Index> hidden,
                                          Index input_size,
                                          std::mt19937& rng) {
  ShallowMmlpParams p;
  p.out_dim = out_dim;
  p.hidden = std::move(hidden);
  p.input_size = input_size;
  const size_t nh = p.hidden.size();
  p.w.resize(nh + 1);
  p.bv.resize(nh);
  p.w[0] = glorot_uniform(out_dim, p.hidden[0], rng);
  p.b0 = kBiasDelta * Matrix::Identity(out_dim, out_dim);
  for (size_t l = 1; l <= nh; ++l) {
    const Index cols = (l == nh) ? input_size : p.hidden[l];
    p.w[l] = glorot_uniform(p.hidden[l - 1], cols, rng);
    p.bv[l - 1] = Matrix::Zero(p.hidden[l - 1], 1);
  }
  return p;
}

std::vector<Matrix*> ShallowMmlpParams::tensors() {
  std::vector<Matrix*> out;
  for (auto& m : w) out.push_back(&m);
  out.push_back(&b0);
  for (auto& m : bv) out.push_back(&m);
  return out;
}

std::vector<Matrix*> ShallowGrads::tensors() {
  std::vector<Matrix*> out;
  for (auto& m : w) out.push_back(&m);
  out.push_back(&b0);
  for (auto& m : bv) out.push_back(&m);
  return out;
}

ShallowForwardTrace forward_shallow(const ShallowMmlpParams& params,
                                    const Matrix& x) {
  const size_t nh = params.hidden.size();
  ShallowForwardTrace t;
  t.zv.resize(nh);
  t.hv.resize(nh);

  Vector u = vec(x);
  t.input = u;
  t.zv[nh - 1] = params.w[nh] * u + params.bv[nh - 1].col(0);
  t.hv[nh - 1] = t.zv[nh - 1].array().tanh();
  for (size_t l = nh - 1; l >= 1; --l) {
    t.zv[l - 1] = params.w[l] * t.hv[l] + params.bv[l - 1].col(0);
    t.hv[l - 1] = t.zv[l - 1].array().tanh();
  }

  const Matrix& w0 = params.w[0];
  Vector w1 = w0 * Vector::Ones(w0.cols());
  t.z0 = (w0 * t.hv[0]) * w1.transpose() + params.b0;
  t.y_hat = kernel_activation(t.z0, KernelForm::kFull, params.kernel);
  return t;
}

ShallowGrads backward_shallow(const ShallowMmlpParams& params,
                              const ShallowForwardTrace& trace,
                              const Matrix& y_target, LossKind loss) {
  const size_t nh = params.hidden.size();
  ShallowGrads g;
  g.w.resize(params.w.size());
  g.bv.resize(params.bv.size());

  RowVec d_y = loss_grad(loss, trace.y_hat, y_target);
  RowVec d_z0 =
      kernel_activation_vjp(trace.z0, d_y, KernelForm::kFull, params.kernel);
  g.w[0] = unvec(row_rank_one_w(d_z0, params.w[0], trace.hv[0]),
                 params.out_dim, params.hidden[0]);
  g.b0 = unvec(d_z0, params.out_dim, params.out_dim);

  RowVec d_h = row_rank_one_u(d_z0, params.w[0]);  // D_{h_1} loss
  for (size_t l = 1; l <= nh; ++l) {
    RowVec d_z = d_h.cwiseProduct(
        RowVec((1.0 - trace.hv[l - 1].array().square()).matrix().transpose()));
    const Vector& in = (l == nh) ? trace.input : trace.hv[l];
    g.w[l] = Matrix(d_z.transpose() * in.transpose());
    g.bv[l - 1] = Matrix(d_z.transpose());
    if (l < nh) d_h = d_z * params.w[l];
  }
  return g;
}

}  // namespace mmlp
