#include "mmlp/optim.hpp"

#include <cmath>

#include "mmlp/errors.hpp"

namespace mmlp {

namespace {

void check_shapes(const std::vector<Matrix*>& params,
                  const std::vector<Matrix*>& grads) {
  if (params.size() != grads.size()) {
    throw DimensionMismatch("optimizer: tensor count mismatch");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i]->rows() ||
        params[i]->cols() != grads[i]->cols()) {
      throw DimensionMismatch("optimizer: tensor shape mismatch at index " +
                              std::to_string(i));
    }
  }
}

}  // namespace

void Sgd::step(const std::vector<Matrix*>& params,
               const std::vector<Matrix*>& grads) const {
  check_shapes(params, grads);
  for (size_t i = 0; i < params.size(); ++i) {
    *params[i] -= lr * (*grads[i]);
  }
}

void Adam::step(const std::vector<Matrix*>& params,
                const std::vector<Matrix*>& grads, AdamState& state) const {
  check_shapes(params, grads);
  if (state.t == 0) {
    state.m.clear();
    state.v.clear();
    for (const Matrix* p : params) {
      state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) {
    throw DimensionMismatch("Adam: state does not match parameter list");
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = *grads[i];
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g.cwiseProduct(g);
    Matrix m_hat = state.m[i] / bc1;
    Matrix v_hat = state.v[i] / bc2;
    params[i]->array() -=
        lr * m_hat.array() / (v_hat.array().sqrt() + eps);
  }
}

}  // namespace mmlp
