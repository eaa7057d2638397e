#pragma once

// Independent oracles for the analytic derivatives: central finite
// differences over black-box matrix functions and Monte-Carlo moment
// estimation. Nothing here shares code with the analytic paths it checks.

#include <functional>

#include "mmlp/alpha.hpp"

namespace mmlp {

using MatrixFn = std::function<Matrix(const Matrix&)>;
using ScalarFn = std::function<double(const Matrix&)>;

// Central differences, column c = (vec f(X + h_c E_c) - vec f(X - h_c E_c)) / 2h_c
// with h_c = h * (1 + |x_c|) elementwise.
AlphaJacobian fd_jacobian(const MatrixFn& f, const Matrix& x, double h = 1e-6);

// Same but the perturbation in direction (i, j) is symmetrized, for
// functions defined only on symmetric inputs. Column (i + j*d) holds the
// derivative along sym(E_ij).
AlphaJacobian fd_jacobian_sym(const MatrixFn& f, const Matrix& x,
                              double h = 1e-6);

RowVec fd_gradient(const ScalarFn& f, const Matrix& x, double h = 1e-6);
RowVec fd_gradient_sym(const ScalarFn& f, const Matrix& x, double h = 1e-6);

// max_ij |a - b| / (atol + max |a|, |b|): a symmetric relative error
double rel_error(const Matrix& a, const Matrix& b, double atol = 1e-8);

struct McMoments {
  Vector mean;
  Matrix cov;
  Vector mean_se;  // standard error per dimension
  long n = 0;
};

McMoments mc_moments(const std::function<Vector()>& sampler, long n);

}  // namespace mmlp
