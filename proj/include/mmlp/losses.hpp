#pragma once

// Loss functions on trace-one SPD matrices and their derivatives as 1 x d^2
// row Jacobians: symmetrized von Neumann (QRE), symmetrized Stein (LogDet),
// and the quadratic loss.

#include "mmlp/alpha.hpp"

namespace mmlp {

enum class LossKind { kQre, kStein, kQuad };

// tr(Xt log Xt - Xt log X) for trace-one SPD arguments. Asymmetric.
double qre_divergence(const Matrix& x_tilde, const Matrix& x);

// 0.5 * (Delta(Yh||Y) + Delta(Y||Yh)); symmetric, zero iff equal.
double qre_loss(const Matrix& y_hat, const Matrix& y);

// Row Jacobian (1 x d^2) of qre_loss in y_hat, via the derivative of the
// matrix log through the eigendecomposition.
RowVec qre_loss_grad(const Matrix& y_hat, const Matrix& y);

// Symmetrized Stein divergence with midpoint (Y + Yh)/2, and its gradient.
double stein_loss(const Matrix& y_hat, const Matrix& y);
RowVec stein_loss_grad(const Matrix& y_hat, const Matrix& y);

// tr((Yh - Y)(Yh - Y)^T); gradient 2 vec(Yh - Y)^T.
double quad_loss(const Matrix& y_hat, const Matrix& y);
RowVec quad_loss_grad(const Matrix& y_hat, const Matrix& y);

double loss_value(LossKind kind, const Matrix& y_hat, const Matrix& y);
RowVec loss_grad(LossKind kind, const Matrix& y_hat, const Matrix& y);

}  // namespace mmlp
