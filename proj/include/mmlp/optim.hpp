#pragma once

// First-order optimizers operating on flat lists of parameter tensors, as
// produced by the params/grads tensors() accessors. The two lists must have
// matching length and per-tensor shapes.

#include <vector>

#include "mmlp/linalg.hpp"

namespace mmlp {

struct Sgd {
  double lr = 1e-2;
  void step(const std::vector<Matrix*>& params,
            const std::vector<Matrix*>& grads) const;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long t = 0;
};

struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void step(const std::vector<Matrix*>& params,
            const std::vector<Matrix*>& grads, AdamState& state) const;
};

}  // namespace mmlp
