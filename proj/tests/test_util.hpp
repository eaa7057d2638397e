#pragma once

#include <random>

#include "mmlp/linalg.hpp"

namespace mmlp::testutil {

inline Matrix random_matrix(std::mt19937& rng, Index m, Index n,
                            double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = nd(rng);
  return a;
}

inline Matrix random_symmetric(std::mt19937& rng, Index d, double scale = 1.0) {
  return sym_part(random_matrix(rng, d, d, scale));
}

// SPD with eigenvalues bounded away from zero
inline Matrix random_spd(std::mt19937& rng, Index d, double lo = 0.1,
                         double hi = 2.0) {
  Matrix a = random_matrix(rng, d, d);
  Matrix q = sym_eig(sym_part(a * a.transpose())).vectors;
  std::uniform_real_distribution<double> ud(std::log(lo), std::log(hi));
  Vector lam(d);
  for (Index i = 0; i < d; ++i) lam(i) = std::exp(ud(rng));
  return sym_part(q * lam.asDiagonal() * q.transpose());
}

inline Matrix random_spd_trace_one(std::mt19937& rng, Index d) {
  Matrix a = random_spd(rng, d);
  return a / a.trace();
}

}  // namespace mmlp::testutil
