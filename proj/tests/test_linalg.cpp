#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mmlp/linalg.hpp"
#include "test_util.hpp"

using namespace mmlp;
using testutil::random_matrix;
using testutil::random_spd;
using testutil::random_symmetric;

TEST_CASE("sym_eig identity and diagonal") {
  auto eig = sym_eig(Matrix::Identity(2, 2));
  CHECK(eig.values(0) == doctest::Approx(1.0));
  CHECK(eig.values(1) == doctest::Approx(1.0));
  CHECK((eig.vectors - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  Matrix d31 = Vector{{3.0, 1.0}}.asDiagonal();
  auto e2 = sym_eig(d31);
  CHECK(e2.values(0) == doctest::Approx(3.0));
  CHECK(e2.values(1) == doctest::Approx(1.0));
  CHECK((e2.vectors - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sym_eig reconstruction, orthonormality, ordering") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Index d = 2 + trial % 31;
    Matrix a = random_symmetric(rng, d);
    auto eig = sym_eig(a);
    CHECK((eig.reconstruct() - a).cwiseAbs().maxCoeff() < 1e-9);
    Matrix vtv = eig.vectors.transpose() * eig.vectors;
    CHECK((vtv - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-9);
    for (Index k = 0; k + 1 < d; ++k) CHECK(eig.values(k) >= eig.values(k + 1));
  }
}

TEST_CASE("sym_eig eigenvector sign convention is deterministic") {
  std::mt19937 rng(3);
  Matrix a = random_symmetric(rng, 5);
  auto e1 = sym_eig(a);
  auto e2 = sym_eig(a);
  CHECK((e1.vectors - e2.vectors).cwiseAbs().maxCoeff() == 0.0);
  for (Index k = 0; k < 5; ++k) {
    Index i = 0;
    while (e1.vectors(i, k) == 0.0) ++i;
    CHECK(e1.vectors(i, k) > 0.0);
  }
}

TEST_CASE("sym_eig rejects non-finite input") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sym_eig(a), NonFinite);
}

TEST_CASE("mat_log_spd basics") {
  CHECK(mat_log_spd(Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  Matrix a = Vector{{std::exp(1.0), std::exp(2.0)}}.asDiagonal();
  Matrix l = mat_log_spd(a);
  CHECK(l(0, 0) == doctest::Approx(1.0));
  CHECK(l(1, 1) == doctest::Approx(2.0));
  CHECK(std::abs(l(0, 1)) < 1e-12);

  Matrix psd = Matrix::Zero(2, 2);
  psd(0, 0) = 1.0;  // one zero eigenvalue
  CHECK_THROWS_AS(mat_log_spd(psd), NotPositiveDefinite);
}

TEST_CASE("exp/log round trips") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    Index d = 2 + trial % 7;
    Matrix a = random_spd(rng, d);
    CHECK((mat_exp_sym(mat_log_spd(a)) - a).cwiseAbs().maxCoeff() < 1e-8);
    Matrix s = random_symmetric(rng, d);
    CHECK((mat_log_spd(mat_exp_sym(s)) - s).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK((mat_exp_sym(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("vec and unvec") {
  Matrix a(2, 2);
  a << 1, 3, 2, 4;
  Vector v = vec(a);
  CHECK(v(0) == 1);
  CHECK(v(1) == 2);
  CHECK(v(2) == 3);
  CHECK(v(3) == 4);
  CHECK((unvec(v, 2, 2) - a).cwiseAbs().maxCoeff() == 0.0);

  Matrix one(1, 1);
  one << 42.0;
  CHECK(vec(one)(0) == 42.0);

  std::mt19937 rng(5);
  Matrix b = random_matrix(rng, 3, 4);
  CHECK((unvec(vec(b), 3, 4) - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(unvec(Vector(Vector::Zero(5)), 2, 3), DimensionMismatch);
}

TEST_CASE("commutation matrix") {
  CHECK(commutation_matrix(1, 1)(0, 0) == 1.0);

  Matrix a(2, 2);
  a << 1, 3, 2, 4;
  Vector kv = commutation_matrix(2, 2) * vec(a);
  CHECK((kv - vec(Matrix(a.transpose()))).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937 rng(2);
  for (Index m = 1; m <= 5; ++m) {
    for (Index n = 1; n <= 5; ++n) {
      Matrix k = commutation_matrix(m, n);
      Matrix b = random_matrix(rng, m, n);
      CHECK((k * vec(b) - vec(Matrix(b.transpose()))).cwiseAbs().maxCoeff() ==
            0.0);
      // permutation: one 1 per row/col
      CHECK((k.rowwise().sum().array() - 1.0).abs().maxCoeff() == 0.0);
      if (m <= 4 && n <= 4) {
        CHECK((k.transpose() - commutation_matrix(n, m)).cwiseAbs().maxCoeff() ==
              0.0);
      }
    }
  }
}

TEST_CASE("kron") {
  std::mt19937 rng(9);
  Matrix b = random_matrix(rng, 2, 3);
  Matrix kb = kron(Matrix::Identity(2, 2), b);
  CHECK((kb.block(0, 0, 2, 3) - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((kb.block(2, 3, 2, 3) - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(kb.block(0, 3, 2, 3).cwiseAbs().maxCoeff() == 0.0);

  Matrix two(1, 1);
  two << 2.0;
  CHECK((kron(two, b) - 2.0 * b).cwiseAbs().maxCoeff() == 0.0);

  // vec(A X B) == kron(B^T, A) vec(X)
  Matrix a = random_matrix(rng, 3, 3), x = random_matrix(rng, 3, 3),
         c = random_matrix(rng, 3, 3);
  CHECK((vec(Matrix(a * x * c)) - kron(c.transpose(), a) * vec(x))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  // mixed-product property
  Matrix p = random_matrix(rng, 3, 3), q = random_matrix(rng, 3, 3);
  Matrix lhs = kron(a, x) * kron(p, q);
  Matrix rhs = kron(Matrix(a * p), Matrix(x * q));
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}
