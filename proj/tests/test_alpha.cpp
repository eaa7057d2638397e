#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mmlp/alpha.hpp"
#include "mmlp/gradcheck.hpp"
#include "test_util.hpp"

using namespace mmlp;
using testutil::random_matrix;
using testutil::random_spd;
using testutil::random_symmetric;

TEST_CASE("alpha_product constant factors") {
  std::mt19937 rng(1);
  Matrix x = random_matrix(rng, 2, 2);
  Matrix c = random_matrix(rng, 2, 2);
  AlphaJacobian dx = AlphaJacobian::identity({2, 2});
  AlphaJacobian dc({2, 2}, {2, 2});  // zero: C constant in X

  // D(XC) = (C^T kron I)
  AlphaJacobian dxc = alpha_product(dx, dc, x, c);
  CHECK((dxc.entries - kron(c.transpose(), Matrix::Identity(2, 2)))
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  // D(CX) = (I kron C)
  AlphaJacobian dcx = alpha_product(dc, dx, c, x);
  CHECK((dcx.entries - kron(Matrix::Identity(2, 2), c)).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("alpha_product X*X matches finite differences") {
  std::mt19937 rng(2);
  for (int t = 0; t < 5; ++t) {
    Matrix x = random_matrix(rng, 2, 2);
    AlphaJacobian dx = AlphaJacobian::identity({2, 2});
    AlphaJacobian an = alpha_product(dx, dx, x, x);
    AlphaJacobian fd =
        fd_jacobian([](const Matrix& m) { return Matrix(m * m); }, x);
    CHECK(rel_error(an.entries, fd.entries) < 1e-6);
  }
}

TEST_CASE("alpha_chain identity composition") {
  std::mt19937 rng(3);
  AlphaJacobian inner({3, 3}, {2, 2}, random_matrix(rng, 9, 4));
  AlphaJacobian id = AlphaJacobian::identity({3, 3});
  CHECK((alpha_chain(id, inner).entries - inner.entries).cwiseAbs().maxCoeff() ==
        0.0);
  AlphaJacobian outer({1, 2}, {3, 3}, random_matrix(rng, 2, 9));
  AlphaJacobian id2 = AlphaJacobian::identity({3, 3});
  CHECK(
      (alpha_chain(outer, id2).entries - outer.entries).cwiseAbs().maxCoeff() ==
      0.0);
  CHECK_THROWS_AS(alpha_chain(inner, inner), DimensionMismatch);
}

TEST_CASE("alpha_chain tanh(Wx) composite vs finite differences") {
  std::mt19937 rng(4);
  Matrix w = random_matrix(rng, 3, 4);
  Matrix x = random_matrix(rng, 4, 1);

  Matrix y = w * x;
  // inner: D_x (W x) = W
  AlphaJacobian inner({3, 1}, {4, 1}, w);
  // outer: D_y tanh(y) = diag(1 - tanh^2)
  Matrix dtanh = (1.0 - y.array().tanh().square()).matrix().asDiagonal();
  AlphaJacobian outer({3, 1}, {3, 1}, dtanh);

  AlphaJacobian an = alpha_chain(outer, inner);
  AlphaJacobian fd = fd_jacobian(
      [&w](const Matrix& m) { return Matrix((w * m).array().tanh().matrix()); },
      x);
  CHECK(rel_error(an.entries, fd.entries) < 1e-6);
}

TEST_CASE("alpha jacobians of products/chains vs finite differences, d<=6") {
  std::mt19937 rng(5);
  for (Index d = 2; d <= 6; ++d) {
    Matrix x = random_matrix(rng, d, d);
    Matrix c = random_matrix(rng, d, d);
    AlphaJacobian dx = AlphaJacobian::identity({d, d});
    AlphaJacobian dc({d, d}, {d, d});
    // f(X) = X C X
    AlphaJacobian dxc = alpha_product(dx, dc, x, c);
    AlphaJacobian an = alpha_product(dxc, dx, Matrix(x * c), x);
    AlphaJacobian fd = fd_jacobian(
        [&c](const Matrix& m) { return Matrix(m * c * m); }, x);
    CHECK(rel_error(an.entries, fd.entries) < 1e-5);
  }
}

TEST_CASE("dlog_through_eig diagonal case") {
  Matrix y = Vector{{2.0, 0.5}}.asDiagonal();
  LogEigTensor t = dlog_through_eig(y);
  // d(log lambda_1)/dY_11 = 1/lambda_1; slice(0,0) = diag(1/2, 0)
  CHECK(t.partial(0, 0)(0, 0) == doctest::Approx(0.5));
  CHECK(std::abs(t.partial(0, 0)(1, 1)) < 1e-12);

  AlphaJacobian fd = fd_jacobian_sym(
      [](const Matrix& m) { return mat_log_spd(m); }, y);
  CHECK(rel_error(t.as_jacobian(), fd.entries) < 1e-6);
}

TEST_CASE("dlog_through_eig matches finite differences on random SPD") {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Index d = 2 + trial % 5;
    Matrix y = random_spd(rng, d);
    LogEigTensor t = dlog_through_eig(y);
    AlphaJacobian fd = fd_jacobian_sym(
        [](const Matrix& m) { return mat_log_spd(m); }, y);
    CHECK(rel_error(t.as_jacobian(), fd.entries) < 1e-5);
  }
}

TEST_CASE("dlog_through_eig printed log-divisor variant fails the oracle") {
  // The divisor as printed uses differences of log eigenvalues; the oracle
  // rejects it, which is why kEigenvalueDiff is the default.
  std::mt19937 rng(7);
  Matrix y = random_spd(rng, 4);
  LogEigTensor t =
      dlog_through_eig(y, kEigenGapTol, EigGradDivisor::kLogEigenvalueDiff);
  AlphaJacobian fd =
      fd_jacobian_sym([](const Matrix& m) { return mat_log_spd(m); }, y);
  CHECK(rel_error(t.as_jacobian(), fd.entries) > 1e-3);
}

TEST_CASE("dlog_through_eig contraction against a symmetric direction") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 8; ++trial) {
    Index d = 3 + trial % 3;
    Matrix y = random_spd(rng, d);
    Matrix e = random_symmetric(rng, d, 0.5);
    LogEigTensor t = dlog_through_eig(y);

    Matrix contracted = Matrix::Zero(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) contracted += e(i, j) * t.partial(i, j);

    const double h = 1e-6;
    Matrix fd = (mat_log_spd(y + h * e) - mat_log_spd(y - h * e)) / (2.0 * h);
    CHECK(rel_error(contracted, fd) < 1e-5);
  }
}

TEST_CASE("eigenvalue derivative identity and slice symmetry") {
  std::mt19937 rng(9);
  Matrix y = random_spd(rng, 4);
  auto eig = sym_eig(y);
  LogEigTensor t = dlog_through_eig(y);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j) {
      CHECK((t.partial(i, j) - t.partial(j, i)).cwiseAbs().maxCoeff() < 1e-13);
      // d(lambda_k)/dY_ij == U_ik U_jk along sym(E_ij); checked through the
      // trace of the slice: tr(d log Y) = sum_k d(lambda_k)/lambda_k.
      double trace_expected = 0.0;
      for (Index k = 0; k < 4; ++k) {
        trace_expected +=
            eig.vectors(i, k) * eig.vectors(j, k) / eig.values(k);
      }
      CHECK(t.partial(i, j).trace() == doctest::Approx(trace_expected));
    }
  }
}

TEST_CASE("dlog_through_eig degenerate spectrum raises, jitter unblocks") {
  Matrix y = Matrix::Identity(3, 3) / 3.0;
  CHECK_THROWS_AS(dlog_through_eig(y), DegenerateSpectrum);
  Matrix z = Vector{{0.5, 0.25 + 2e-9, 0.25}}.asDiagonal();
  CHECK_THROWS_AS(dlog_through_eig(z), DegenerateSpectrum);
  CHECK_NOTHROW(dlog_through_eig(z, 1e-10));
  // jitter keeps the trace direction and stays tiny
  Matrix jz = jitter_spd(z);
  CHECK((jz - z).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(jz.trace() > z.trace());
}
