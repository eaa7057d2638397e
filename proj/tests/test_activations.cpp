#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mmlp/activations.hpp"
#include "mmlp/gradcheck.hpp"
#include "test_util.hpp"

#include <random>

using namespace mmlp;
using namespace mmlp::testutil;

TEST_CASE("mercer kernel is symmetric PSD with unit trace after normalization") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 2 + trial % 5;
    Matrix z = random_matrix(rng, d, d);
    Matrix h = kernel_activation(z, KernelForm::kFull);
    CHECK(rel_error(h, Matrix(h.transpose())) < 1e-14);
    CHECK(h.trace() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(min_eigenvalue(h) > -1e-12);
  }
}

TEST_CASE("diagonal kernel form matches the full kernel diagonal") {
  std::mt19937 rng(12);
  Matrix z = random_matrix(rng, 4, 4);
  Matrix kf = mercer_kernel(z);
  Matrix kd = diag_mercer_kernel(z);
  for (Index i = 0; i < 4; ++i) {
    CHECK(kd(i, i) == doctest::Approx(kf(i, i)).epsilon(1e-13));
    for (Index j = 0; j < 4; ++j) {
      if (i != j) CHECK(kd(i, j) == 0.0);
    }
  }
  Matrix h = kernel_activation(z, KernelForm::kDiagonal);
  CHECK(h.trace() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(min_eigenvalue(h) > 0.0);
}

TEST_CASE("collapsed kernel raises TraceUnderflow") {
  Matrix z = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(kernel_activation(z, KernelForm::kFull), TraceUnderflow);
  CHECK_THROWS_AS(kernel_activation(z, KernelForm::kDiagonal), TraceUnderflow);
  CHECK_THROWS_AS(mercer_activation_jacobian(z), TraceUnderflow);
}

TEST_CASE("full kernel Jacobian matches central differences") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 2 + trial % 4;
    MercerParams p;
    if (trial % 3 == 1) p = {0.7, 0.2};
    if (trial % 3 == 2) p = {1.3, -0.4};
    Matrix z = random_matrix(rng, d, d);
    AlphaJacobian jac = mercer_activation_jacobian(z, p);
    AlphaJacobian fd = fd_jacobian(
        [&](const Matrix& m) { return kernel_activation(m, KernelForm::kFull, p); },
        z);
    CHECK(rel_error(jac.entries, fd.entries) < 1e-6);
  }
}

TEST_CASE("diagonal kernel Jacobian matches central differences") {
  std::mt19937 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 2 + trial % 4;
    Matrix z = random_matrix(rng, d, d);
    AlphaJacobian jac = diag_mercer_activation_jacobian(z);
    AlphaJacobian fd = fd_jacobian(
        [&](const Matrix& m) {
          return kernel_activation(m, KernelForm::kDiagonal);
        },
        z);
    CHECK(rel_error(jac.entries, fd.entries) < 1e-6);
  }
}

TEST_CASE("scalar activations and their diagonal Jacobians") {
  std::mt19937 rng(15);
  Vector v = random_matrix(rng, 6, 1);

  auto check_fd = [&](const ScalarActivation& act) {
    Matrix jac = act.jacobian(v);
    AlphaJacobian fd = fd_jacobian(
        [&](const Matrix& m) { return Matrix(act.apply(Vector(m.col(0)))); },
        Matrix(v));
    CHECK(rel_error(jac, fd.entries) < 1e-7);
  };

  check_fd(ScalarActivation::tanh());
  check_fd(ScalarActivation::linear());
  check_fd(ScalarActivation::sigmoid_bounded());

  Vector s = ScalarActivation::sigmoid_bounded(0.5).apply(v);
  for (Index i = 0; i < s.size(); ++i) {
    CHECK(s(i) > 0.5);
    CHECK(s(i) < 1.5);
  }
  CHECK(rel_error(Matrix(ScalarActivation::linear().apply(v)), Matrix(v)) == 0.0);
}

TEST_CASE("head activation applies per-segment and builds a block Jacobian") {
  std::mt19937 rng(16);
  HeadActivation head;
  head.segments = {{3, ScalarActivation::linear()},
                   {2, ScalarActivation::tanh()},
                   {2, ScalarActivation::sigmoid_bounded()}};
  CHECK(head.size() == 7);

  Vector v = random_matrix(rng, 7, 1);
  Vector out = head.apply(v);
  CHECK(rel_error(Matrix(out.head(3)), Matrix(v.head(3))) == 0.0);
  CHECK(rel_error(Matrix(out.segment(3, 2)),
                  Matrix(v.segment(3, 2).array().tanh().matrix())) < 1e-15);

  Matrix jac = head.jacobian(v);
  AlphaJacobian fd = fd_jacobian(
      [&](const Matrix& m) { return Matrix(head.apply(Vector(m.col(0)))); },
      Matrix(v));
  CHECK(rel_error(jac, fd.entries) < 1e-7);

  CHECK_THROWS_AS(head.apply(Vector(Vector::Zero(5))), DimensionMismatch);
}
