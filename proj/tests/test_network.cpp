#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mmlp/gradcheck.hpp"
#include "mmlp/network.hpp"
#include "test_util.hpp"

#include <functional>
#include <random>

using namespace mmlp;
using namespace mmlp::testutil;

namespace {

// Central differences of a scalar functional with respect to one parameter
// tensor, perturbing entries in place.
Matrix fd_tensor_grad(Matrix* t, const std::function<double()>& eval,
                      double h = 1e-5) {
  Matrix g(t->rows(), t->cols());
  for (Index j = 0; j < t->cols(); ++j) {
    for (Index i = 0; i < t->rows(); ++i) {
      const double saved = (*t)(i, j);
      const double hh = h * (1.0 + std::abs(saved));
      (*t)(i, j) = saved + hh;
      const double up = eval();
      (*t)(i, j) = saved - hh;
      const double dn = eval();
      (*t)(i, j) = saved;
      g(i, j) = (up - dn) / (2.0 * hh);
    }
  }
  return g;
}

}  // namespace

TEST_CASE("layer Jacobian helpers match central differences") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 2 + trial % 3;
    const Index dn = 2 + (trial + 1) % 3;
    Matrix w = random_matrix(rng, d, dn);
    Matrix h = random_spd(rng, dn);

    AlphaJacobian fd_w = fd_jacobian(
        [&](const Matrix& m) { return Matrix(m * h * m.transpose()); }, w);
    CHECK(rel_error(jac_sandwich_w(w, h), fd_w.entries) < 1e-7);

    // the sandwich Jacobian in H is exact for any (not only symmetric) H
    AlphaJacobian fd_h = fd_jacobian(
        [&](const Matrix& m) { return Matrix(w * m * w.transpose()); }, h);
    CHECK(rel_error(jac_sandwich_h(w), fd_h.entries) < 1e-7);

    const Index p = 4;
    Matrix wp = random_matrix(rng, d, p);
    Vector u = random_matrix(rng, p, 1);
    AlphaJacobian fd_rw = fd_jacobian(
        [&](const Matrix& m) {
          return Matrix((m * u) * (m * Vector::Ones(p)).transpose());
        },
        wp);
    CHECK(rel_error(jac_rank_one_w(wp, u), fd_rw.entries) < 1e-7);

    AlphaJacobian fd_ru = fd_jacobian(
        [&](const Matrix& m) {
          return Matrix((wp * m.col(0)) *
                        (wp * Vector::Ones(p)).transpose());
        },
        Matrix(u));
    CHECK(rel_error(jac_rank_one_u(wp), fd_ru.entries) < 1e-7);
  }
}

TEST_CASE("basic form forward emits trace-one SPD at every layer") {
  std::mt19937 rng(32);
  for (int trial = 0; trial < 25; ++trial) {
    BasicMmlpParams params = BasicMmlpParams::init({3, 4, 3}, 6, rng);
    Matrix x = random_matrix(rng, 2, 3);
    BasicForwardTrace t = forward_basic(params, x);
    for (const Matrix& h : t.h) {
      CHECK(h.trace() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(min_eigenvalue(h) > -1e-12);
      CHECK(rel_error(h, Matrix(h.transpose())) < 1e-14);
    }
  }
  BasicMmlpParams params = BasicMmlpParams::init({3, 4, 3}, 6, rng);
  CHECK_THROWS_AS(forward_basic(params, Matrix::Zero(3, 3)),
                  DimensionMismatch);
}

TEST_CASE("basic form backprop matches finite differences for every loss") {
  std::mt19937 rng(33);
  for (LossKind kind : {LossKind::kQuad, LossKind::kStein, LossKind::kQre}) {
    for (int trial = 0; trial < 4; ++trial) {
      BasicMmlpParams params = BasicMmlpParams::init({2, 3, 2}, 6, rng);
      Matrix x = random_matrix(rng, 2, 3);
      Matrix y = random_spd_trace_one(rng, 2);

      BasicForwardTrace tr = forward_basic(params, x);
      BasicGrads g = backward_basic(params, tr, y, kind);

      auto eval = [&] {
        return loss_value(kind, forward_basic(params, x).output(), y);
      };
      auto ptensors = params.tensors();
      auto gtensors = g.tensors();
      REQUIRE(ptensors.size() == gtensors.size());
      for (size_t k = 0; k < ptensors.size(); ++k) {
        Matrix fd = fd_tensor_grad(ptensors[k], eval);
        CHECK(rel_error(*gtensors[k], fd, 1e-6) < 2e-4);
      }
    }
  }
}

TEST_CASE("basic form backprop from an external head gradient") {
  std::mt19937 rng(34);
  BasicMmlpParams params = BasicMmlpParams::init({3, 3}, 4, rng);
  Matrix x = random_matrix(rng, 2, 2);
  RowVec d_out = random_matrix(rng, 1, 9);

  BasicForwardTrace tr = forward_basic(params, x);
  BasicGrads g = backward_basic_from(params, tr, d_out);

  auto eval = [&] {
    return (d_out * vec(forward_basic(params, x).output()))(0);
  };
  auto ptensors = params.tensors();
  auto gtensors = g.tensors();
  for (size_t k = 0; k < ptensors.size(); ++k) {
    Matrix fd = fd_tensor_grad(ptensors[k], eval);
    CHECK(rel_error(*gtensors[k], fd, 1e-6) < 1e-4);
  }
}

TEST_CASE("general form forward shapes and invariants") {
  std::mt19937 rng(35);
  GeneralMmlpParams params =
      GeneralMmlpParams::init({2, 3, 2}, {3, 2, 4}, 6, rng);
  Matrix x = random_matrix(rng, 3, 2);
  GeneralForwardTrace t = forward_general(params, x);
  CHECK(t.vec_output().size() == 3);
  CHECK(t.mat_output().rows() == 2);
  CHECK(t.mat_output().trace() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(min_eigenvalue(t.mat_output()) > -1e-12);
  for (const Vector& h : t.hv) CHECK(h.array().abs().maxCoeff() <= 1.0);
}

TEST_CASE("general form backprop matches finite differences") {
  std::mt19937 rng(36);
  for (int trial = 0; trial < 4; ++trial) {
    GeneralMmlpParams params =
        GeneralMmlpParams::init({2, 2, 3}, {2, 3, 2}, 6, rng);
    if (trial % 2 == 1) {
      params.head_kernel = KernelForm::kDiagonal;
      params.vec_head.segments = {{1, ScalarActivation::linear()},
                                  {1, ScalarActivation::sigmoid_bounded()}};
    }
    Matrix x = random_matrix(rng, 2, 3);
    RowVec dv = random_matrix(rng, 1, 2);
    RowVec dm = random_matrix(rng, 1, 4);

    GeneralForwardTrace tr = forward_general(params, x);
    GeneralGrads g = backward_general(params, tr, dv, dm);

    auto eval = [&] {
      GeneralForwardTrace t = forward_general(params, x);
      return (dv * t.vec_output())(0) + (dm * vec(t.mat_output()))(0);
    };
    auto ptensors = params.tensors();
    auto gtensors = g.tensors();
    REQUIRE(ptensors.size() == gtensors.size());
    for (size_t k = 0; k < ptensors.size(); ++k) {
      Matrix fd = fd_tensor_grad(ptensors[k], eval);
      CHECK(rel_error(*gtensors[k], fd, 1e-6) < 1e-4);
    }

    Matrix x_fd = x;
    Matrix fd_in = fd_tensor_grad(&x_fd, [&] {
      GeneralForwardTrace t = forward_general(params, x_fd);
      return (dv * t.vec_output())(0) + (dm * vec(t.mat_output()))(0);
    });
    CHECK(rel_error(unvec(g.input, x.rows(), x.cols()), fd_in, 1e-6) < 1e-4);
  }
}

TEST_CASE("shallow baseline forward and backprop") {
  std::mt19937 rng(37);
  for (LossKind kind : {LossKind::kQuad, LossKind::kQre}) {
    ShallowMmlpParams params = ShallowMmlpParams::init(2, {4, 3}, 6, rng);
    Matrix x = random_matrix(rng, 2, 3);
    Matrix y = random_spd_trace_one(rng, 2);

    ShallowForwardTrace tr = forward_shallow(params, x);
    CHECK(tr.y_hat.trace() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(min_eigenvalue(tr.y_hat) > -1e-12);

    ShallowGrads g = backward_shallow(params, tr, y, kind);
    auto eval = [&] {
      return loss_value(kind, forward_shallow(params, x).y_hat, y);
    };
    auto ptensors = params.tensors();
    auto gtensors = g.tensors();
    REQUIRE(ptensors.size() == gtensors.size());
    for (size_t k = 0; k < ptensors.size(); ++k) {
      Matrix fd = fd_tensor_grad(ptensors[k], eval);
      CHECK(rel_error(*gtensors[k], fd, 1e-6) < 2e-4);
    }
  }
}

TEST_CASE("a few gradient steps reduce the basic-form loss") {
  std::mt19937 rng(38);
  BasicMmlpParams params = BasicMmlpParams::init({3, 3, 4}, 8, rng);
  Matrix x = random_matrix(rng, 2, 4);
  Matrix y = random_spd_trace_one(rng, 3);

  double first = loss_value(LossKind::kQre, forward_basic(params, x).output(), y);
  double last = first;
  for (int it = 0; it < 50; ++it) {
    BasicForwardTrace tr = forward_basic(params, x);
    BasicGrads g = backward_basic(params, tr, y, LossKind::kQre);
    auto pt = params.tensors();
    auto gt = g.tensors();
    for (size_t k = 0; k < pt.size(); ++k) *pt[k] -= 0.05 * (*gt[k]);
    last = loss_value(LossKind::kQre, forward_basic(params, x).output(), y);
  }
  CHECK(last < 0.5 * first);
}
