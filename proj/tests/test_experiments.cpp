#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <set>

#include "doctest.h"
#include "mmlp/experiments.hpp"
#include "mmlp/gradcheck.hpp"
#include "test_util.hpp"

using namespace mmlp;
using namespace mmlp::testutil;

TEST_CASE("gradient audit passes on a fresh build") {
  std::vector<GradCheckRow> rows = run_gradcheck(3);
  REQUIRE(rows.size() == 15);
  std::set<std::string> names;
  for (const GradCheckRow& row : rows) {
    CAPTURE(row.name);
    CAPTURE(row.max_rel);
    CHECK(row.pass);
    CHECK(row.max_rel < row.tol);
    CHECK(row.seeds == 3);
    names.insert(row.name);
  }
  CHECK(names.size() == rows.size());
}

TEST_CASE("the audit's oracle catches a sign-flipped gradient") {
  std::mt19937 rng(4);
  Matrix y_hat = random_spd_trace_one(rng, 4);
  Matrix y = random_spd_trace_one(rng, 4);
  RowVec flipped = -qre_loss_grad(y_hat, y);
  RowVec fd = fd_gradient_sym(
      [&](const Matrix& x) { return qre_loss(x, y); }, y_hat);
  CHECK(rel_error(Matrix(flipped), Matrix(fd)) > 1e-5);
}

TEST_CASE("loss comparison runner: schema, determinism, ordering") {
  Example1Config config;
  config.d0 = 4;
  config.input_dim = 6;
  config.n_train = 10;
  config.n_test = 40;
  config.hidden = {8, 8};
  config.iterations = 10000;
  config.draws_per_class = 1000;
  config.seed = 2;

  std::vector<Example1Row> rows = run_example1(config);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].trained_with == "qre");
  CHECK(rows[1].trained_with == "stein");
  CHECK(rows[2].trained_with == "quad");
  for (const Example1Row& row : rows) {
    CHECK(std::isfinite(row.e_quad));
    CHECK(row.e_qre >= 0.0);
    CHECK(row.e_stein >= 0.0);
  }
  // at this tiny scale both models sit near the sampling-noise floor of the
  // targets, so only gross inversions are meaningful
  CHECK(rows[0].e_qre <= 2.0 * rows[2].e_qre);

  std::vector<Example1Row> again = run_example1(config);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].e_qre == again[i].e_qre);
    CHECK(rows[i].e_quad == again[i].e_quad);
    CHECK(rows[i].e_stein == again[i].e_stein);
  }
}

TEST_CASE("deep-vs-shallow runner emits one row per depth") {
  Example2Config config;
  config.d0 = 4;
  config.input_dim = 6;
  config.n_train = 10;
  config.n_test = 30;
  config.depths = {2};
  config.width = 8;
  config.iterations = 300;
  config.draws_per_class = 1000;
  config.seed = 5;

  std::vector<Example2Row> rows = run_example2(config);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].depth == 2);
  CHECK(rows[0].deep_e_qre > 0.0);
  CHECK(rows[0].shallow_e_qre > 0.0);
  CHECK(std::isfinite(rows[0].deep_e_qre));
  CHECK(std::isfinite(rows[0].shallow_e_qre));
}

TEST_CASE("sampler study errors shrink with draws; modes agree at unit shape") {
  GammaVsGaussConfig small;
  small.alphas = {1.0};
  small.betas = {0.8};
  small.dims = {3};
  small.draws = 2000;
  small.seed = 9;
  GammaVsGaussConfig big = small;
  big.draws = 100000;

  auto pick = [](const std::vector<GammaVsGaussRow>& rows,
                 const std::string& mode) {
    for (const GammaVsGaussRow& r : rows)
      if (r.mode == mode) return r;
    throw std::logic_error("mode missing");
  };

  std::vector<GammaVsGaussRow> small_rows = run_gamma_vs_gauss(small);
  std::vector<GammaVsGaussRow> big_rows = run_gamma_vs_gauss(big);
  REQUIRE(small_rows.size() == 2);
  REQUIRE(big_rows.size() == 2);
  CHECK(pick(big_rows, "gamma").cov_sqre <
        pick(small_rows, "gamma").cov_sqre);
  CHECK(pick(big_rows, "gamma").max_mean_err <
        pick(small_rows, "gamma").max_mean_err);

  GammaVsGaussConfig unit = big;
  unit.betas = {1.0};
  std::vector<GammaVsGaussRow> unit_rows = run_gamma_vs_gauss(unit);
  // at beta = 1 both radial schemes target the same chi-square law
  CHECK(pick(unit_rows, "gamma").cov_sqre < 0.01);
  CHECK(pick(unit_rows, "gauss-approx").cov_sqre < 0.01);
  CHECK(std::abs(pick(unit_rows, "gamma").max_mean_err -
                 pick(unit_rows, "gauss-approx").max_mean_err) < 0.02);
}

TEST_CASE("VAE experiment runner trains and emits samples") {
  VaeRunConfig config;
  config.variant = VaeVariant::kNfNf;
  config.data_dim = 4;
  config.latent_dim = 2;
  config.hidden = {4};
  config.n_train = 30;
  config.n_test = 10;
  config.k_true = 2;
  config.n_samples = 5;
  config.train.epochs = 2;
  config.train.batch = 10;
  config.train.r_eval = 2;
  config.train.seed = 6;

  VaeRunResult out = run_vae_experiment(config);
  CHECK(out.result.metrics.size() == 4);
  CHECK(out.samples.rows() == 5);
  CHECK(out.samples.cols() == 4);
  CHECK(out.samples.allFinite());
}
