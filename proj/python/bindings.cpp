#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "mmlp/data.hpp"
#include "mmlp/experiments.hpp"
#include "mmlp/losses.hpp"
#include "mmlp/network.hpp"
#include "mmlp/optim.hpp"

namespace py = pybind11;
using namespace mmlp;

namespace {

// Minimal train/predict wrapper around the basic mMLP.
class SpdRegressor {
 public:
  SpdRegressor(Index d0, std::vector<Index> hidden, Index input_dim,
               unsigned seed)
      : input_dim_(input_dim) {
    std::vector<Index> dims = {d0};
    for (Index h : hidden) dims.push_back(h);
    std::mt19937 rng(seed);
    params_ = BasicMmlpParams::init(dims, input_dim, rng);
  }

  void fit(const Matrix& x, const std::vector<Matrix>& y,
           const std::string& loss, int iterations, double lr) {
    if (x.rows() != static_cast<Index>(y.size())) {
      throw DimensionMismatch("fit: row count mismatch between x and y");
    }
    LossKind kind = loss_from_name(loss);
    Adam opt;
    opt.lr = lr;
    AdamState state;
    const Index n = x.rows();
    for (int it = 0; it < iterations; ++it) {
      BasicGrads acc = zero_grads();
      for (Index i = 0; i < n; ++i) {
        BasicForwardTrace trace =
            forward_basic(params_, Matrix(x.row(i).transpose()));
        BasicGrads g = backward_basic(params_, trace, y[i], kind);
        auto at = acc.tensors();
        auto gt = g.tensors();
        for (size_t k = 0; k < at.size(); ++k)
          *at[k] += (*gt[k]) / static_cast<double>(n);
      }
      opt.step(params_.tensors(), acc.tensors(), state);
    }
  }

  Matrix predict(const Vector& x) const {
    return forward_basic(params_, Matrix(x)).output();
  }

  double score(const Matrix& x, const std::vector<Matrix>& y,
               const std::string& loss) const {
    LossKind kind = loss_from_name(loss);
    double acc = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
      acc += loss_value(kind, forward_basic(params_, Matrix(x.row(i).transpose())).output(),
                        y[i]);
    }
    return acc / static_cast<double>(x.rows());
  }

 private:
  static LossKind loss_from_name(const std::string& name) {
    if (name == "qre") return LossKind::kQre;
    if (name == "stein") return LossKind::kStein;
    if (name == "quad") return LossKind::kQuad;
    throw std::invalid_argument("unknown loss: " + name);
  }

  BasicGrads zero_grads() const {
    BasicGrads g;
    for (const Matrix& m : params_.w)
      g.w.push_back(Matrix::Zero(m.rows(), m.cols()));
    for (const Matrix& m : params_.b)
      g.b.push_back(Matrix::Zero(m.rows(), m.cols()));
    return g;
  }

  Index input_dim_;
  BasicMmlpParams params_;
};

}  // namespace

PYBIND11_MODULE(_mmlp, m) {
  m.doc() = "SPD matrix learning with the matrix MLP";

  m.def("qre_loss", &qre_loss, py::arg("y_hat"), py::arg("y"));
  m.def("stein_loss", &stein_loss, py::arg("y_hat"), py::arg("y"));
  m.def("quad_loss", &quad_loss, py::arg("y_hat"), py::arg("y"));

  m.def(
      "kernel_activation",
      [](const Matrix& z, const std::string& form) {
        return kernel_activation(
            z, form == "diagonal" ? KernelForm::kDiagonal : KernelForm::kFull);
      },
      py::arg("z"), py::arg("form") = "full",
      "Trace-one Mercer sigmoid kernel of the column features of z.");

  m.def(
      "gen_spd_dataset",
      [](Index n, Index input_dim, Index d0, unsigned seed,
         Index draws_per_class) {
        SpdDataset ds = gen_spd_dataset(n, input_dim, d0, seed, draws_per_class);
        return py::make_tuple(ds.x, ds.y);
      },
      py::arg("n"), py::arg("input_dim"), py::arg("d0"), py::arg("seed"),
      py::arg("draws_per_class") = 10000,
      "Synthetic SPD regression pairs; returns (inputs, list of targets).");

  m.def(
      "gradcheck",
      [](int seeds) {
        py::list rows;
        for (const GradCheckRow& r : run_gradcheck(seeds)) {
          py::dict d;
          d["name"] = r.name;
          d["max_rel"] = r.max_rel;
          d["tol"] = r.tol;
          d["pass"] = r.pass;
          rows.append(d);
        }
        return rows;
      },
      py::arg("seeds") = 3,
      "Finite-difference audit of every analytic derivative.");

  py::class_<SpdRegressor>(m, "SpdRegressor")
      .def(py::init<Index, std::vector<Index>, Index, unsigned>(),
           py::arg("d0"), py::arg("hidden"), py::arg("input_dim"),
           py::arg("seed") = 0)
      .def("fit", &SpdRegressor::fit, py::arg("x"), py::arg("y"),
           py::arg("loss") = "qre", py::arg("iterations") = 500,
           py::arg("lr") = 1e-3)
      .def("predict", &SpdRegressor::predict, py::arg("x"))
      .def("score", &SpdRegressor::score, py::arg("x"), py::arg("y"),
           py::arg("loss") = "qre");
}
