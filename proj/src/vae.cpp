#include "mmlp/vae.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace mmlp {

using nlohmann::json;

const char* variant_name(VaeVariant v) {
  switch (v) {
    case VaeVariant::kNdNd: return "NdNd";
    case VaeVariant::kNdNf: return "NdNf";
    case VaeVariant::kNfNd: return "NfNd";
    case VaeVariant::kNfNf: return "NfNf";
    case VaeVariant::kEfNf: return "EfNf";
    case VaeVariant::kEfEf: return "EfEf";
  }
  return "NfNf";
}

VaeVariant variant_from_name(const std::string& name) {
  for (VaeVariant v : {VaeVariant::kNdNd, VaeVariant::kNdNf, VaeVariant::kNfNd,
                       VaeVariant::kNfNf, VaeVariant::kEfNf, VaeVariant::kEfEf}) {
    if (name == variant_name(v)) return v;
  }
  throw FormatError("unknown model variant: " + name);
}

Family VaeModelSpec::gen_family() const {
  return (variant == VaeVariant::kEfNf || variant == VaeVariant::kEfEf)
             ? Family::kMpe
             : Family::kGaussian;
}

Family VaeModelSpec::rec_family() const {
  return variant == VaeVariant::kEfEf ? Family::kMpe : Family::kGaussian;
}

KernelForm VaeModelSpec::gen_kernel() const {
  return (variant == VaeVariant::kNdNd || variant == VaeVariant::kNdNf)
             ? KernelForm::kDiagonal
             : KernelForm::kFull;
}

KernelForm VaeModelSpec::rec_kernel() const {
  return (variant == VaeVariant::kNdNd || variant == VaeVariant::kNfNd)
             ? KernelForm::kDiagonal
             : KernelForm::kFull;
}

bool VaeModelSpec::closed_form_kld() const {
  return rec_family() == Family::kGaussian;
}

namespace {

HeadActivation dist_head(Index mean_dim, Family family) {
  HeadActivation head;
  head.segments = {{mean_dim, ScalarActivation::linear()},
                   {1, ScalarActivation::linear()}};
  if (family == Family::kMpe) {
    head.segments.push_back({1, ScalarActivation::sigmoid_bounded()});
    head.segments.push_back({1, ScalarActivation::sigmoid_bounded()});
  }
  return head;
}

GeneralMmlpParams make_net(Index out_mat, Index out_vec_mean, Family family,
                           KernelForm kernel, const std::vector<Index>& hidden,
                           Index input_size, std::mt19937& rng) {
  if (hidden.empty()) {
    throw DimensionMismatch("VaeModelSpec: at least one hidden layer required");
  }
  std::vector<Index> mat_dims = {out_mat};
  std::vector<Index> vec_dims = {out_vec_mean + 1 +
                                 (family == Family::kMpe ? 2 : 0)};
  for (Index h : hidden) {
    mat_dims.push_back(h);
    vec_dims.push_back(h);
  }
  GeneralMmlpParams net =
      GeneralMmlpParams::init(mat_dims, vec_dims, input_size, rng);
  net.vec_head = dist_head(out_vec_mean, family);
  net.head_kernel = kernel;
  return net;
}

VaeDist split_heads(const GeneralForwardTrace& trace, Index mean_dim,
                    Family family) {
  VaeDist d;
  d.family = family;
  const Vector& v = trace.vec_output();
  d.mu = v.head(mean_dim);
  d.log_eta = v(mean_dim);
  if (family == Family::kMpe) {
    d.alpha = v(mean_dim + 1);
    d.beta = v(mean_dim + 2);
  }
  d.omega = trace.mat_output();
  return d;
}

double std_normal_logpdf(const Vector& s) {
  return -0.5 * (static_cast<double>(s.size()) * std::log(2.0 * M_PI) +
                 s.squaredNorm());
}

// Head-gradient rows in the vector head's segment order.
RowVec pack_vec_head(const RowVec& d_mu, double d_log_eta, Family family,
                     double d_alpha, double d_beta) {
  RowVec out(d_mu.size() + 1 + (family == Family::kMpe ? 2 : 0));
  out.head(d_mu.size()) = d_mu;
  out(d_mu.size()) = d_log_eta;
  if (family == Family::kMpe) {
    out(d_mu.size() + 1) = d_alpha;
    out(d_mu.size() + 2) = d_beta;
  }
  return out;
}

void accumulate(GeneralGrads& acc, GeneralGrads& g, double scale) {
  auto at = acc.tensors();
  auto gt = g.tensors();
  for (size_t i = 0; i < at.size(); ++i) *at[i] += scale * (*gt[i]);
}

GeneralGrads zeros_like(const GeneralMmlpParams& params) {
  GeneralGrads g;
  for (const Matrix& m : params.mat.w) g.mat.w.push_back(Matrix::Zero(m.rows(), m.cols()));
  for (const Matrix& m : params.mat.b) g.mat.b.push_back(Matrix::Zero(m.rows(), m.cols()));
  for (const Matrix& m : params.a) g.a.push_back(Matrix::Zero(m.rows(), m.cols()));
  for (const Matrix& m : params.c) g.c.push_back(Matrix::Zero(m.rows(), m.cols()));
  for (const Matrix& m : params.bv) g.bv.push_back(Matrix::Zero(m.rows(), m.cols()));
  g.input = RowVec::Zero(params.mat.input_size);
  return g;
}

}  // namespace

VaeParams VaeParams::init(const VaeModelSpec& spec, std::mt19937& rng) {
  VaeParams p;
  p.rec = make_net(spec.latent_dim, spec.latent_dim, spec.rec_family(),
                   spec.rec_kernel(), spec.hidden, spec.data_dim, rng);
  p.gen = make_net(spec.data_dim, spec.data_dim, spec.gen_family(),
                   spec.gen_kernel(), spec.hidden, spec.latent_dim, rng);
  return p;
}

std::vector<Matrix*> VaeParams::tensors() {
  std::vector<Matrix*> out = rec.tensors();
  for (Matrix* m : gen.tensors()) out.push_back(m);
  return out;
}

std::vector<Matrix*> VaeGrads::tensors() {
  std::vector<Matrix*> out = rec.tensors();
  for (Matrix* m : gen.tensors()) out.push_back(m);
  return out;
}

double VaeDist::logpdf(const Vector& v) const {
  return family == Family::kGaussian ? t1g_logpdf(gaussian(), v)
                                     : mpe_logpdf(mpe(), v);
}

Encoded encode(const VaeModelSpec& spec, const VaeParams& params,
               const Vector& x) {
  Encoded e;
  e.trace = forward_general(params.rec, Matrix(x));
  e.dist = split_heads(e.trace, spec.latent_dim, spec.rec_family());
  return e;
}

Encoded decode(const VaeModelSpec& spec, const VaeParams& params,
               const Vector& s) {
  Encoded e;
  e.trace = forward_general(params.gen, Matrix(s));
  e.dist = split_heads(e.trace, spec.data_dim, spec.gen_family());
  return e;
}

ElboStats elbo_gaussian(const VaeModelSpec& spec, const VaeParams& params,
                        const Vector& x, int r, std::mt19937& rng) {
  if (spec.rec_family() != Family::kGaussian) {
    throw DimensionMismatch("elbo_gaussian: recognition model is not Gaussian");
  }
  Encoded enc = encode(spec, params, x);
  TraceOneGaussian q = enc.dist.gaussian();

  ElboStats stats;
  stats.kld = kld_t1g_vs_standard_normal(q);
  for (int l = 0; l < r; ++l) {
    auto [s, eps] = t1g_sample(q, rng);
    stats.loglik += decode(spec, params, s).dist.logpdf(x);
  }
  stats.loglik /= r;
  stats.elbo = stats.loglik - stats.kld;
  return stats;
}

ElboStats elbo_mpe(const VaeModelSpec& spec, const VaeParams& params,
                   const Vector& x, int r, std::mt19937& rng) {
  if (spec.rec_family() != Family::kMpe) {
    throw DimensionMismatch("elbo_mpe: recognition model is not mPE");
  }
  Encoded enc = encode(spec, params, x);
  TraceOneMpe q = enc.dist.mpe();

  ElboStats stats;
  for (int l = 0; l < r; ++l) {
    auto [s, aux] = mpe_sample(q, rng, MpeSampleMode::kGaussApprox);
    const double lp = decode(spec, params, s).dist.logpdf(x);
    const double lq = mpe_logpdf(q, s);
    const double lpi = std_normal_logpdf(s);
    stats.loglik += lp;
    stats.kld += lq - lpi;
  }
  stats.loglik /= r;
  stats.kld /= r;
  stats.elbo = stats.loglik - stats.kld;
  return stats;
}

ElboStats elbo(const VaeModelSpec& spec, const VaeParams& params,
               const Vector& x, int r, std::mt19937& rng) {
  return spec.closed_form_kld() ? elbo_gaussian(spec, params, x, r, rng)
                                : elbo_mpe(spec, params, x, r, rng);
}

std::pair<ElboStats, VaeGrads> elbo_grads(const VaeModelSpec& spec,
                                          const VaeParams& params,
                                          const Vector& x, int r,
                                          std::mt19937& rng) {
  const bool closed_kld = spec.closed_form_kld();
  Encoded enc = encode(spec, params, x);

  VaeGrads grads;
  grads.rec = zeros_like(params.rec);
  grads.gen = zeros_like(params.gen);

  ElboStats stats;
  const double w = 1.0 / r;
  for (int l = 0; l < r; ++l) {
    Vector s;
    RowVec d_s;  // D_s of the per-sample estimator terms
    Matrix samp_d_omega;
    Vector samp_d_log_eta;
    Vector samp_d_alpha, samp_d_beta;
    if (closed_kld) {
      TraceOneGaussian q = enc.dist.gaussian();
      auto [s_draw, eps] = t1g_sample(q, rng);
      s = s_draw;
      T1gSampleGrads sg = t1g_sample_grads(q, eps);
      samp_d_omega = sg.d_omega;
      samp_d_log_eta = sg.d_log_eta;
    } else {
      TraceOneMpe q = enc.dist.mpe();
      auto [s_draw, aux] = mpe_sample(q, rng, MpeSampleMode::kGaussApprox);
      s = s_draw;
      MpeSampleGrads sg = mpe_sample_grads(q, aux);
      samp_d_omega = sg.d_omega;
      samp_d_log_eta = sg.d_log_eta;
      samp_d_alpha = sg.d_alpha;
      samp_d_beta = sg.d_beta;
    }

    // decoder path: D log p(x|s) through the generative heads and back to s
    Encoded dec = decode(spec, params, s);
    RowVec d_vec_gen;
    RowVec d_mat_gen;
    if (spec.gen_family() == Family::kGaussian) {
      T1gLogpdfGrads pg = t1g_logpdf_grads(dec.dist.gaussian(), x);
      stats.loglik += w * t1g_logpdf(dec.dist.gaussian(), x);
      d_vec_gen = pack_vec_head(pg.d_mu, pg.d_log_eta, Family::kGaussian, 0, 0);
      d_mat_gen = pg.d_omega;
    } else {
      MpeLogpdfGrads pg = mpe_logpdf_grads(dec.dist.mpe(), x);
      stats.loglik += w * mpe_logpdf(dec.dist.mpe(), x);
      d_vec_gen =
          pack_vec_head(pg.d_mu, pg.d_log_eta, Family::kMpe, pg.d_alpha,
                        pg.d_beta);
      d_mat_gen = pg.d_omega;
    }
    GeneralGrads gen_g =
        backward_general(params.gen, dec.trace, d_vec_gen, d_mat_gen);
    accumulate(grads.gen, gen_g, w);
    d_s = gen_g.input;

    RowVec d_vec_rec = RowVec::Zero(enc.trace.vec_output().size());
    RowVec d_mat_rec = RowVec::Zero(enc.dist.omega.size());
    if (!closed_kld) {
      // Eq. 14 extra terms: + log prior - log q, both explicit and through s
      TraceOneMpe q = enc.dist.mpe();
      MpeLogpdfGrads qg = mpe_logpdf_grads(q, s);
      stats.kld += w * (mpe_logpdf(q, s) - std_normal_logpdf(s));
      d_s += -s.transpose() + qg.d_mu;  // D_s log q = -D_mu log q
      d_vec_rec -= pack_vec_head(qg.d_mu, qg.d_log_eta, Family::kMpe,
                                 qg.d_alpha, qg.d_beta);
      d_mat_rec -= qg.d_omega;
    }

    // recognition path through the sampler
    RowVec d_mu_rec = d_s;  // D_mu theta = I
    double d_log_eta_rec = (d_s * samp_d_log_eta)(0);
    double d_alpha_rec = 0.0, d_beta_rec = 0.0;
    if (!closed_kld) {
      d_alpha_rec = (d_s * samp_d_alpha)(0);
      d_beta_rec = (d_s * samp_d_beta)(0);
    }
    d_vec_rec += pack_vec_head(d_mu_rec, d_log_eta_rec, spec.rec_family(),
                               d_alpha_rec, d_beta_rec);
    d_mat_rec += d_s * samp_d_omega;

    GeneralGrads rec_g =
        backward_general(params.rec, enc.trace, d_vec_rec, d_mat_rec);
    accumulate(grads.rec, rec_g, w);
  }

  if (closed_kld) {
    TraceOneGaussian q = enc.dist.gaussian();
    stats.kld = kld_t1g_vs_standard_normal(q);
    KldGrads kg = kld_t1g_grads(q);
    RowVec d_vec =
        -pack_vec_head(kg.d_mu, kg.d_log_eta, Family::kGaussian, 0, 0);
    RowVec d_mat = -kg.d_omega;
    GeneralGrads kld_g = backward_general(params.rec, enc.trace, d_vec, d_mat);
    accumulate(grads.rec, kld_g, 1.0);
  }

  stats.elbo = stats.loglik - stats.kld;
  return {stats, grads};
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

ElboStats mean_elbo(const VaeModelSpec& spec, const VaeParams& params,
                    const Matrix& data, int r, std::mt19937& rng) {
  ElboStats acc;
  for (Index i = 0; i < data.rows(); ++i) {
    ElboStats e = elbo(spec, params, Vector(data.row(i).transpose()), r, rng);
    acc.elbo += e.elbo;
    acc.kld += e.kld;
    acc.loglik += e.loglik;
  }
  const double n = static_cast<double>(data.rows());
  acc.elbo /= n;
  acc.kld /= n;
  acc.loglik /= n;
  return acc;
}

void append_metrics(const std::string& path,
                    const std::vector<MetricsRow>& rows, size_t from) {
  if (path.empty()) return;
  std::ifstream probe(path);
  const bool fresh = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
  probe.close();
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open metrics log: " + path);
  if (fresh) out << "epoch,split,elbo,kld,loglik,wall_ms\n";
  out.precision(17);
  for (size_t i = from; i < rows.size(); ++i) {
    const MetricsRow& r = rows[i];
    out << r.epoch << ',' << r.split << ',' << r.elbo << ',' << r.kld << ','
        << r.loglik << ',' << r.wall_ms << '\n';
  }
}

TrainResult train_loop(const VaeModelSpec& spec, VaeParams params,
                       AdamState opt_state, int start_epoch, std::mt19937 rng,
                       const Matrix& train, const Matrix& test,
                       const VaeTrainConfig& config) {
  Adam opt;
  opt.lr = config.lr;
  TrainResult result{std::move(params), {}};

  std::vector<Index> order(train.rows());

  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    // identity before each shuffle so a resumed run permutes identically
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    for (size_t at = 0; at < order.size(); at += config.batch) {
      const size_t stop = std::min(at + config.batch, order.size());
      VaeGrads batch_grads;
      bool first = true;
      double batch_elbo = 0.0;
      for (size_t i = at; i < stop; ++i) {
        auto [stats, g] = elbo_grads(spec, result.params,
                                     Vector(train.row(order[i]).transpose()),
                                     config.r_train, rng);
        batch_elbo += stats.elbo;
        if (first) {
          batch_grads = std::move(g);
          first = false;
        } else {
          accumulate(batch_grads.rec, g.rec, 1.0);
          accumulate(batch_grads.gen, g.gen, 1.0);
        }
      }
      if (!std::isfinite(batch_elbo)) {
        throw DivergedTraining("ELBO is not finite at epoch " +
                               std::to_string(epoch));
      }
      // ascend the ELBO: minimize its negation, averaged over the batch
      const double scale = -1.0 / static_cast<double>(stop - at);
      for (Matrix* g : batch_grads.tensors()) *g *= scale;
      opt.step(result.params.tensors(), batch_grads.tensors(), opt_state);
    }

    std::mt19937 eval_rng(config.seed ^ (0x9e3779b9u + 2654435761u * (epoch + 1)));
    ElboStats tr = mean_elbo(spec, result.params, train, config.r_eval, eval_rng);
    ElboStats te = mean_elbo(spec, result.params, test, config.r_eval, eval_rng);
    const long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    const size_t from = result.metrics.size();
    result.metrics.push_back({epoch, "train", tr.elbo, tr.kld, tr.loglik, ms});
    result.metrics.push_back({epoch, "test", te.elbo, te.kld, te.loglik, ms});
    append_metrics(config.metrics_path, result.metrics, from);

    if (!config.checkpoint_path.empty()) {
      std::ostringstream state;
      state << rng;
      save_checkpoint({spec, result.params, opt_state, epoch + 1, state.str()},
                      config.checkpoint_path);
    }
  }
  return result;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<Index>(), j.at("cols").get<Index>());
  const json& rows = j.at("data");
  for (Index i = 0; i < m.rows(); ++i)
    for (Index jj = 0; jj < m.cols(); ++jj) m(i, jj) = rows[i][jj].get<double>();
  return m;
}

json net_to_json(const GeneralMmlpParams& net) {
  json j;
  j["mat_dims"] = net.mat.dims;
  j["vec_dims"] = net.vec_dims;
  j["input_size"] = net.mat.input_size;
  json tensors = json::array();
  for (const Matrix* m : const_cast<GeneralMmlpParams&>(net).tensors()) {
    tensors.push_back(matrix_to_json(*m));
  }
  j["tensors"] = tensors;
  return j;
}

void net_from_json(const json& j, GeneralMmlpParams& net) {
  const json& tensors = j.at("tensors");
  size_t at = 0;
  for (Matrix* m : net.tensors()) *m = matrix_from_json(tensors.at(at++));
}

}  // namespace

TrainResult train_vae(const VaeModelSpec& spec, const Matrix& train,
                      const Matrix& test, const VaeTrainConfig& config) {
  std::mt19937 rng(config.seed);
  VaeParams params = VaeParams::init(spec, rng);
  return train_loop(spec, std::move(params), AdamState{}, 0, rng, train, test,
                    config);
}

TrainResult resume_vae(VaeCheckpoint ckpt, const Matrix& train,
                       const Matrix& test, const VaeTrainConfig& config) {
  std::mt19937 rng;
  std::istringstream state(ckpt.rng_state);
  state >> rng;
  return train_loop(ckpt.spec, std::move(ckpt.params), std::move(ckpt.opt),
                    ckpt.epoch, rng, train, test, config);
}

void save_checkpoint(const VaeCheckpoint& ckpt, const std::string& path) {
  json j;
  j["variant"] = variant_name(ckpt.spec.variant);
  j["data_dim"] = ckpt.spec.data_dim;
  j["latent_dim"] = ckpt.spec.latent_dim;
  j["hidden"] = ckpt.spec.hidden;
  j["epoch"] = ckpt.epoch;
  j["rng_state"] = ckpt.rng_state;
  j["rec"] = net_to_json(ckpt.params.rec);
  j["gen"] = net_to_json(ckpt.params.gen);
  json mj = json::array(), vj = json::array();
  for (const Matrix& m : ckpt.opt.m) mj.push_back(matrix_to_json(m));
  for (const Matrix& m : ckpt.opt.v) vj.push_back(matrix_to_json(m));
  j["adam"] = {{"m", mj}, {"v", vj}, {"t", ckpt.opt.t}};

  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump(1) << '\n';
}

VaeCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint parse: ") + e.what());
  }

  VaeCheckpoint ckpt;
  ckpt.spec.variant = variant_from_name(j.at("variant").get<std::string>());
  ckpt.spec.data_dim = j.at("data_dim").get<Index>();
  ckpt.spec.latent_dim = j.at("latent_dim").get<Index>();
  ckpt.spec.hidden = j.at("hidden").get<std::vector<Index>>();
  ckpt.epoch = j.at("epoch").get<int>();
  ckpt.rng_state = j.at("rng_state").get<std::string>();

  std::mt19937 rng(0);
  ckpt.params = VaeParams::init(ckpt.spec, rng);
  net_from_json(j.at("rec"), ckpt.params.rec);
  net_from_json(j.at("gen"), ckpt.params.gen);
  for (const json& m : j.at("adam").at("m")) ckpt.opt.m.push_back(matrix_from_json(m));
  for (const json& m : j.at("adam").at("v")) ckpt.opt.v.push_back(matrix_from_json(m));
  ckpt.opt.t = j.at("adam").at("t").get<long>();
  return ckpt;
}

}  // namespace mmlp
