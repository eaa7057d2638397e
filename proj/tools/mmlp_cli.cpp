// Command-line experiment runner. Every command is reproducible from
// (config, seed): outputs are CSV files whose rows carry a hash of the
// resolved configuration. Exit codes: 0 ok, 2 config error, 3 numeric
// failure, 4 IO error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmlp/experiments.hpp"

using nlohmann::json;
using namespace mmlp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
  std::string config_path;
  unsigned seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--seed", args.seed, "RNG seed (overrides the config)")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--threads", args.threads, "worker threads (1 = bitwise reproducible)")
      ->check(CLI::PositiveNumber);
}

json load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return json::object();
  std::ifstream in(args.config_path);
  if (!in) throw IoError("cannot read config: " + args.config_path);
  try {
    json j;
    in >> j;
    if (!j.is_object()) {
      throw FormatError(args.config_path + ": config must be a JSON object");
    }
    return j;
  } catch (const json::exception& e) {
    throw FormatError(args.config_path + ": " + e.what());
  }
}

// FNV-1a over the canonical config dump; stamped on every output row
std::string config_hash(const json& resolved) {
  const std::string dump = resolved.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string path = dir + "/" + name;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  return out;
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("config field '") + key + "': " + e.what());
  }
}

unsigned resolve_seed(const json& cfg, const CommonArgs& args) {
  if (args.seed_set) return args.seed;
  return field<unsigned>(cfg, "seed", 0);
}

int cmd_example1(const CommonArgs& args) {
  json cfg = load_config(args);
  Example1Config c;
  c.d0 = field<Index>(cfg, "d0", c.d0);
  c.input_dim = field<Index>(cfg, "input_dim", c.input_dim);
  c.n_train = field<Index>(cfg, "n_train", c.n_train);
  c.n_test = field<Index>(cfg, "n_test", c.n_test);
  c.hidden = field<std::vector<Index>>(cfg, "hidden", c.hidden);
  c.iterations = field<int>(cfg, "iterations", c.iterations);
  c.batch = field<int>(cfg, "batch", c.batch);
  c.lr = field<double>(cfg, "lr", c.lr);
  c.lr_decay = field<double>(cfg, "lr_decay", c.lr_decay);
  c.decay_at = field<double>(cfg, "decay_at", c.decay_at);
  c.draws_per_class = field<Index>(cfg, "draws_per_class", c.draws_per_class);
  c.seed = resolve_seed(cfg, args);
  if (c.d0 < 2 || c.n_train < 1 || c.n_test < 1 || c.hidden.empty() ||
      c.batch < 1) {
    throw FormatError("example1: d0 >= 2, nonempty hidden, positive set sizes required");
  }

  json resolved = {{"cmd", "example1"}, {"d0", c.d0},
                   {"input_dim", c.input_dim}, {"n_train", c.n_train},
                   {"n_test", c.n_test}, {"hidden", c.hidden},
                   {"iterations", c.iterations}, {"batch", c.batch},
                   {"lr", c.lr}, {"lr_decay", c.lr_decay},
                   {"decay_at", c.decay_at},
                   {"draws_per_class", c.draws_per_class}, {"seed", c.seed}};
  const std::string hash = config_hash(resolved);

  std::vector<Example1Row> rows = run_example1(c);
  std::ofstream out = open_output(args.out_dir, "example1.csv");
  out << "config_hash,trained_with,e_quad,e_qre,e_stein\n";
  for (const Example1Row& r : rows) {
    out << hash << ',' << r.trained_with << ',' << r.e_quad << ',' << r.e_qre
        << ',' << r.e_stein << '\n';
  }
  return kExitOk;
}

int cmd_example2(const CommonArgs& args) {
  json cfg = load_config(args);
  Example2Config c;
  c.d0 = field<Index>(cfg, "d0", c.d0);
  c.input_dim = field<Index>(cfg, "input_dim", c.input_dim);
  c.n_train = field<Index>(cfg, "n_train", c.n_train);
  c.n_test = field<Index>(cfg, "n_test", c.n_test);
  c.depths = field<std::vector<Index>>(cfg, "depths", c.depths);
  c.width = field<Index>(cfg, "width", c.width);
  c.iterations = field<int>(cfg, "iterations", c.iterations);
  c.batch = field<int>(cfg, "batch", c.batch);
  c.lr = field<double>(cfg, "lr", c.lr);
  c.lr_decay = field<double>(cfg, "lr_decay", c.lr_decay);
  c.decay_at = field<double>(cfg, "decay_at", c.decay_at);
  c.draws_per_class = field<Index>(cfg, "draws_per_class", c.draws_per_class);
  c.seed = resolve_seed(cfg, args);
  if (c.d0 < 2 || c.depths.empty() || c.width < 1 || c.batch < 1) {
    throw FormatError("example2: d0 >= 2, nonempty depths, positive width required");
  }

  json resolved = {{"cmd", "example2"}, {"d0", c.d0},
                   {"input_dim", c.input_dim}, {"n_train", c.n_train},
                   {"n_test", c.n_test}, {"depths", c.depths},
                   {"width", c.width}, {"iterations", c.iterations},
                   {"batch", c.batch}, {"lr", c.lr},
                   {"lr_decay", c.lr_decay}, {"decay_at", c.decay_at},
                   {"draws_per_class", c.draws_per_class}, {"seed", c.seed}};
  const std::string hash = config_hash(resolved);

  std::vector<Example2Row> rows = run_example2(c);
  std::ofstream out = open_output(args.out_dir, "example2.csv");
  out << "config_hash,depth,deep_e_qre,shallow_e_qre\n";
  for (const Example2Row& r : rows) {
    out << hash << ',' << r.depth << ',' << r.deep_e_qre << ','
        << r.shallow_e_qre << '\n';
  }
  return kExitOk;
}

int cmd_gamma_vs_gauss(const CommonArgs& args) {
  json cfg = load_config(args);
  GammaVsGaussConfig c;
  c.alphas = field<std::vector<double>>(cfg, "alphas", c.alphas);
  c.betas = field<std::vector<double>>(cfg, "betas", c.betas);
  c.dims = field<std::vector<Index>>(cfg, "dims", c.dims);
  c.draws = field<long>(cfg, "draws", c.draws);
  c.seed = resolve_seed(cfg, args);
  if (c.alphas.empty() || c.betas.empty() || c.dims.empty() || c.draws < 1) {
    throw FormatError("gamma-vs-gauss: nonempty grids and positive draws required");
  }

  json resolved = {{"cmd", "gamma-vs-gauss"}, {"alphas", c.alphas},
                   {"betas", c.betas}, {"dims", c.dims},
                   {"draws", c.draws}, {"seed", c.seed}};
  const std::string hash = config_hash(resolved);

  std::vector<GammaVsGaussRow> rows = run_gamma_vs_gauss(c);
  std::ofstream out = open_output(args.out_dir, "gamma_vs_gauss.csv");
  out << "config_hash,alpha,beta,d,mode,cov_sqre,max_mean_err\n";
  for (const GammaVsGaussRow& r : rows) {
    out << hash << ',' << r.alpha << ',' << r.beta << ',' << r.d << ','
        << r.mode << ',' << r.cov_sqre << ',' << r.max_mean_err << '\n';
  }
  return kExitOk;
}

int cmd_vae(const CommonArgs& args) {
  json cfg = load_config(args);
  VaeRunConfig c;
  c.variant = variant_from_name(field<std::string>(cfg, "variant", "NfNf"));
  c.data_dim = field<Index>(cfg, "data_dim", c.data_dim);
  c.latent_dim = field<Index>(cfg, "latent_dim", c.latent_dim);
  c.hidden = field<std::vector<Index>>(cfg, "hidden", c.hidden);
  c.n_train = field<Index>(cfg, "n_train", c.n_train);
  c.n_test = field<Index>(cfg, "n_test", c.n_test);
  c.k_true = field<Index>(cfg, "k_true", c.k_true);
  c.noise_sd = field<double>(cfg, "noise_sd", c.noise_sd);
  c.n_samples = field<Index>(cfg, "n_samples", c.n_samples);
  c.train.epochs = field<int>(cfg, "epochs", c.train.epochs);
  c.train.batch = field<int>(cfg, "batch", c.train.batch);
  c.train.r_train = field<int>(cfg, "r_train", c.train.r_train);
  c.train.r_eval = field<int>(cfg, "r_eval", c.train.r_eval);
  c.train.lr = field<double>(cfg, "lr", c.train.lr);
  c.train.seed = resolve_seed(cfg, args);
  const std::string resume = field<std::string>(cfg, "resume", "");
  if (c.latent_dim < 1 || c.data_dim < 2 || c.hidden.empty()) {
    throw FormatError("vae: data_dim >= 2, latent_dim >= 1, nonempty hidden required");
  }

  json resolved = {{"cmd", "vae"}, {"variant", variant_name(c.variant)},
                   {"data_dim", c.data_dim}, {"latent_dim", c.latent_dim},
                   {"hidden", c.hidden}, {"n_train", c.n_train},
                   {"n_test", c.n_test}, {"k_true", c.k_true},
                   {"noise_sd", c.noise_sd}, {"n_samples", c.n_samples},
                   {"epochs", c.train.epochs}, {"batch", c.train.batch},
                   {"r_train", c.train.r_train}, {"r_eval", c.train.r_eval},
                   {"lr", c.train.lr}, {"seed", c.train.seed},
                   {"resume", resume}};
  const std::string hash = config_hash(resolved);

  c.train.checkpoint_path = args.out_dir + "/vae_checkpoint.json";

  VaeRunResult out;
  if (resume.empty()) {
    out = run_vae_experiment(c);
  } else {
    // rebuild the same data split, then continue from the checkpoint
    VaeDataset data = gen_vae_dataset(c.n_train + c.n_test, c.data_dim,
                                      c.k_true, c.train.seed + 101,
                                      c.noise_sd);
    VaeCheckpoint ckpt = load_checkpoint(resume);
    out.result = resume_vae(ckpt, data.x.topRows(c.n_train),
                            data.x.bottomRows(c.n_test), c.train);
  }

  std::ofstream metrics = open_output(args.out_dir, "vae_metrics.csv");
  metrics << "config_hash,epoch,split,elbo,kld,loglik\n";
  for (const MetricsRow& r : out.result.metrics) {
    metrics << hash << ',' << r.epoch << ',' << r.split << ',' << r.elbo
            << ',' << r.kld << ',' << r.loglik << '\n';
  }

  if (out.samples.rows() > 0) {
    std::ofstream samples = open_output(args.out_dir, "vae_samples.csv");
    samples << "config_hash";
    for (Index j = 0; j < out.samples.cols(); ++j) samples << ",x" << j;
    samples << '\n';
    for (Index i = 0; i < out.samples.rows(); ++i) {
      samples << hash;
      for (Index j = 0; j < out.samples.cols(); ++j) {
        samples << ',' << out.samples(i, j);
      }
      samples << '\n';
    }
  }
  return kExitOk;
}

int cmd_gradcheck(const CommonArgs& args) {
  json cfg = load_config(args);
  const int seeds = field<int>(cfg, "seeds", 20);
  if (seeds < 1) throw FormatError("gradcheck: seeds must be positive");

  json resolved = {{"cmd", "gradcheck"}, {"seeds", seeds}};
  const std::string hash = config_hash(resolved);

  std::vector<GradCheckRow> rows = run_gradcheck(seeds);
  std::ofstream out = open_output(args.out_dir, "gradcheck.csv");
  out << "config_hash,name,seeds,max_rel,tol,pass\n";

  bool all_pass = true;
  json summary = json::array();
  std::cout << "1.." << rows.size() << "\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const GradCheckRow& r = rows[i];
    all_pass = all_pass && r.pass;
    std::cout << (r.pass ? "ok " : "not ok ") << (i + 1) << " - " << r.name
              << " max_rel=" << r.max_rel << " tol=" << r.tol << "\n";
    out << hash << ',' << r.name << ',' << r.seeds << ',' << r.max_rel << ','
        << r.tol << ',' << (r.pass ? 1 : 0) << '\n';
    summary.push_back({{"name", r.name}, {"seeds", r.seeds},
                       {"max_rel", r.max_rel}, {"tol", r.tol},
                       {"pass", r.pass}});
  }
  std::ofstream js = open_output(args.out_dir, "gradcheck.json");
  js << json{{"config_hash", hash}, {"all_pass", all_pass},
             {"checks", summary}}
            .dump(1)
     << '\n';
  return all_pass ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mMLP experiment runner"};
  app.require_subcommand(1);

  CommonArgs args;
  int (*handler)(const CommonArgs&) = nullptr;

  const std::pair<const char*, int (*)(const CommonArgs&)> commands[] = {
      {"example1", cmd_example1},
      {"example2", cmd_example2},
      {"gamma-vs-gauss", cmd_gamma_vs_gauss},
      {"vae", cmd_vae},
      {"gradcheck", cmd_gradcheck}};
  for (auto [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, args);
    sub->callback([&handler, fn = fn]() { handler = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return handler(args);
  } catch (const FormatError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
