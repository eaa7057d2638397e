#include "mmlp/data.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "mmlp/distributions.hpp"

namespace mmlp {

namespace {

constexpr char kTensorMagic[4] = {'M', 'T', 'N', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

Matrix random_gauss(std::mt19937& rng, Index m, Index n, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Matrix a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = nd(rng);
  return a;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& what) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("tensor container: truncated " + what);
  return v;
}

}  // namespace

SpdDataset gen_spd_dataset(Index n, Index input_dim, Index d0, unsigned seed,
                           Index draws_per_class, Index n_classes) {
  if (d0 < 2) throw DimensionMismatch("gen_spd_dataset: d0 must be >= 2");
  if (n_classes <= 0 || n_classes > n) n_classes = n;
  std::mt19937 rng(seed);
  Matrix a = random_gauss(rng, d0, input_dim);

  // Per class: mean mu ~ N(0, I) and a covariance with random orientation
  // and eigenvalues log-uniform in [0.1, 2].
  std::uniform_real_distribution<double> logu(std::log(0.1), std::log(2.0));
  std::vector<Vector> mus;
  std::vector<Matrix> chols;
  std::vector<Matrix> pops;
  for (Index c = 0; c < n_classes; ++c) {
    Vector mu = random_gauss(rng, input_dim, 1).col(0);
    Matrix g = random_gauss(rng, input_dim, input_dim);
    Matrix q = sym_eig(sym_part(g * g.transpose())).vectors;
    Vector lam(input_dim);
    for (Index k = 0; k < input_dim; ++k) lam(k) = std::exp(logu(rng));
    Matrix sigma = sym_part(q * lam.asDiagonal() * q.transpose());
    mus.push_back(mu);
    chols.push_back(chol_lower(sigma));
    Matrix pop = sym_part(a * sigma * a.transpose());
    pops.push_back(pop / pop.trace());
  }

  SpdDataset ds;
  ds.seed = seed;
  ds.x.resize(n, input_dim);
  ds.y.reserve(n);
  std::normal_distribution<double> nd;
  for (Index i = 0; i < n; ++i) {
    const Index c = i % n_classes;

    // sample covariance of the mapped draws A t_j; rows sharing a class get
    // independent draws, so reused classes still differ by sampling noise
    Vector mean = Vector::Zero(d0);
    Matrix second = Matrix::Zero(d0, d0);
    for (Index j = 0; j < draws_per_class; ++j) {
      Vector e(input_dim);
      for (Index k = 0; k < input_dim; ++k) e(k) = nd(rng);
      Vector mapped = a * (mus[c] + chols[c] * e);
      mean += mapped;
      second += mapped * mapped.transpose();
    }
    mean /= static_cast<double>(draws_per_class);
    Matrix cov = sym_part(second / static_cast<double>(draws_per_class) -
                          mean * mean.transpose());
    ds.x.row(i) = mus[c].transpose();
    ds.y.push_back(cov / cov.trace());
    ds.pop_y.push_back(pops[c]);
  }
  return ds;
}

VaeDataset gen_vae_dataset(Index n, Index d, Index k_true, unsigned seed,
                           double noise_sd) {
  std::mt19937 rng(seed);
  VaeDataset ds;
  ds.seed = seed;
  ds.noise_sd = noise_sd;
  ds.w_true = random_gauss(rng, d, k_true) / std::sqrt(double(k_true));
  ds.x.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    Vector s = random_gauss(rng, k_true, 1).col(0);
    Vector noise = random_gauss(rng, d, 1, noise_sd).col(0);
    ds.x.row(i) = (ds.w_true * s + noise).transpose();
  }
  return ds;
}

PcaResult pca_reduce(const Matrix& data, Index n_components) {
  const Index n = data.rows();
  const Index d = data.cols();
  PcaResult out;
  out.mean = data.colwise().mean();
  Matrix centered = data.rowwise() - out.mean;
  Matrix cov = sym_part(centered.transpose() * centered /
                        std::max<double>(1.0, n - 1));
  EigDecomposition eig = sym_eig(cov);

  const double rank_tol = 1e-12 * std::max(1.0, eig.values.maxCoeff());
  Index rank = 0;
  for (Index i = 0; i < d; ++i)
    if (eig.values(i) > rank_tol) ++rank;
  if (n_components > rank) {
    throw RankDeficient("pca_reduce: requested " +
                        std::to_string(n_components) +
                        " components of rank-" + std::to_string(rank) +
                        " data");
  }

  // eigenvalues come back descending, so the top block is the leading columns
  out.loadings = eig.vectors.leftCols(n_components);
  out.scores = centered * out.loadings;
  return out;
}

void save_matrix_csv(const Matrix& m, unsigned seed, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# mmlp-dataset v" << kFormatVersion << " seed=" << seed << "\n";
  for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << "x" << j;
  out << "\n";
  out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << "\n";
  }
  if (!out) throw IoError("short write to " + path);
}

std::pair<Matrix, unsigned> load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");

  unsigned version = 0, seed = 0;
  if (std::sscanf(line.c_str(), "# mmlp-dataset v%u seed=%u", &version,
                  &seed) != 2 ||
      version != kFormatVersion) {
    throw FormatError(path + ":1: bad dataset header: " + line);
  }
  if (!std::getline(in, line)) throw FormatError(path + ":2: missing columns");
  const Index cols =
      1 + static_cast<Index>(std::count(line.begin(), line.end(), ','));

  std::vector<double> values;
  Index rows = 0;
  for (Index lineno = 3; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    Index got = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError(path + ":" + std::to_string(lineno) +
                          ": bad number '" + cell + "'");
      }
      ++got;
    }
    if (got != cols) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(cols) + " columns, got " +
                        std::to_string(got));
    }
    ++rows;
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = values[i * cols + j];
  return {m, seed};
}

void save_tensors(const std::vector<Matrix>& tensors, unsigned seed,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kTensorMagic, 4);
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint32_t>(seed));
  write_pod(out, static_cast<std::uint64_t>(tensors.size()));
  for (const Matrix& t : tensors) {
    write_pod(out, static_cast<std::uint64_t>(t.rows()));
    write_pod(out, static_cast<std::uint64_t>(t.cols()));
    for (Index i = 0; i < t.rows(); ++i)
      for (Index j = 0; j < t.cols(); ++j) write_pod(out, t(i, j));
  }
  if (!out) throw IoError("short write to " + path);
}

std::pair<std::vector<Matrix>, unsigned> load_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTensorMagic, 4) != 0) {
    throw FormatError(path + ": bad tensor container magic");
  }
  const auto version = read_pod<std::uint32_t>(in, "version");
  if (version != kFormatVersion) {
    throw FormatError(path + ": unsupported container version " +
                      std::to_string(version));
  }
  const auto seed = read_pod<std::uint32_t>(in, "seed");
  const auto count = read_pod<std::uint64_t>(in, "tensor count");

  std::vector<Matrix> tensors;
  tensors.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto rows = read_pod<std::uint64_t>(in, "tensor rows");
    const auto cols = read_pod<std::uint64_t>(in, "tensor cols");
    Matrix t(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < t.rows(); ++i)
      for (Index j = 0; j < t.cols(); ++j)
        t(i, j) = read_pod<double>(in, "tensor payload");
    tensors.push_back(std::move(t));
  }
  return {std::move(tensors), seed};
}

void save_dataset(const SpdDataset& ds, const std::string& stem) {
  save_matrix_csv(ds.x, ds.seed, stem + ".csv");
  save_tensors(ds.y, ds.seed, stem + ".tns");
}

SpdDataset load_dataset(const std::string& stem) {
  SpdDataset ds;
  auto [x, seed_x] = load_matrix_csv(stem + ".csv");
  auto [y, seed_y] = load_tensors(stem + ".tns");
  if (seed_x != seed_y) {
    throw FormatError(stem + ": input/target seed mismatch");
  }
  ds.x = std::move(x);
  ds.y = std::move(y);
  ds.seed = seed_x;
  return ds;
}

}  // namespace mmlp
