#include "coinss/simulate.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "coinss/matfun.hpp"

namespace coinss {

namespace {

bool divides(double small, double big) {
  const double q = big / small;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::abs(q));
}

void check_noise_consistency(const StateSpaceRealization& r,
                             const LevyConfig& cfg) {
  const Matrix cov = levy_covariance(cfg);
  if (cov.rows() != r.SigmaL.rows())
    throw std::invalid_argument("simulate: noise dimension mismatch");
  const double err = (cov - r.SigmaL).norm();
  if (err > 1e-8 * std::max(1.0, r.SigmaL.norm()))
    throw std::invalid_argument(
        "simulate: Levy covariance inconsistent with realization Sigma_L");
}

}  // namespace

ObservationSeries simulate_euler(const StateSpaceRealization& r,
                                 const LevyConfig& cfg,
                                 const EulerOptions& opts, RngStream& rng) {
  if (opts.euler_dt <= 0.0 || opts.h <= 0.0 || opts.T <= 0.0)
    throw std::invalid_argument("simulate_euler: steps must be positive");
  if (!divides(opts.euler_dt, opts.h))
    throw std::invalid_argument("simulate_euler: euler_dt must divide h");
  if (!divides(opts.h, opts.T))
    throw std::invalid_argument("simulate_euler: h must divide T");
  if (opts.burn_in > 0.0 && !divides(opts.euler_dt, opts.burn_in))
    throw std::invalid_argument("simulate_euler: euler_dt must divide burn_in");
  check_noise_consistency(r, cfg);

  const int per = static_cast<int>(std::round(opts.h / opts.euler_dt));
  const int n = static_cast<int>(std::round(opts.T / opts.h));
  const int burn_steps =
      static_cast<int>(std::round(opts.burn_in / opts.euler_dt));
  const double dt = opts.euler_dt;

  ObservationSeries out;
  out.h = opts.h;
  out.scheme = "euler";
  out.euler_dt = dt;
  out.Y.resize(n, r.d);

  Vector x = Vector::Zero(r.N);
  Vector drift(r.N);
  const int chunk = 4096;
  Matrix increments;
  int pos = chunk;
  int recorded = 0;
  const long total = static_cast<long>(burn_steps) + static_cast<long>(n) * per;
  for (long i = 1; i <= total; ++i) {
    if (pos >= chunk) {
      increments = sample_increments(cfg, dt, chunk, rng);
      pos = 0;
    }
    drift.noalias() = r.A * x;
    x += drift * dt;
    x.noalias() += r.B * increments.row(pos).transpose();
    ++pos;
    if (i > burn_steps && (i - burn_steps) % per == 0) {
      out.Y.row(recorded) = (r.C * x).transpose();
      ++recorded;
    }
  }
  return out;
}

ObservationSeries simulate_exact_gaussian(const StateSpaceRealization& r,
                                          double h, int n, RngStream& rng,
                                          const ExactGaussianOptions& opts) {
  if (h <= 0.0) throw std::invalid_argument("simulate_exact_gaussian: h <= 0");
  if (n < 2) throw std::invalid_argument("simulate_exact_gaussian: n < 2");

  const Matrix phi = matfun::matrix_exponential(r.A * h);
  const Matrix sigma_h =
      matfun::noise_covariance_integral(r.A, r.B, r.SigmaL, h);
  // Sigma(h) can be numerically rank deficient, factor via LDLT with floor
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_h);
  Vector ev = es.eigenvalues().cwiseMax(0.0);
  const Matrix factor =
      es.eigenvectors() * ev.cwiseSqrt().asDiagonal();

  ObservationSeries out;
  out.h = h;
  out.scheme = "exact-gaussian";
  out.Y.resize(n, r.d);

  Vector x = Vector::Zero(r.N);
  if (opts.stationary_init && r.N > r.c) {
    const Matrix q = r.B2 * r.SigmaL * r.B2.transpose();
    const Matrix st_cov = matfun::solve_lyapunov_continuous(r.A2, q);
    Eigen::SelfAdjointEigenSolver<Matrix> es2(st_cov);
    const Matrix f2 = es2.eigenvectors() *
                      es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Vector z(r.N - r.c);
    for (Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
    x.tail(r.N - r.c) = f2 * z;
  }
  Vector z(r.N);
  for (int k = 0; k < n; ++k) {
    for (Index j = 0; j < r.N; ++j) z(j) = rng.normal();
    x = phi * x + factor * z;
    out.Y.row(k) = (r.C * x).transpose();
  }
  return out;
}

void write_series_csv(const ObservationSeries& series,
                      const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << "k";
  for (int j = 1; j <= series.d(); ++j) f << ",y" << j;
  f << "\n";
  char buf[32];
  for (int k = 0; k < series.n(); ++k) {
    f << (k + 1);
    for (int j = 0; j < series.d(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", series.Y(k, j));
      f << ',' << buf;
    }
    f << "\n";
  }
  std::ofstream meta(path + ".meta");
  meta << "euler_dt = " << series.euler_dt << "\n";
  meta << "h = " << series.h << "\n";
  meta << "scheme = " << series.scheme << "\n";
  meta << "seed = " << series.seed << "\n";
}

ObservationSeries read_series_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty series file");
  int d = 0;
  for (char ch : line)
    if (ch == ',') ++d;
  if (d < 1) throw std::runtime_error("bad series header");
  std::vector<double> values;
  int n = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');  // k column
    for (int j = 0; j < d; ++j) {
      if (!std::getline(ss, tok, ','))
        throw std::runtime_error("bad series row");
      values.push_back(std::stod(tok));
    }
    ++n;
  }
  if (n < 2) throw std::runtime_error("series too short");
  ObservationSeries out;
  out.Y.resize(n, d);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < d; ++j) out.Y(k, j) = values[k * d + j];

  std::ifstream meta(path + ".meta");
  if (meta) {
    while (std::getline(meta, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq);
      std::string val = line.substr(eq + 1);
      auto trim = [](std::string& s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
          s.erase(s.begin());
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
          s.pop_back();
      };
      trim(key);
      trim(val);
      if (key == "h") out.h = std::stod(val);
      if (key == "euler_dt") out.euler_dt = std::stod(val);
      if (key == "scheme") out.scheme = val;
      if (key == "seed") out.seed = std::stoull(val);
    }
  }
  return out;
}

}  // namespace coinss
