#include "coinss/levy.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

#include "coinss/matfun.hpp"

namespace coinss {

namespace {

Matrix chol_factor(const Matrix& s, const char* what) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(std::string(what) + ": not positive definite");
  return llt.matrixL();
}

}  // namespace

LevyConfig LevyConfig::brownian(const Matrix& sigma_l) {
  LevyConfig cfg;
  cfg.kind = Kind::Brownian;
  cfg.sigma_l = matfun::require_spsd(sigma_l, "Brownian Sigma_L");
  (void)chol_factor(cfg.sigma_l, "Brownian Sigma_L");
  return cfg;
}

LevyConfig LevyConfig::nig(double alpha, const Vector& beta, double delta,
                           const Matrix& big_delta, const Vector& mu,
                           bool center) {
  LevyConfig cfg;
  cfg.kind = Kind::Nig;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.delta = delta;
  cfg.big_delta = matfun::require_spsd(big_delta, "NIG Delta");
  if (alpha < 0.0) throw std::invalid_argument("NIG: alpha must be >= 0");
  if (delta <= 0.0) throw std::invalid_argument("NIG: delta must be > 0");
  const double det = cfg.big_delta.determinant();
  if (std::abs(det - 1.0) > 1e-10)
    throw std::invalid_argument("NIG: det Delta must equal 1");
  const double k2 = alpha * alpha - beta.dot(cfg.big_delta * beta);
  if (!(k2 > 0.0)) throw std::invalid_argument("NIG: kappa^2 must be > 0");
  if (center) {
    cfg.mu = -(delta / std::sqrt(k2)) * (cfg.big_delta * beta);
  } else {
    if (mu.size() != beta.size())
      throw std::invalid_argument("NIG: mu has wrong dimension");
    cfg.mu = mu;
  }
  return cfg;
}

double LevyConfig::kappa() const {
  if (kind == Kind::Brownian) return 0.0;
  const double k2 = alpha * alpha - beta.dot(big_delta * beta);
  if (!(k2 > 0.0)) throw std::invalid_argument("NIG: kappa^2 must be > 0");
  return std::sqrt(k2);
}

Matrix levy_covariance(const LevyConfig& cfg) {
  if (cfg.kind == LevyConfig::Kind::Brownian) return cfg.sigma_l;
  const double k = cfg.kappa();
  const Vector db = cfg.big_delta * cfg.beta;
  Matrix s = (cfg.delta / k) *
             (cfg.big_delta + (1.0 / (k * k)) * (db * db.transpose()));
  return matfun::require_spsd(s, "NIG covariance");
}

Vector levy_mean(const LevyConfig& cfg) {
  if (cfg.kind == LevyConfig::Kind::Brownian)
    return Vector::Zero(cfg.sigma_l.rows());
  return cfg.mu + (cfg.delta / cfg.kappa()) * (cfg.big_delta * cfg.beta);
}

double sample_inverse_gaussian(double mu_ig, double lambda, RngStream& rng) {
  const double nu = rng.normal();
  const double y = nu * nu;
  const double x = mu_ig + mu_ig * mu_ig * y / (2.0 * lambda) -
                   (mu_ig / (2.0 * lambda)) *
                       std::sqrt(4.0 * mu_ig * lambda * y +
                                 mu_ig * mu_ig * y * y);
  const double u = rng.uniform();
  if (u <= mu_ig / (mu_ig + x)) return x;
  return mu_ig * mu_ig / x;
}

Matrix sample_increments(const LevyConfig& cfg, double dt, int count,
                         RngStream& rng) {
  if (dt <= 0.0) throw std::invalid_argument("sample_increments: dt must be > 0");
  if (count < 0) throw std::invalid_argument("sample_increments: count < 0");
  const int m = cfg.dim();
  Matrix out(count, m);

  if (cfg.kind == LevyConfig::Kind::Brownian) {
    const Matrix l = chol_factor(cfg.sigma_l, "Brownian Sigma_L");
    const double sdt = std::sqrt(dt);
    Vector z(m);
    for (int k = 0; k < count; ++k) {
      for (int j = 0; j < m; ++j) z(j) = rng.normal();
      out.row(k) = (sdt * (l * z)).transpose();
    }
    return out;
  }

  // NIG over dt has parameters (mu dt, alpha, beta, delta dt, Delta); the
  // mixing variable is inverse Gaussian with mean delta dt / kappa and
  // shape (delta dt)^2.
  const double kap = cfg.kappa();
  const double ddt = cfg.delta * dt;
  const double mu_ig = ddt / kap;
  const double lambda = ddt * ddt;
  const Matrix l = chol_factor(cfg.big_delta, "NIG Delta");
  const Vector db = cfg.big_delta * cfg.beta;
  Vector w(m);
  for (int k = 0; k < count; ++k) {
    const double z = sample_inverse_gaussian(mu_ig, lambda, rng);
    for (int j = 0; j < m; ++j) w(j) = rng.normal();
    out.row(k) = (cfg.mu * dt + z * db + std::sqrt(z) * (l * w)).transpose();
  }
  return out;
}

}  // namespace coinss
