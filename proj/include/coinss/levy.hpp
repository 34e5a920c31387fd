#pragma once

#include "coinss/rng.hpp"
#include "coinss/types.hpp"

namespace coinss {

/// Driving-noise configuration: multivariate Brownian motion with covariance
/// Sigma_L, or a normal inverse Gaussian process with parameters
/// (mu, alpha, beta, delta, Delta), det Delta = 1, kappa^2 = alpha^2 -
/// beta^T Delta beta > 0.
struct LevyConfig {
  enum class Kind { Brownian, Nig };
  Kind kind = Kind::Brownian;

  // Brownian
  Matrix sigma_l;

  // NIG
  Vector mu;
  double alpha = 0.0;
  Vector beta;
  double delta = 0.0;
  Matrix big_delta;

  int dim() const {
    return kind == Kind::Brownian ? static_cast<int>(sigma_l.rows())
                                  : static_cast<int>(beta.size());
  }

  static LevyConfig brownian(const Matrix& sigma_l);
  /// center = true sets mu = -delta Delta beta / kappa so the process has
  /// mean zero.
  static LevyConfig nig(double alpha, const Vector& beta, double delta,
                        const Matrix& big_delta, const Vector& mu,
                        bool center = false);

  double kappa() const;
};

/// Per-unit-time covariance of L(1). For NIG:
/// Sigma_L = delta kappa^{-1} (Delta + kappa^{-2} Delta beta beta^T Delta).
Matrix levy_covariance(const LevyConfig& cfg);

/// Per-unit-time mean of L(1): mu + delta Delta beta / kappa (zero for
/// Brownian).
Vector levy_mean(const LevyConfig& cfg);

/// n iid increments of L over step dt, one per row. NIG increments use the
/// inverse-Gaussian variance-mean mixture with the delta-scaled convolution
/// parameters (mu dt, alpha, beta, delta dt, Delta).
Matrix sample_increments(const LevyConfig& cfg, double dt, int count,
                         RngStream& rng);

/// One inverse-Gaussian draw with mean mu_ig and shape lambda
/// (Michael-Schucany-Haas).
double sample_inverse_gaussian(double mu_ig, double lambda, RngStream& rng);

}  // namespace coinss
