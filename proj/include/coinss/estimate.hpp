#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coinss/filter.hpp"
#include "coinss/model.hpp"
#include "coinss/rng.hpp"
#include "coinss/simulate.hpp"

namespace coinss {

enum class OptStatus { Converged, MaxIterations, InfeasibleStart };

std::string to_string(OptStatus s);

struct NelderMeadOptions {
  int max_evals = 20000;
  double tol_x = 1e-8;        // scaled simplex spread
  double tol_f = 1e-10;       // objective spread
  double init_step_rel = 0.05;  // initial simplex edge relative to box width
  int restarts = 1;           // re-seeded contractions around the incumbent
};

struct NelderMeadResult {
  Vector x;
  double f = 0.0;
  OptStatus status = OptStatus::MaxIterations;
  int iterations = 0;
  int evaluations = 0;
};

/// Derivative-free simplex minimization with box projection. Accepted
/// objective values are non-increasing; +infinity marks infeasible points.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f,
                             const Vector& x0, const Vector& lo,
                             const Vector& hi, const NelderMeadOptions& opts);

struct EstimateOptions {
  NelderMeadOptions optimizer;
  int bandwidth = -1;          // HAC lags; -1 = floor(n^{1/3})
  bool compute_covariance = false;
};

struct EstimationResult {
  Vector theta;                 // minimizer found
  Vector theta1, theta2;        // long-run / short-run views
  double loglik = 0.0;          // -2/n log likelihood at theta
  OptStatus status = OptStatus::MaxIterations;
  int iterations = 0;
  int evaluations = 0;
  int best_start = -1;
  std::optional<Matrix> cov_short_run;
  std::optional<Vector> se_short_run;
};

/// Uniform draws truth +- spread per coordinate (clipped to the box) when a
/// center is given, uniform over the box otherwise.
std::vector<Vector> make_starts(const ModelSpec& spec, int count,
                                const Vector& center, double spread,
                                RngStream& rng);

/// Minimizes the approximate quasi log-likelihood over the box from each
/// start; returns the best local minimum. Throws when the series is shorter
/// than the parameter count or every start is infeasible.
EstimationResult qml_estimate(const ModelSpec& spec,
                              const ObservationSeries& series,
                              const std::vector<Vector>& starts,
                              const EstimateOptions& opts = {});

/// Plug-in sandwich covariance for the short-run parameters:
/// Zhat = finite-difference Hessian of the likelihood in the short-run
/// coordinates, Ihat = Bartlett-weighted autocovariance sum of the
/// per-observation score contributions; returns Zhat^{-1} Ihat Zhat^{-1} / n
/// (symmetrized). se_out, when given, receives the diagonal square roots.
Matrix short_run_covariance(const ModelSpec& spec, const Vector& theta_hat,
                            const ObservationSeries& series, int bandwidth,
                            Vector* se_out = nullptr);

}  // namespace coinss
