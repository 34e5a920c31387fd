#pragma once

#include <optional>
#include <string>

#include "coinss/model.hpp"
#include "coinss/simulate.hpp"
#include "coinss/types.hpp"

namespace coinss {

/// Pseudo-innovations and filtered states from the steady-state recursion
///   Xhat_k = F Xhat_{k-1} + K Y_{k-1},  eps_k = Y_k - C Xhat_k.
struct InnovationSeries {
  Matrix eps;    // n x d
  Matrix xhat;   // n x N
};

struct LikelihoodValue {
  double value = 0.0;  // -2/n log pseudo-Gaussian likelihood
  int n = 0;
  Vector quad_forms;   // eps_k^T V^{-1} eps_k per observation
  bool feasible = true;
  std::string tag;     // diagnostic when infeasible

  static LikelihoodValue infeasible_value(const std::string& tag, int n);
};

InnovationSeries pseudo_innovations(const DiscreteFilter& f, const Matrix& c,
                                    const ObservationSeries& series,
                                    const Vector& x1_init = Vector());

/// Evaluates the approximate quasi log-likelihood
///   (1/n) sum_k [ d log 2 pi + log det V + eps_k^T V^{-1} eps_k ]
/// at theta. Any upstream failure (box, structural assumption, Riccati,
/// near-singular V) yields +infinity with a diagnostic tag instead of an
/// exception, so optimizers treat infeasible points as infinitely bad.
LikelihoodValue quasi_log_likelihood(const ModelSpec& spec, const Vector& theta,
                                     const ObservationSeries& series);

/// Per-observation likelihood terms l_k = d log 2 pi + log det V + quad_k
/// (used by the score autocovariance estimator). Throws on infeasible theta.
Vector per_observation_terms(const ModelSpec& spec, const Vector& theta,
                             const ObservationSeries& series);

/// Likelihood split: L_{n,1} = L_n(theta_1, theta_2) - L_n(theta_1_ref,
/// theta_2) and L_{n,2} = L_n(theta_1_ref, theta_2). theta_ref must share
/// the short-run coordinates of theta.
struct LikelihoodSplit {
  double l1 = 0.0;
  double l2 = 0.0;
  double total() const { return l1 + l2; }
};
LikelihoodSplit likelihood_decomposition(const ModelSpec& spec,
                                         const Vector& theta,
                                         const Vector& theta_ref,
                                         const ObservationSeries& series);

}  // namespace coinss
