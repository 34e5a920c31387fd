#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "coinss/levy.hpp"
#include "coinss/model.hpp"
#include "coinss/types.hpp"

namespace coinss {

/// Equidistant d-variate observations Y(kh), k = 1..n (the t = 0 sample is
/// dropped).
struct ObservationSeries {
  double h = 1.0;
  Matrix Y;  // n x d
  // provenance
  std::uint64_t seed = 0;
  std::string scheme;
  double euler_dt = 0.0;

  int n() const { return static_cast<int>(Y.rows()); }
  int d() const { return static_cast<int>(Y.cols()); }
};

struct EulerOptions {
  double T = 2000.0;
  double euler_dt = 0.01;
  double h = 1.0;
  double burn_in = 0.0;  // seconds discarded before recording starts
};

/// Euler scheme for dX = A X dt + B dL on the fine grid, sampled at
/// distance h. Requires euler_dt to divide h and h to divide T, and the
/// config covariance to match the realization's Sigma_L to 1e-8.
ObservationSeries simulate_euler(const StateSpaceRealization& r,
                                 const LevyConfig& cfg,
                                 const EulerOptions& opts, RngStream& rng);

struct ExactGaussianOptions {
  bool stationary_init = true;  // draw the stationary block from its law
};

/// Exact discrete-time simulation for Brownian drivers:
/// X_k = e^{Ah} X_{k-1} + xi_k with xi_k ~ N(0, Sigma(h)) iid.
ObservationSeries simulate_exact_gaussian(const StateSpaceRealization& r,
                                          double h, int n, RngStream& rng,
                                          const ExactGaussianOptions& opts = {});

/// CSV persistence: header "k,y1,...,yd", one row per observation; the
/// sidecar (path + ".meta") records h, seed, scheme and euler_dt.
void write_series_csv(const ObservationSeries& series, const std::string& path);
ObservationSeries read_series_csv(const std::string& path);

}  // namespace coinss
