#pragma once

#include <Eigen/Cholesky>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coinss/matfun.hpp"
#include "coinss/types.hpp"

namespace coinss {

/// Concrete matrices of a cointegrated linear state space model with the
/// block structure A = diag(0_{c x c}, A2), B = (B1; B2), C = (C1, C2).
struct StateSpaceRealization {
  int d = 0, c = 0, N = 0, m = 0;
  Matrix A2;       // (N-c) x (N-c), eigenvalues in the open left half plane
  Matrix B1;       // c x m, rank c
  Matrix B2;       // (N-c) x m
  Matrix C1;       // d x c, rank c
  Matrix C2;       // d x (N-c)
  Matrix SigmaL;   // m x m SPD driving-noise covariance
  Matrix A, B, C;  // assembled blocks
  Matrix C1perp;   // d x (d-c), lower triangular orthonormal complement
};

/// Sampled-model filter objects at step h.
struct DiscreteFilter {
  double h = 0.0;
  Matrix Phi;      // e^{A h}
  Matrix Sigma_h;  // state noise covariance over one step
  Matrix Omega;    // Riccati solution
  Matrix K;        // steady-state gain, N x d
  Matrix V;        // innovation covariance C Omega C^T, d x d SPD
  Matrix F;        // Phi - K C, strictly Schur stable
  Matrix Pi;       // error-correction loading, d x d, rank d-c
  std::vector<Matrix> k_coeff;  // k_1..k_J, |k_J| <= 1e-12
  double rho_F = 0.0;
  double logdet_V = 0.0;
  Matrix V_inv;
};

/// A parametric model family: dimensions, box bounds, long-run/short-run
/// index split and the map theta -> matrices.
struct ModelSpec {
  std::string name;
  int d = 0, c = 0, N = 0, m = 0;
  int s = 0;
  std::vector<int> long_run;  // indices into theta that parameterize C1
  Vector lo, hi;              // box bounds, lo < hi elementwise
  std::function<void(const Vector&, StateSpaceRealization&)> fill;
  bool allow_a2_unit_roots = false;  // restricted spaces with forced trends
  Vector theta_true;                 // empty when unknown

  std::vector<int> short_run() const;
  bool in_box(const Vector& theta) const;
};

/// Model catalog. "canonical2d" is the 13-parameter bivariate family,
/// "canonical3d" the 28-parameter trivariate family; the remaining entries
/// are restricted / degenerate companions used by tests and the
/// misspecification study.
ModelSpec make_canonical2d();
ModelSpec make_canonical3d();
ModelSpec make_car1();
ModelSpec make_canonical2d_fixed_c1();   // C1 frozen at (0,1)^T, 12 params
ModelSpec make_canonical2d_stationary(); // c = 0 companion, 10 params
ModelSpec make_canonical2d_integrated(); // extra unit root in the A2 block
ModelSpec model_by_name(const std::string& name);

/// Builds the matrices without validity gating (used by assumption checks).
StateSpaceRealization build_matrices(const ModelSpec& spec, const Vector& theta);

/// Builds and validates a realization: box membership, A4 (stable A2 block),
/// A3 (SPD Sigma_L), A6 (ranks of B1, C1), A9 (rank of C). Throws naming the
/// violated assumption.
StateSpaceRealization build_realization(const ModelSpec& spec,
                                        const Vector& theta);

/// Discretizes at step h: Phi, Sigma(h), the Riccati solution, gain,
/// innovation covariance, Pi = C (I-F)^{-1} K - I and the truncated filter
/// coefficients k_j = C F^j (I-F)^{-1} K. Checks the Kalman-Bertram
/// criterion for (A, h) first.
DiscreteFilter discretize(const StateSpaceRealization& r, double h);

struct AssumptionEntry {
  std::string name;
  bool passed = false;
  std::map<std::string, double> measured;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionEntry> entries;
  bool all_passed() const;
  const AssumptionEntry* find(const std::string& name) const;
};

/// Numeric verification of the model assumptions at theta:
///   A4   eigenvalues of A2 strictly in the left half plane
///   A6   rank B1 = rank C1 = c
///   A9   rank C = d
///   A10  no two eigenvalues of A differ by 2 pi i k / h
///   E    finite-difference Jacobian of theta_1 -> vec(C1perp(theta_1)^T C1)
///        has full column rank s1
///   F    smallest j0 <= j_max with rank(grad_theta2 psi_{theta,j0}) = s2,
///        psi stacking vec(C K), vec(C F K), ..., vec(C F^j K), vec(V)
/// plus an informational lower-bound scan for the identifiability constant.
/// Failures are report entries, never exceptions.
AssumptionReport check_assumptions(const ModelSpec& spec, const Vector& theta,
                                   double h, int j_max = 20);

/// Loads a user-defined spec from key-value config text (see README for the
/// schema): dimensions, box, and per-entry parameter maps for each matrix.
ModelSpec load_model_spec(const std::map<std::string, std::string>& kv);

}  // namespace coinss
