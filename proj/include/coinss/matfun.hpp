#pragma once

#include <stdexcept>
#include <string>

#include "coinss/types.hpp"

namespace coinss::matfun {

/// Thrown when the Riccati iteration cannot produce an acceptable solution.
struct DareError : std::runtime_error {
  double last_residual;
  int iterations;
  DareError(const std::string& msg, double residual, int iters)
      : std::runtime_error(msg), last_residual(residual), iterations(iters) {}
};

/// Matrix exponential e^M.
/// Accurate to ~1e-12 relative for moderate norms (scaling-and-squaring with
/// a Pade approximant underneath). Rejects non-finite input and norms large
/// enough to overflow double.
Matrix matrix_exponential(const Matrix& m);

/// Sigma(h) = int_0^h e^{Au} B SigmaL B^T e^{A^T u} du via the van Loan
/// block-exponential identity. Result is symmetrized and checked PSD.
Matrix noise_covariance_integral(const Matrix& a, const Matrix& b,
                                 const Matrix& sigma_l, double h);

struct DareOptions {
  double step_tol = 1e-13;       // Frobenius change between iterates
  int max_iterations = 100000;
  double residual_tol = 1e-10;   // scaled by (1 + |Omega|)
  double damping = 1.0;          // 1 = plain fixed point
};

struct DareSolution {
  Matrix omega;
  int iterations = 0;
  double residual = 0.0;
};

/// Solves Omega = Phi Omega Phi^T
///               - Phi Omega C^T (C Omega C^T)^{-1} C Omega Phi^T + Sigma
/// by fixed-point iteration from Omega_0 = Sigma (the filter covariance
/// recursion). Requires C of full row rank and a well-conditioned innovation
/// covariance at every iterate; verifies the residual contract and that the
/// closed-loop matrix Phi - K C is strictly Schur stable.
DareSolution solve_dare(const Matrix& phi, const Matrix& c,
                        const Matrix& sigma, const DareOptions& opts = {});

/// The unique lower-triangular d x (d-c) matrix N with N^T N = I and
/// N^T C1 = 0, sign-fixed so the first nonzero entry of each column is
/// positive. For c = 0 returns the identity.
Matrix lower_triangular_orthocomplement(const Matrix& c1);

/// max |lambda_i(M)| over the (possibly complex) spectrum.
double spectral_radius(const Matrix& m);

/// Symmetrizes M and verifies it is PSD up to tolerance; throws naming
/// `what` otherwise. Returns the symmetrized matrix.
Matrix require_spsd(const Matrix& m, const std::string& what,
                    double sym_tol = 1e-12, double eig_tol = 1e-10);

/// X with A X + X A^T + Q = 0 (A Hurwitz), i.e. int_0^inf e^{Au} Q e^{A^T u} du.
Matrix solve_lyapunov_continuous(const Matrix& a, const Matrix& q);

/// X with X = T X T^T + Q (T Schur stable).
Matrix solve_lyapunov_discrete(const Matrix& t, const Matrix& q);

}  // namespace coinss::matfun
