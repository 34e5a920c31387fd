#include "coinss/matfun.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace coinss::matfun {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(what) + ": matrix must be square");
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace

Matrix matrix_exponential(const Matrix& m) {
  require_square(m, "matrix_exponential");
  require_finite(m, "matrix_exponential");
  if (m.norm() > 700.0)
    throw std::overflow_error("matrix_exponential: norm too large");
  Matrix e = m.exp();
  if (!e.allFinite())
    throw std::overflow_error("matrix_exponential: result overflowed");
  return e;
}

Matrix noise_covariance_integral(const Matrix& a, const Matrix& b,
                                 const Matrix& sigma_l, double h) {
  require_square(a, "noise_covariance_integral");
  require_finite(a, "noise_covariance_integral");
  require_finite(b, "noise_covariance_integral");
  if (h <= 0.0)
    throw std::invalid_argument("noise_covariance_integral: h must be > 0");
  if (b.rows() != a.rows() || sigma_l.rows() != b.cols())
    throw std::invalid_argument("noise_covariance_integral: dimension mismatch");
  const Matrix sl = require_spsd(sigma_l, "Sigma_L");

  const Index n = a.rows();
  const Matrix q = b * sl * b.transpose();

  // van Loan: exp(h * [-A Q; 0 A^T]) = [* G; 0 e^{A^T h}],
  // Sigma(h) = e^{A h} G.
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -a;
  block.topRightCorner(n, n) = q;
  block.bottomRightCorner(n, n) = a.transpose();
  const Matrix e = matrix_exponential(block * h);
  const Matrix sigma =
      e.bottomRightCorner(n, n).transpose() * e.topRightCorner(n, n);
  return require_spsd(sigma, "Sigma^(h)");
}

DareSolution solve_dare(const Matrix& phi, const Matrix& c,
                        const Matrix& sigma, const DareOptions& opts) {
  require_square(phi, "solve_dare");
  const Index n = phi.rows();
  const Index d = c.rows();
  if (c.cols() != n || sigma.rows() != n || sigma.cols() != n)
    throw std::invalid_argument("solve_dare: dimension mismatch");
  if (d > n) throw std::invalid_argument("solve_dare: more outputs than states");
  {
    Eigen::JacobiSVD<Matrix> svd(c);
    if (svd.singularValues()(d - 1) <= 1e-12 * svd.singularValues()(0))
      throw std::invalid_argument("solve_dare: C is not of full row rank");
  }
  const Matrix sig = require_spsd(sigma, "solve_dare: Sigma");

  Matrix omega = sig;
  Matrix v(d, d), gain(n, d), next(n, n);
  double change = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    v.noalias() = c * omega * c.transpose();
    v = 0.5 * (v + v.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(v, Eigen::EigenvaluesOnly);
    const double vmax = es.eigenvalues().maxCoeff();
    if (!(vmax > 0.0) || es.eigenvalues().minCoeff() <= 1e-13 * vmax)
      throw DareError("solve_dare: C Omega C^T numerically singular", change,
                      iter);
    const Matrix pc = omega * c.transpose();           // N x d
    gain.noalias() = pc * v.llt().solve(Matrix::Identity(d, d));
    next.noalias() = phi * (omega - gain * pc.transpose()) * phi.transpose();
    next += sig;
    next = 0.5 * (next + next.transpose()).eval();
    if (opts.damping != 1.0)
      next = opts.damping * next + (1.0 - opts.damping) * omega;
    change = (next - omega).norm();
    omega = next;
    if (change <= opts.step_tol * std::max(1.0, omega.norm())) break;
  }

  // residual of the fixed point actually reached
  const Matrix v_final = 0.5 * ((c * omega * c.transpose()) +
                                (c * omega * c.transpose()).transpose());
  const Matrix k =
      phi * omega * c.transpose() * v_final.llt().solve(Matrix::Identity(d, d));
  const Matrix rhs = phi * omega * phi.transpose() -
                     k * (c * omega * phi.transpose()) + sig;
  const double residual = (omega - rhs).norm();
  if (iter >= opts.max_iterations)
    throw DareError("solve_dare: no convergence within max_iterations",
                    residual, iter);
  if (residual > opts.residual_tol * (1.0 + omega.norm()))
    throw DareError("solve_dare: residual above tolerance", residual, iter);
  const double rho = spectral_radius(phi - k * c);
  if (!(rho < 1.0))
    throw DareError("solve_dare: closed loop not Schur stable (rho(F) = " +
                        std::to_string(rho) + ")",
                    residual, iter);
  return {omega, iter + 1, residual};
}

Matrix lower_triangular_orthocomplement(const Matrix& c1) {
  const Index d = c1.rows();
  const Index c = c1.cols();
  if (c > d)
    throw std::invalid_argument("orthocomplement: C1 has more columns than rows");
  if (c == 0) return Matrix::Identity(d, d);
  {
    Eigen::JacobiSVD<Matrix> svd(c1);
    if (svd.singularValues()(c - 1) <= 1e-12 * svd.singularValues()(0))
      throw std::invalid_argument("orthocomplement: C1 is rank deficient");
  }
  const Index r = d - c;
  Matrix out = Matrix::Zero(d, r);
  // Columns are determined back to front: column j must be orthogonal to C1
  // and to all later columns, and carries zeros in rows 1..j-1. Each step
  // leaves a one-dimensional kernel, which makes the triangular form unique.
  for (Index j = r; j >= 1; --j) {
    const Index rows = c + (j - 1) + (r - j);
    Matrix g(rows, d);
    g.topRows(c) = c1.transpose();
    for (Index i = 0; i < j - 1; ++i) {
      g.row(c + i).setZero();
      g(c + i, i) = 1.0;
    }
    for (Index i = j; i < r; ++i)
      g.row(c + (j - 1) + (i - j)) = out.col(i).transpose();
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullV);
    if (rows >= 1 && svd.singularValues()(rows - 1) <=
                         1e-10 * std::max(svd.singularValues()(0), 1.0))
      throw std::invalid_argument(
          "orthocomplement: triangular complement not unique");
    Vector v = svd.matrixV().col(d - 1);
    for (Index i = 0; i < d; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0.0) v = -v;
        break;
      }
    }
    out.col(j - 1) = v;
  }
  return out;
}

double spectral_radius(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix require_spsd(const Matrix& m, const std::string& what, double sym_tol,
                    double eig_tol) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(what + ": not square");
  if (!m.allFinite()) throw std::invalid_argument(what + ": non-finite");
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > sym_tol * scale * 10.0)
    throw std::invalid_argument(what + ": not symmetric");
  Matrix s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -eig_tol * scale)
    throw std::invalid_argument(what + ": not positive semidefinite");
  return s;
}

Matrix solve_lyapunov_continuous(const Matrix& a, const Matrix& q) {
  const Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n)
    throw std::invalid_argument("lyapunov: dimension mismatch");
  // vec form: (I (x) A + A (x) I) vec X = -vec Q
  Matrix big = Matrix::Zero(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    big.block(i * n, i * n, n, n) += a;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) big(j * n + k, i * n + k) += a(j, i);
  Vector rhs(n * n);
  for (Index j = 0; j < n; ++j) rhs.segment(j * n, n) = -q.col(j);
  Vector x = big.partialPivLu().solve(rhs);
  Matrix out(n, n);
  for (Index j = 0; j < n; ++j) out.col(j) = x.segment(j * n, n);
  return 0.5 * (out + out.transpose());
}

Matrix solve_lyapunov_discrete(const Matrix& t, const Matrix& q) {
  const Index n = t.rows();
  if (t.cols() != n || q.rows() != n || q.cols() != n)
    throw std::invalid_argument("lyapunov: dimension mismatch");
  // (I - T (x) T) vec X = vec Q
  Matrix big = Matrix::Identity(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      big.block(j * n, i * n, n, n) -= t(j, i) * t;
  Vector rhs(n * n);
  for (Index j = 0; j < n; ++j) rhs.segment(j * n, n) = q.col(j);
  Vector x = big.partialPivLu().solve(rhs);
  Matrix out(n, n);
  for (Index j = 0; j < n; ++j) out.col(j) = x.segment(j * n, n);
  return 0.5 * (out + out.transpose());
}

}  // namespace coinss::matfun
