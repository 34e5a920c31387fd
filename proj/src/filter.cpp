#include "coinss/filter.hpp"

#include <cmath>
#include <limits>

namespace coinss {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Hot path of every likelihood evaluation: the steady-state recursion with
// fixed dimensions so Eigen can unroll the small products.
template <int N, int D>
double accumulate_quadforms_fixed(const Matrix& f_dyn, const Matrix& k_dyn,
                                  const Matrix& c_dyn, const Matrix& vinv_dyn,
                                  const Matrix& y, Vector& quad) {
  using MatN = Eigen::Matrix<double, N, N>;
  using MatND = Eigen::Matrix<double, N, D>;
  using MatDN = Eigen::Matrix<double, D, N>;
  using MatD = Eigen::Matrix<double, D, D>;
  using VecN = Eigen::Matrix<double, N, 1>;
  using VecD = Eigen::Matrix<double, D, 1>;
  const MatN f = f_dyn;
  const MatND k = k_dyn;
  const MatDN c = c_dyn;
  const MatD vinv = vinv_dyn;
  const int n = static_cast<int>(y.rows());
  VecN x = VecN::Zero();
  VecD e, yprev;
  double total = 0.0;
  for (int t = 0; t < n; ++t) {
    if (t > 0) {
      yprev = y.row(t - 1).transpose();
      x = (f * x + k * yprev).eval();
    }
    e = y.row(t).transpose() - c * x;
    const double q = e.dot(vinv * e);
    quad(t) = q;
    total += q;
  }
  return total;
}

double accumulate_quadforms(const DiscreteFilter& f, const Matrix& c,
                            const Matrix& y, const Vector& x1, Vector& quad) {
  const int n = static_cast<int>(y.rows());
  const int nn = static_cast<int>(f.F.rows());
  const int d = static_cast<int>(c.rows());
  const bool zero_init = x1.size() == 0 || x1.isZero(0.0);
  if (zero_init) {
    if (nn == 4 && d == 2)
      return accumulate_quadforms_fixed<4, 2>(f.F, f.K, c, f.V_inv, y, quad);
    if (nn == 6 && d == 3)
      return accumulate_quadforms_fixed<6, 3>(f.F, f.K, c, f.V_inv, y, quad);
    if (nn == 3 && d == 2)
      return accumulate_quadforms_fixed<3, 2>(f.F, f.K, c, f.V_inv, y, quad);
    if (nn == 1 && d == 1)
      return accumulate_quadforms_fixed<1, 1>(f.F, f.K, c, f.V_inv, y, quad);
  }
  Vector x = zero_init ? Vector::Zero(nn) : x1;
  Vector e(d);
  double total = 0.0;
  for (int t = 0; t < n; ++t) {
    if (t > 0) x = (f.F * x + f.K * y.row(t - 1).transpose()).eval();
    e = y.row(t).transpose() - c * x;
    const double q = e.dot(f.V_inv * e);
    quad(t) = q;
    total += q;
  }
  return total;
}

}  // namespace

LikelihoodValue LikelihoodValue::infeasible_value(const std::string& tag,
                                                  int n) {
  LikelihoodValue v;
  v.value = std::numeric_limits<double>::infinity();
  v.n = n;
  v.feasible = false;
  v.tag = tag;
  return v;
}

InnovationSeries pseudo_innovations(const DiscreteFilter& f, const Matrix& c,
                                    const ObservationSeries& series,
                                    const Vector& x1_init) {
  const int n = series.n();
  const int nn = static_cast<int>(f.F.rows());
  const int d = static_cast<int>(c.rows());
  if (series.d() != d)
    throw std::invalid_argument("pseudo_innovations: dimension mismatch");
  if (std::abs(series.h - f.h) > 1e-12 * std::max(1.0, f.h))
    throw std::invalid_argument("pseudo_innovations: series step != filter step");
  Vector x = x1_init.size() == 0 ? Vector::Zero(nn) : Vector(x1_init);
  if (x.size() != nn)
    throw std::invalid_argument("pseudo_innovations: bad initial state");

  InnovationSeries out;
  out.eps.resize(n, d);
  out.xhat.resize(n, nn);
  for (int t = 0; t < n; ++t) {
    if (t > 0) x = (f.F * x + f.K * series.Y.row(t - 1).transpose()).eval();
    out.xhat.row(t) = x.transpose();
    out.eps.row(t) = series.Y.row(t) - (c * x).transpose();
  }
  return out;
}

LikelihoodValue quasi_log_likelihood(const ModelSpec& spec, const Vector& theta,
                                     const ObservationSeries& series) {
  const int n = series.n();
  if (n < 2) return LikelihoodValue::infeasible_value("series too short", n);
  if (!spec.in_box(theta))
    return LikelihoodValue::infeasible_value("theta outside box", n);

  StateSpaceRealization r;
  DiscreteFilter f;
  try {
    r = build_realization(spec, theta);
    f = discretize(r, series.h);
  } catch (const std::exception& ex) {
    return LikelihoodValue::infeasible_value(ex.what(), n);
  }
  if (series.d() != r.d)
    return LikelihoodValue::infeasible_value("series dimension mismatch", n);

  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(f.V, Eigen::EigenvaluesOnly);
    const double vmax = es.eigenvalues().maxCoeff();
    if (!(vmax > 0.0) || es.eigenvalues().minCoeff() < 1e-12 * vmax)
      return LikelihoodValue::infeasible_value("V near singular", n);
  }

  LikelihoodValue out;
  out.n = n;
  out.quad_forms.resize(n);
  const double qsum =
      accumulate_quadforms(f, r.C, series.Y, Vector(), out.quad_forms);
  out.value = r.d * kLog2Pi + f.logdet_V + qsum / n;
  if (!std::isfinite(out.value))
    return LikelihoodValue::infeasible_value("non-finite likelihood", n);
  return out;
}

Vector per_observation_terms(const ModelSpec& spec, const Vector& theta,
                             const ObservationSeries& series) {
  LikelihoodValue v = quasi_log_likelihood(spec, theta, series);
  if (!v.feasible)
    throw std::runtime_error("per_observation_terms: infeasible theta (" +
                             v.tag + ")");
  const double offset = v.value - v.quad_forms.sum() / v.n;
  return (v.quad_forms.array() + offset).matrix();
}

LikelihoodSplit likelihood_decomposition(const ModelSpec& spec,
                                         const Vector& theta,
                                         const Vector& theta_ref,
                                         const ObservationSeries& series) {
  if (theta.size() != spec.s || theta_ref.size() != spec.s)
    throw std::invalid_argument("likelihood_decomposition: bad theta size");
  for (int i : spec.short_run())
    if (theta(i) != theta_ref(i))
      throw std::invalid_argument(
          "likelihood_decomposition: theta_ref must share the short-run "
          "coordinates");
  const LikelihoodValue full = quasi_log_likelihood(spec, theta, series);
  const LikelihoodValue ref = quasi_log_likelihood(spec, theta_ref, series);
  LikelihoodSplit out;
  out.l2 = ref.value;
  out.l1 = full.value - ref.value;
  return out;
}

}  // namespace coinss
