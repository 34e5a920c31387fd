#include "coinss/estimate.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coinss {

std::string to_string(OptStatus s) {
  switch (s) {
    case OptStatus::Converged: return "converged";
    case OptStatus::MaxIterations: return "max-iter";
    case OptStatus::InfeasibleStart: return "infeasible-start";
  }
  return "unknown";
}

namespace {

Vector clip_to_box(const Vector& x, const Vector& lo, const Vector& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

struct Simplex {
  std::vector<Vector> x;
  std::vector<double> f;

  void sort() {
    std::vector<int> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return f[a] < f[b]; });
    std::vector<Vector> xs(x.size());
    std::vector<double> fs(x.size());
    for (size_t i = 0; i < order.size(); ++i) {
      xs[i] = x[order[i]];
      fs[i] = f[order[i]];
    }
    x.swap(xs);
    f.swap(fs);
  }
};

double safe_eval(const std::function<double(const Vector&)>& f,
                 const Vector& x, int& evals) {
  ++evals;
  const double v = f(x);
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

NelderMeadResult nelder_mead_once(const std::function<double(const Vector&)>& f,
                                  const Vector& x0, const Vector& lo,
                                  const Vector& hi,
                                  const NelderMeadOptions& opts,
                                  double init_step_rel, int& evals) {
  const int n = static_cast<int>(x0.size());
  const Vector width = hi - lo;

  // adaptive coefficients (dimension-dependent expansion/contraction)
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / n;
  const double gamma = 0.75 - 1.0 / (2.0 * n);
  const double delta = 1.0 - 1.0 / n;

  Simplex s;
  s.x.push_back(clip_to_box(x0, lo, hi));
  s.f.push_back(safe_eval(f, s.x[0], evals));
  for (int i = 0; i < n; ++i) {
    Vector xi = s.x[0];
    double step = init_step_rel * width(i);
    if (xi(i) + step > hi(i)) step = -step;
    xi(i) += step;
    s.x.push_back(clip_to_box(xi, lo, hi));
    s.f.push_back(safe_eval(f, s.x.back(), evals));
  }
  s.sort();

  NelderMeadResult res;
  res.status = OptStatus::MaxIterations;
  int iter = 0;
  while (evals < opts.max_evals) {
    ++iter;
    // convergence: scaled simplex spread and objective spread
    double spread_x = 0.0;
    for (int i = 1; i <= n; ++i) {
      double dx = 0.0;
      for (int j = 0; j < n; ++j)
        dx = std::max(dx, std::abs(s.x[i](j) - s.x[0](j)) / width(j));
      spread_x = std::max(spread_x, dx);
    }
    const double spread_f =
        std::isfinite(s.f[n]) ? s.f[n] - s.f[0]
                              : std::numeric_limits<double>::infinity();
    if (spread_x <= opts.tol_x &&
        (spread_f <= opts.tol_f ||
         (std::isinf(s.f[0]) && std::isinf(s.f[n])))) {
      res.status = OptStatus::Converged;
      break;
    }

    Vector centroid = Vector::Zero(n);
    for (int i = 0; i < n; ++i) centroid += s.x[i];
    centroid /= n;

    const Vector xr = clip_to_box(centroid + alpha * (centroid - s.x[n]), lo, hi);
    const double fr = safe_eval(f, xr, evals);
    if (fr < s.f[0]) {
      const Vector xe = clip_to_box(centroid + beta * (xr - centroid), lo, hi);
      const double fe = safe_eval(f, xe, evals);
      if (fe < fr) {
        s.x[n] = xe;
        s.f[n] = fe;
      } else {
        s.x[n] = xr;
        s.f[n] = fr;
      }
    } else if (fr < s.f[n - 1]) {
      s.x[n] = xr;
      s.f[n] = fr;
    } else {
      const bool outside = fr < s.f[n];
      const Vector base = outside ? xr : s.x[n];
      const Vector xc = clip_to_box(centroid + gamma * (base - centroid), lo, hi);
      const double fc = safe_eval(f, xc, evals);
      if (fc < (outside ? fr : s.f[n])) {
        s.x[n] = xc;
        s.f[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          s.x[i] = clip_to_box(s.x[0] + delta * (s.x[i] - s.x[0]), lo, hi);
          s.f[i] = safe_eval(f, s.x[i], evals);
        }
      }
    }
    s.sort();
  }
  s.sort();
  res.x = s.x[0];
  res.f = s.f[0];
  res.iterations = iter;
  return res;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f,
                             const Vector& x0, const Vector& lo,
                             const Vector& hi, const NelderMeadOptions& opts) {
  int evals = 0;
  NelderMeadResult best =
      nelder_mead_once(f, x0, lo, hi, opts, opts.init_step_rel, evals);
  for (int r = 0; r < opts.restarts && evals < opts.max_evals; ++r) {
    NelderMeadResult again = nelder_mead_once(
        f, best.x, lo, hi, opts, 0.2 * opts.init_step_rel, evals);
    if (again.f < best.f) {
      again.iterations += best.iterations;
      best = again;
    } else {
      best.iterations += again.iterations;
      if (again.status == OptStatus::Converged)
        best.status = OptStatus::Converged;
    }
  }
  best.evaluations = evals;
  if (!std::isfinite(best.f)) best.status = OptStatus::InfeasibleStart;
  return best;
}

std::vector<Vector> make_starts(const ModelSpec& spec, int count,
                                const Vector& center, double spread,
                                RngStream& rng) {
  std::vector<Vector> starts;
  starts.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vector x(spec.s);
    if (center.size() == spec.s) {
      for (int i = 0; i < spec.s; ++i)
        x(i) = center(i) + spread * (2.0 * rng.uniform() - 1.0);
    } else {
      for (int i = 0; i < spec.s; ++i)
        x(i) = spec.lo(i) + rng.uniform() * (spec.hi(i) - spec.lo(i));
    }
    starts.push_back(x.cwiseMax(spec.lo).cwiseMin(spec.hi));
  }
  return starts;
}

EstimationResult qml_estimate(const ModelSpec& spec,
                              const ObservationSeries& series,
                              const std::vector<Vector>& starts,
                              const EstimateOptions& opts) {
  if (series.n() < spec.s)
    throw std::invalid_argument("qml_estimate: series shorter than parameter count");
  if (starts.empty())
    throw std::invalid_argument("qml_estimate: no starts given");

  auto objective = [&](const Vector& theta) {
    return quasi_log_likelihood(spec, theta, series).value;
  };

  EstimationResult out;
  double best = std::numeric_limits<double>::infinity();
  int total_iters = 0, total_evals = 0;
  OptStatus best_status = OptStatus::InfeasibleStart;
  for (size_t i = 0; i < starts.size(); ++i) {
    NelderMeadResult r =
        nelder_mead(objective, starts[i], spec.lo, spec.hi, opts.optimizer);
    total_iters += r.iterations;
    total_evals += r.evaluations;
    if (std::isfinite(r.f) && r.f < best) {
      best = r.f;
      out.theta = r.x;
      out.best_start = static_cast<int>(i);
      best_status = r.status;
    }
  }
  if (!std::isfinite(best))
    throw std::runtime_error("qml_estimate: every start was infeasible");

  out.loglik = best;
  out.status = best_status;
  out.iterations = total_iters;
  out.evaluations = total_evals;
  const auto long_idx = spec.long_run;
  const auto short_idx = spec.short_run();
  out.theta1.resize(long_idx.size());
  for (size_t i = 0; i < long_idx.size(); ++i) out.theta1(i) = out.theta(long_idx[i]);
  out.theta2.resize(short_idx.size());
  for (size_t i = 0; i < short_idx.size(); ++i) out.theta2(i) = out.theta(short_idx[i]);

  if (opts.compute_covariance) {
    const int bw = opts.bandwidth > 0
                       ? opts.bandwidth
                       : static_cast<int>(std::floor(std::cbrt(series.n())));
    Vector se;
    out.cov_short_run = short_run_covariance(spec, out.theta, series, bw, &se);
    out.se_short_run = se;
  }
  return out;
}

Matrix short_run_covariance(const ModelSpec& spec, const Vector& theta_hat,
                            const ObservationSeries& series, int bandwidth,
                            Vector* se_out) {
  const auto short_idx = spec.short_run();
  const int s2 = static_cast<int>(short_idx.size());
  const int n = series.n();
  if (bandwidth < 0)
    bandwidth = static_cast<int>(std::floor(std::cbrt(n)));
  for (int i : short_idx) {
    if (theta_hat(i) - spec.lo(i) < 1e-6 || spec.hi(i) - theta_hat(i) < 1e-6)
      throw std::runtime_error(
          "short_run_covariance: theta_hat on a short-run box boundary");
  }

  auto eval = [&](const Vector& theta) {
    const LikelihoodValue v = quasi_log_likelihood(spec, theta, series);
    if (!v.feasible)
      throw std::runtime_error("short_run_covariance: infeasible point (" +
                               v.tag + ")");
    return v.value;
  };

  // Hessian in the short-run coordinates, central differences
  const double hrel = 1e-4;
  Vector steps(s2);
  for (int i = 0; i < s2; ++i)
    steps(i) = hrel * (1.0 + std::abs(theta_hat(short_idx[i])));
  Matrix hess(s2, s2);
  const double f0 = eval(theta_hat);
  for (int i = 0; i < s2; ++i) {
    Vector tp = theta_hat, tm = theta_hat;
    tp(short_idx[i]) += steps(i);
    tm(short_idx[i]) -= steps(i);
    hess(i, i) = (eval(tp) - 2.0 * f0 + eval(tm)) / (steps(i) * steps(i));
    for (int j = i + 1; j < s2; ++j) {
      Vector tpp = theta_hat, tpm = theta_hat, tmp = theta_hat, tmm = theta_hat;
      tpp(short_idx[i]) += steps(i); tpp(short_idx[j]) += steps(j);
      tpm(short_idx[i]) += steps(i); tpm(short_idx[j]) -= steps(j);
      tmp(short_idx[i]) -= steps(i); tmp(short_idx[j]) += steps(j);
      tmm(short_idx[i]) -= steps(i); tmm(short_idx[j]) -= steps(j);
      const double v = (eval(tpp) - eval(tpm) - eval(tmp) + eval(tmm)) /
                       (4.0 * steps(i) * steps(j));
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }

  // per-observation score contributions, central differences of the
  // per-k likelihood summand
  const double grel = 1e-5;
  Matrix scores(n, s2);
  for (int i = 0; i < s2; ++i) {
    const double step = grel * (1.0 + std::abs(theta_hat(short_idx[i])));
    Vector tp = theta_hat, tm = theta_hat;
    tp(short_idx[i]) += step;
    tm(short_idx[i]) -= step;
    const Vector lp = per_observation_terms(spec, tp, series);
    const Vector lm = per_observation_terms(spec, tm, series);
    scores.col(i) = (lp - lm) / (2.0 * step);
  }
  const Vector mean = scores.colwise().mean();
  scores.rowwise() -= mean.transpose();

  Matrix ihat = (scores.transpose() * scores) / n;
  for (int l = 1; l <= bandwidth; ++l) {
    const double w = 1.0 - static_cast<double>(l) / (bandwidth + 1.0);
    Matrix gamma = Matrix::Zero(s2, s2);
    for (int k = 0; k + l < n; ++k)
      gamma += scores.row(k).transpose() * scores.row(k + l);
    gamma /= n;
    ihat += w * (gamma + gamma.transpose());
  }

  Eigen::FullPivLU<Matrix> lu(hess);
  if (!lu.isInvertible())
    throw std::runtime_error(
        "short_run_covariance: Hessian numerically singular");
  const Matrix hinv = lu.inverse();
  Matrix cov = hinv * ihat * hinv / n;
  cov = 0.5 * (cov + cov.transpose()).eval();
  if (se_out) {
    se_out->resize(s2);
    for (int i = 0; i < s2; ++i)
      (*se_out)(i) = std::sqrt(std::max(0.0, cov(i, i)));
  }
  return cov;
}

}  // namespace coinss
