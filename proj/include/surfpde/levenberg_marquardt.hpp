#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "surfpde/errors.hpp"

namespace surfpde {

namespace detail {

/// Solves the small dense system A x = b in place by Gaussian elimination
/// with partial pivoting. Returns false when the matrix is numerically
/// singular. Intended for the handful-of-parameters normal equations.
inline bool dense_solve_inplace(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a[col * n + col]);
    for (int r = col + 1; r < n; ++r) {
      double cand = std::abs(a[r * n + col]);
      if (cand > best) {
        best = cand;
        pivot = r;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
      std::swap(b[pivot], b[col]);
    }
    double inv = 1.0 / a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
  return true;
}

/// Inverts a small dense symmetric positive matrix; returns an empty vector
/// when singular.
inline std::vector<double> dense_inverse(std::vector<double> a, int n) {
  std::vector<double> inv(n * n, 0.0);
  for (int col = 0; col < n; ++col) {
    std::vector<double> acopy = a;
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    if (!dense_solve_inplace(acopy, e, n)) return {};
    for (int r = 0; r < n; ++r) inv[r * n + col] = e[r];
  }
  return inv;
}

} // namespace detail

/// Outcome of a nonlinear least-squares fit.
struct FitResult {
  std::vector<double> params;
  /// Asymptotic one-sigma parameter uncertainties; empty when the normal
  /// matrix was singular or there are no spare degrees of freedom.
  std::vector<double> stderrs;
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Residual sum of squares after each accepted step (starting value first).
  std::vector<double> cost_trace;
};

/// Levenberg-Marquardt for models y = f(t, params). The Jacobian is taken by
/// central finite differences. Damping multiplies the normal-matrix diagonal:
/// (J^T J + lambda diag(J^T J)) delta = J^T r. Rejected steps raise lambda
/// tenfold, accepted steps lower it tenfold; iteration stops when the
/// relative parameter change drops below 1e-10 or after `max_iterations`.
inline FitResult levenberg_marquardt(
    const std::function<double(double, std::span<const double>)>& model,
    std::span<const double> ts, std::span<const double> ys,
    std::span<const double> initial, int max_iterations = 200) {
  const int n = static_cast<int>(ts.size());
  const int p = static_cast<int>(initial.size());
  if (ys.size() != ts.size()) throw ValidationError("fit: sample size mismatch");
  if (p == 0) throw ValidationError("fit: no parameters");
  if (n < p) throw ValidationError("fit: fewer samples than parameters");

  std::vector<double> params(initial.begin(), initial.end());

  auto residuals = [&](std::span<const double> q, std::vector<double>& r) {
    r.resize(n);
    for (int i = 0; i < n; ++i) r[i] = ys[i] - model(ts[i], q);
  };
  auto rss_of = [&](const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  };

  std::vector<double> r;
  residuals(params, r);
  double rss = rss_of(r);

  FitResult out;
  out.cost_trace.push_back(rss);

  std::vector<double> jac(static_cast<std::size_t>(n) * p);
  std::vector<double> jtj(static_cast<std::size_t>(p) * p);
  std::vector<double> jtr(p);
  std::vector<double> trial(p), r_trial;

  double lambda = 1e-3;
  int it = 0;
  bool converged = false;

  for (; it < max_iterations; ++it) {
    // Central-difference Jacobian of the model at the current parameters.
    for (int k = 0; k < p; ++k) {
      double h = 1e-7 * std::max(1.0, std::abs(params[k]));
      std::vector<double> qp(params), qm(params);
      qp[k] += h;
      qm[k] -= h;
      for (int i = 0; i < n; ++i)
        jac[static_cast<std::size_t>(i) * p + k] =
            (model(ts[i], qp) - model(ts[i], qm)) / (2.0 * h);
    }
    for (int a = 0; a < p; ++a) {
      jtr[a] = 0.0;
      for (int b = 0; b <= a; ++b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          s += jac[static_cast<std::size_t>(i) * p + a] * jac[static_cast<std::size_t>(i) * p + b];
        jtj[static_cast<std::size_t>(a) * p + b] = s;
        jtj[static_cast<std::size_t>(b) * p + a] = s;
      }
      for (int i = 0; i < n; ++i) jtr[a] += jac[static_cast<std::size_t>(i) * p + a] * r[i];
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 32 && !accepted; ++attempt) {
      std::vector<double> lhs = jtj;
      for (int a = 0; a < p; ++a)
        lhs[static_cast<std::size_t>(a) * p + a] += lambda * jtj[static_cast<std::size_t>(a) * p + a];
      std::vector<double> delta = jtr;
      if (!detail::dense_solve_inplace(lhs, delta, p)) {
        lambda *= 10.0;
        continue;
      }
      for (int a = 0; a < p; ++a) trial[a] = params[a] + delta[a];
      residuals(trial, r_trial);
      double rss_trial = rss_of(r_trial);
      if (std::isfinite(rss_trial) && rss_trial <= rss) {
        double rel_change = 0.0;
        for (int a = 0; a < p; ++a) {
          double scale = std::max(1e-300, std::abs(params[a]));
          rel_change = std::max(rel_change, std::abs(delta[a]) / scale);
        }
        params = trial;
        r = r_trial;
        rss = rss_trial;
        out.cost_trace.push_back(rss);
        lambda = std::max(lambda * 0.1, 1e-300);
        accepted = true;
        if (rel_change < 1e-10) converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {
      // The damping climbed without producing a downhill step: local minimum.
      converged = true;
    }
    if (converged) {
      ++it;
      break;
    }
  }

  out.params = params;
  out.rss = rss;
  out.iterations = it;
  out.converged = converged;

  if (n > p) {
    // Fresh J^T J at the solution for the covariance estimate.
    for (int k = 0; k < p; ++k) {
      double h = 1e-7 * std::max(1.0, std::abs(params[k]));
      std::vector<double> qp(params), qm(params);
      qp[k] += h;
      qm[k] -= h;
      for (int i = 0; i < n; ++i)
        jac[static_cast<std::size_t>(i) * p + k] =
            (model(ts[i], qp) - model(ts[i], qm)) / (2.0 * h);
    }
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          s += jac[static_cast<std::size_t>(i) * p + a] * jac[static_cast<std::size_t>(i) * p + b];
        jtj[static_cast<std::size_t>(a) * p + b] = s;
      }
    std::vector<double> inv = detail::dense_inverse(jtj, p);
    if (!inv.empty()) {
      double variance = rss / static_cast<double>(n - p);
      out.stderrs.resize(p);
      for (int a = 0; a < p; ++a) {
        double d = inv[static_cast<std::size_t>(a) * p + a];
        out.stderrs[a] = d > 0.0 ? std::sqrt(variance * d) : 0.0;
      }
    }
  }
  return out;
}

} // namespace surfpde
