#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/sparse.hpp"

namespace surfpde {

enum class Preconditioner { none, jacobi };

enum class SolveStatus { converged, max_iterations, breakdown };

inline std::string to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::converged: return "converged";
  case SolveStatus::max_iterations: return "max_iterations";
  case SolveStatus::breakdown: return "breakdown";
  }
  return "unknown";
}

struct SolverOptions {
  /// Convergence is declared when ||b - A x|| <= rel_tol * ||b||.
  double rel_tol = 1e-10;
  /// 0 selects the default budget of 10 * n iterations.
  int max_iterations = 0;
  Preconditioner preconditioner = Preconditioner::jacobi;
};

struct SolveStats {
  SolveStatus status = SolveStatus::converged;
  int iterations = 0;
  /// ||b - A x|| / ||b|| recomputed from the returned solution.
  double relative_residual = 0.0;
};

struct SolveResult {
  std::vector<double> x;
  SolveStats stats;
};

namespace detail {

inline double dot_vec(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_vec(std::span<const double> a) { return std::sqrt(dot_vec(a, a)); }

} // namespace detail

/// Right-preconditioned BiCGStab for square sparse systems. `x0` seeds the
/// iteration (warm start); pass an empty span to start from zero. Breakdown
/// (vanishing inner products) and non-convergence are reported via the stats
/// rather than thrown, so callers can decide how to escalate.
inline SolveResult bicgstab(const SparseMatrix& a, std::span<const double> b,
                            std::span<const double> x0 = {},
                            const SolverOptions& opts = {}) {
  if (a.rows() != a.cols()) throw ValidationError("bicgstab: matrix must be square");
  const int n = a.rows();
  if (static_cast<int>(b.size()) != n) throw ValidationError("bicgstab: rhs size mismatch");
  if (!x0.empty() && static_cast<int>(x0.size()) != n)
    throw ValidationError("bicgstab: initial guess size mismatch");
  if (!(opts.rel_tol > 0.0)) throw ValidationError("bicgstab: rel_tol must be positive");

  SolveResult out;
  out.x.assign(n, 0.0);
  if (!x0.empty()) out.x.assign(x0.begin(), x0.end());

  const double bnorm = detail::norm_vec(b);
  if (bnorm == 0.0) {
    out.x.assign(n, 0.0);
    out.stats = {SolveStatus::converged, 0, 0.0};
    return out;
  }

  std::vector<double> inv_diag;
  if (opts.preconditioner == Preconditioner::jacobi) {
    inv_diag = a.diagonal();
    for (double& d : inv_diag) d = (d != 0.0 && std::isfinite(d)) ? 1.0 / d : 1.0;
  }
  auto apply_precond = [&](const std::vector<double>& v, std::vector<double>& out_v) {
    if (inv_diag.empty()) {
      out_v = v;
    } else {
      out_v.resize(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) out_v[i] = inv_diag[i] * v[i];
    }
  };

  const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 10 * n;
  const double tol_abs = opts.rel_tol * bnorm;

  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), phat(n), shat(n), s(n), t(n), ax(n);
  a.multiply(out.x, r);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  r0 = r;

  double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
  double res_norm = detail::norm_vec(r);
  int it = 0;
  SolveStatus status = res_norm <= tol_abs ? SolveStatus::converged : SolveStatus::max_iterations;

  const double breakdown_tol = 1e-300;
  while (res_norm > tol_abs && it < max_it) {
    ++it;
    double rho = detail::dot_vec(r0, r);
    if (std::abs(rho) < breakdown_tol) {
      status = SolveStatus::breakdown;
      break;
    }
    if (it == 1) {
      p = r;
    } else {
      double beta = (rho / rho_prev) * (alpha / omega);
      for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    apply_precond(p, phat);
    a.multiply(phat, v);
    double r0v = detail::dot_vec(r0, v);
    if (std::abs(r0v) < breakdown_tol) {
      status = SolveStatus::breakdown;
      break;
    }
    alpha = rho / r0v;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (detail::norm_vec(s) <= tol_abs) {
      for (int i = 0; i < n; ++i) out.x[i] += alpha * phat[i];
      res_norm = detail::norm_vec(s);
      status = SolveStatus::converged;
      rho_prev = rho;
      break;
    }
    apply_precond(s, shat);
    a.multiply(shat, t);
    double tt = detail::dot_vec(t, t);
    if (tt < breakdown_tol) {
      status = SolveStatus::breakdown;
      break;
    }
    omega = detail::dot_vec(t, s) / tt;
    if (std::abs(omega) < breakdown_tol) {
      status = SolveStatus::breakdown;
      break;
    }
    for (int i = 0; i < n; ++i) {
      out.x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
    res_norm = detail::norm_vec(r);
    if (res_norm <= tol_abs) status = SolveStatus::converged;
    rho_prev = rho;
    if (!std::isfinite(res_norm)) {
      status = SolveStatus::breakdown;
      break;
    }
  }
  if (status != SolveStatus::breakdown)
    status = res_norm <= tol_abs ? SolveStatus::converged : SolveStatus::max_iterations;

  // Recompute the true residual from the returned iterate so the reported
  // figure cannot drift from the recurrence.
  a.multiply(out.x, ax);
  for (int i = 0; i < n; ++i) ax[i] = b[i] - ax[i];
  double true_res = detail::norm_vec(ax) / bnorm;
  if (status == SolveStatus::converged && !(true_res <= 10.0 * opts.rel_tol) &&
      true_res > opts.rel_tol) {
    status = SolveStatus::max_iterations;
  }

  out.stats.status = status;
  out.stats.iterations = it;
  out.stats.relative_residual = true_res;
  return out;
}

/// Convenience wrapper that throws NumericalError unless the solve converged.
inline std::vector<double> solve_or_throw(const SparseMatrix& a, std::span<const double> b,
                                          std::span<const double> x0 = {},
                                          const SolverOptions& opts = {},
                                          const std::string& context = "linear solve") {
  SolveResult r = bicgstab(a, b, x0, opts);
  if (r.stats.status != SolveStatus::converged)
    throw NumericalError(context + ": " + to_string(r.stats.status) + " after " +
                         std::to_string(r.stats.iterations) +
                         " iterations (relative residual " +
                         std::to_string(r.stats.relative_residual) + ")");
  return std::move(r.x);
}

} // namespace surfpde
