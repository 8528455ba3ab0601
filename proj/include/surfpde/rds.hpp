#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "surfpde/assembly.hpp"
#include "surfpde/bicgstab.hpp"
#include "surfpde/element_geometry.hpp"
#include "surfpde/errors.hpp"
#include "surfpde/mesh_sequence.hpp"
#include "surfpde/stepping.hpp"
#include "surfpde/surface_mesh.hpp"
#include "surfpde/vec3.hpp"

namespace surfpde {

/// Activator-depleted substrate kinetics
///   f(u, w) = gamma * (a - u + u^2 w)   (activator u)
///   g(u, w) = gamma * (b - u^2 w)       (substrate w)
/// with substrate diffusing faster than activator in pattern-forming regimes.
struct SchnakenbergParams {
  double d_u = 1.0;
  double d_w = 10.0;
  double gamma = 200.0;
  double a = 0.1;
  double b = 0.9;
};

struct SteadyState {
  double u = 0.0;
  double w = 0.0;
};

/// Spatially uniform equilibrium of the kinetics: u* = a + b,
/// w* = b / (a + b)^2; both reaction terms vanish there identically.
inline SteadyState steady_state(const SchnakenbergParams& p) {
  const double s = p.a + p.b;
  if (!(s > 0.0)) throw ValidationError("steady state requires a + b > 0");
  return {s, p.b / (s * s)};
}

namespace detail {

/// Deterministic uniform draw on [0, 1) built from the generator's raw bits,
/// so results are identical across platforms and standard libraries.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform on [-1, 1].
inline double uniform_pm1(std::mt19937_64& gen) { return 2.0 * uniform01(gen) - 1.0; }

} // namespace detail

/// Initial data u_j = u*(1 + amplitude*xi_j), w_j = w*(1 + amplitude*eta_j)
/// with xi, eta i.i.d. uniform on [-1, 1] from the seeded generator (all u
/// draws first, then all w draws).
inline std::pair<std::vector<double>, std::vector<double>>
perturbed_initial(std::size_t vertex_count, const SchnakenbergParams& params, double amplitude,
                  std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 1.0))
    throw ValidationError("perturbation amplitude must lie in [0, 1)");
  SteadyState s = steady_state(params);
  std::mt19937_64 gen(seed);
  std::vector<double> u(vertex_count), w(vertex_count);
  for (std::size_t j = 0; j < vertex_count; ++j)
    u[j] = s.u * (1.0 + amplitude * detail::uniform_pm1(gen));
  for (std::size_t j = 0; j < vertex_count; ++j)
    w[j] = s.w * (1.0 + amplitude * detail::uniform_pm1(gen));
  return {std::move(u), std::move(w)};
}

/// Implicit-Euler integrator for the coupled two-species system on a moving
/// triangulation. Each step linearizes the kinetics about the previous
/// state (first-order Taylor expansion) and solves one monolithic 2J x 2J
/// block system: the scalar transport operator of each species on the
/// diagonal, mass-weighted linearized kinetics coupling all four blocks.
class RdsStepper {
public:
  RdsStepper(std::vector<Tri> connectivity, std::vector<Vec3> initial_positions,
             SchnakenbergParams params, SolverOptions solver = {})
      : tris_(std::move(connectivity)),
        positions_(std::move(initial_positions)),
        params_(params),
        solver_(solver) {
    if (!(params_.d_u >= 0.0) || !(params_.d_w >= 0.0) || !(params_.gamma >= 0.0))
      throw ValidationError("kinetics parameters must be nonnegative");
    pattern_ = FemPattern::build(static_cast<int>(positions_.size()), tris_);
    geometry_ = element_geometry(positions_, tris_);
    mass_ = assemble_mass(pattern_, geometry_);
    mass_prev_ = mass_;

    const int big_n = 2 * vertex_count();
    std::vector<std::vector<int>> cols(big_n);
    const auto& skel = pattern_.skeleton();
    for (int j = 0; j < vertex_count(); ++j) {
      auto row = skel.row_columns(j);
      std::vector<int>& c0 = cols[j];
      std::vector<int>& c1 = cols[vertex_count() + j];
      c0.reserve(2 * row.size());
      for (int k : row) c0.push_back(k);
      for (int k : row) c0.push_back(vertex_count() + k);
      c1 = c0;
    }
    big_ = SparseMatrix::from_pattern(big_n, big_n, std::move(cols));

    // For row j, the block-0 columns occupy the first half of the big row in
    // the same order as the scalar pattern's row, and the block-1 columns the
    // second half; precompute the four block slots per scalar nonzero.
    const auto& fem_ptr = skel.row_offsets();
    const auto& big_ptr = big_.row_offsets();
    const std::size_t fem_nnz = skel.nnz();
    slot00_.resize(fem_nnz);
    slot01_.resize(fem_nnz);
    slot10_.resize(fem_nnz);
    slot11_.resize(fem_nnz);
    for (int j = 0; j < vertex_count(); ++j) {
      const int len = fem_ptr[j + 1] - fem_ptr[j];
      for (int k = 0; k < len; ++k) {
        const int e = fem_ptr[j] + k;
        slot00_[e] = big_ptr[j] + k;
        slot01_[e] = big_ptr[j] + len + k;
        slot10_[e] = big_ptr[vertex_count() + j] + k;
        slot11_[e] = big_ptr[vertex_count() + j] + len + k;
      }
    }
    base_vals_.assign(big_.nnz(), 0.0);
  }

  int vertex_count() const { return static_cast<int>(positions_.size()); }
  const FemPattern& pattern() const { return pattern_; }
  const ElementGeometry& geometry() const { return geometry_; }
  const SparseMatrix& mass_matrix() const { return mass_; }
  std::span<const Vec3> positions() const { return positions_; }
  std::span<const Tri> triangles() const { return tris_; }
  const SolveStats& last_solve() const { return last_solve_; }

  /// One linearized implicit step from the held frame to `next_positions`;
  /// updates u and w in place.
  void advance(std::span<const Vec3> next_positions, double tau, std::vector<double>& u,
               std::vector<double>& w) {
    const int n = vertex_count();
    if (!(tau > 0.0)) throw ValidationError("rds step: time step must be positive");
    if (static_cast<int>(next_positions.size()) != n)
      throw ValidationError("rds step: vertex count changed between frames");
    if (static_cast<int>(u.size()) != n || static_cast<int>(w.size()) != n)
      throw ValidationError("rds step: field size does not match vertex count");

    const bool frame_static = std::equal(
        next_positions.begin(), next_positions.end(), positions_.begin(),
        [](const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; });

    if (!frame_static) {
      base_valid_ = false;
      mass_prev_ = mass_;
      geometry_ = element_geometry(next_positions, tris_);
      velocity_.resize(positions_.size());
      const double inv_tau = 1.0 / tau;
      for (std::size_t j = 0; j < positions_.size(); ++j)
        velocity_[j] = inv_tau * (next_positions[j] - positions_[j]);
      positions_.assign(next_positions.begin(), next_positions.end());
      mass_.set_zero();
      add_scaled_mass(pattern_, geometry_, 1.0, mass_);
    }

    if (!base_valid_ || tau != base_tau_) {
      rebuild_base(tau, frame_static);
      base_valid_ = frame_static; // a moving frame invalidates the cache again
      base_tau_ = tau;
    }

    // Start from the kinetics-free operator and subtract the linearized
    // coupling: block (species_row, species_col) -= tau * M * diag(partial).
    auto& vals = big_.values();
    std::copy(base_vals_.begin(), base_vals_.end(), vals.begin());

    const double g = params_.gamma;
    f0_.resize(n);
    fu_.resize(n);
    fw_.resize(n);
    g0_.resize(n);
    gu_.resize(n);
    gw_.resize(n);
    for (int j = 0; j < n; ++j) {
      const double uj = u[j], wj = w[j];
      f0_[j] = g * (params_.a - uj + uj * uj * wj);
      fu_[j] = g * (-1.0 + 2.0 * uj * wj);
      fw_[j] = g * uj * uj;
      g0_[j] = g * (params_.b - uj * uj * wj);
      gu_[j] = -2.0 * g * uj * wj;
      gw_[j] = -g * uj * uj;
    }

    const auto& fem_ptr = pattern_.skeleton().row_offsets();
    const auto& fem_col = pattern_.skeleton().column_indices();
    const auto& mvals = mass_.values();
    for (int j = 0; j < n; ++j) {
      for (int e = fem_ptr[j]; e < fem_ptr[j + 1]; ++e) {
        const double tm = tau * mvals[e];
        const int k = fem_col[e];
        vals[slot00_[e]] -= tm * fu_[k];
        vals[slot01_[e]] -= tm * fw_[k];
        vals[slot10_[e]] -= tm * gu_[k];
        vals[slot11_[e]] -= tm * gw_[k];
      }
    }

    // rhs_u = M_prev u + tau M (f0 - fu u - fw w); likewise for w.
    rhs_.resize(2 * n);
    su_.resize(n);
    sw_.resize(n);
    for (int j = 0; j < n; ++j) {
      su_[j] = f0_[j] - fu_[j] * u[j] - fw_[j] * w[j];
      sw_[j] = g0_[j] - gu_[j] * u[j] - gw_[j] * w[j];
    }
    tmp_.resize(n);
    mass_prev_.multiply(u, tmp_);
    for (int j = 0; j < n; ++j) rhs_[j] = tmp_[j];
    mass_.multiply(su_, tmp_);
    for (int j = 0; j < n; ++j) rhs_[j] += tau * tmp_[j];
    mass_prev_.multiply(w, tmp_);
    for (int j = 0; j < n; ++j) rhs_[n + j] = tmp_[j];
    mass_.multiply(sw_, tmp_);
    for (int j = 0; j < n; ++j) rhs_[n + j] += tau * tmp_[j];

    x0_.resize(2 * n);
    std::copy(u.begin(), u.end(), x0_.begin());
    std::copy(w.begin(), w.end(), x0_.begin() + n);

    SolveResult result = bicgstab(big_, rhs_, x0_, solver_);
    last_solve_ = result.stats;
    if (result.stats.status != SolveStatus::converged)
      throw NumericalError("rds step: linear solver " + to_string(result.stats.status) +
                           " after " + std::to_string(result.stats.iterations) +
                           " iterations (relative residual " +
                           std::to_string(result.stats.relative_residual) + ")");

    std::copy(result.x.begin(), result.x.begin() + n, u.begin());
    std::copy(result.x.begin() + n, result.x.end(), w.begin());

    if (!frame_static) mass_prev_ = mass_;
  }

private:
  void rebuild_base(double tau, bool frame_static) {
    scratch_u_ = pattern_.make_matrix();
    scratch_w_ = pattern_.make_matrix();
    add_scaled_mass(pattern_, geometry_, 1.0, scratch_u_);
    add_scaled_stiffness(pattern_, geometry_, tau * params_.d_u, scratch_u_);
    add_scaled_mass(pattern_, geometry_, 1.0, scratch_w_);
    add_scaled_stiffness(pattern_, geometry_, tau * params_.d_w, scratch_w_);
    if (!frame_static) {
      double h_max = 0.0;
      for (std::size_t t = 0; t < tris_.size(); ++t) {
        const Tri& tri = tris_[t];
        h_max = std::max(h_max, triangle_diameter(positions_[tri[0]], positions_[tri[1]],
                                                  positions_[tri[2]]));
      }
      const double gh = streamline_weight(h_max);
      add_scaled_advection(pattern_, geometry_, tris_, velocity_, tau, scratch_u_);
      add_scaled_streamline(pattern_, geometry_, tris_, velocity_, tau * params_.d_u * gh,
                            scratch_u_);
      add_scaled_advection(pattern_, geometry_, tris_, velocity_, tau, scratch_w_);
      add_scaled_streamline(pattern_, geometry_, tris_, velocity_, tau * params_.d_w * gh,
                            scratch_w_);
    }
    std::fill(base_vals_.begin(), base_vals_.end(), 0.0);
    const auto& fem_ptr = pattern_.skeleton().row_offsets();
    const auto& uvals = scratch_u_.values();
    const auto& wvals = scratch_w_.values();
    for (int j = 0; j < vertex_count(); ++j) {
      for (int e = fem_ptr[j]; e < fem_ptr[j + 1]; ++e) {
        base_vals_[slot00_[e]] = uvals[e];
        base_vals_[slot11_[e]] = wvals[e];
      }
    }
  }

  std::vector<Tri> tris_;
  std::vector<Vec3> positions_;
  SchnakenbergParams params_;
  SolverOptions solver_;
  FemPattern pattern_;
  ElementGeometry geometry_;
  SparseMatrix mass_, mass_prev_;
  SparseMatrix big_;
  SparseMatrix scratch_u_, scratch_w_;
  std::vector<int> slot00_, slot01_, slot10_, slot11_;
  std::vector<double> base_vals_;
  std::vector<Vec3> velocity_;
  std::vector<double> f0_, fu_, fw_, g0_, gu_, gw_, su_, sw_;
  std::vector<double> rhs_, x0_, tmp_;
  SolveStats last_solve_;
  bool base_valid_ = false;
  double base_tau_ = 0.0;
};

/// Single linearized implicit step between two explicit frames; convenience
/// wrapper over RdsStepper for tests and one-off use.
inline void rds_step(std::span<const Tri> connectivity, std::span<const Vec3> prev_positions,
                     std::span<const Vec3> curr_positions, double tau,
                     const SchnakenbergParams& params, std::vector<double>& u,
                     std::vector<double>& w, const SolverOptions& solver = {}) {
  RdsStepper stepper(std::vector<Tri>(connectivity.begin(), connectivity.end()),
                     std::vector<Vec3>(prev_positions.begin(), prev_positions.end()), params,
                     solver);
  stepper.advance(curr_positions, tau, u, w);
}

struct RdsConfig {
  SchnakenbergParams params;
  double dt = 1e-4;
  /// Simulation-time spacing between consecutive mesh frames; positions are
  /// interpolated linearly inside each interval.
  double swap_interval = 1.0;
  double t_end = 70.0;
  /// Relative amplitude of the random initial perturbation.
  double perturbation = 0.1;
  std::uint64_t seed = 42;
  double snapshot_interval = 10.0;
  double stats_interval = 1.0;
  SolverOptions solver;
};

/// Area-weighted spatial statistics of one nodal field.
struct FieldStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
};

struct RdsStats {
  double time = 0.0;
  FieldStats u;
  FieldStats w;
};

struct RdsSnapshot {
  int index = 0;
  double time = 0.0;
  std::vector<Vec3> positions;
  std::vector<double> u;
  std::vector<double> w;
};

struct RdsRunResult {
  SteadyState steady;
  std::vector<RdsStats> stats;
  std::vector<double> snapshot_times;
  std::vector<double> u;
  std::vector<double> w;
};

namespace detail {

inline FieldStats field_stats(const SparseMatrix& mass, std::span<const double> field,
                              std::vector<double>& scratch) {
  FieldStats s;
  s.min = s.max = field.empty() ? 0.0 : field[0];
  for (double v : field) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  scratch.resize(field.size());
  mass.multiply(field, scratch);
  double mass_total = 0.0, quad = 0.0, area = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    mass_total += scratch[j];
    quad += scratch[j] * field[j];
  }
  std::vector<double> ones(field.size(), 1.0);
  mass.multiply(ones, scratch);
  for (double v : scratch) area += v;
  s.mean = mass_total / area;
  double var = quad / area - s.mean * s.mean;
  s.std_dev = var > 0.0 ? std::sqrt(var) : 0.0;
  return s;
}

} // namespace detail

/// Runs the pattern-formation experiment: perturbed steady-state start,
/// implicit time loop with the configured dt, frames re-timed so consecutive
/// mesh frames are `swap_interval` apart (static sequences run as-is).
/// Statistics are recorded every stats_interval; `on_snapshot` is invoked at
/// every snapshot_interval and at the final time.
template <typename SnapshotFn>
RdsRunResult run_rds(const MeshSequence& sequence, const RdsConfig& config,
                     SnapshotFn&& on_snapshot) {
  if (!(config.dt > 0.0)) throw ValidationError("rds run: dt must be positive");
  if (!(config.swap_interval >= config.dt))
    throw ValidationError("rds run: swap interval must be at least dt");
  if (!(config.t_end > 0.0)) throw ValidationError("rds run: end time must be positive");
  if (!(config.snapshot_interval > 0.0) || !(config.stats_interval > 0.0))
    throw ValidationError("rds run: sampling intervals must be positive");

  // Map recorded frames onto simulation time: frame i sits at i*swap_interval.
  const MeshSequence* seq = &sequence;
  MeshSequence retimed;
  if (!sequence.is_static()) {
    const double covered = (sequence.frame_count() - 1) * config.swap_interval;
    if (covered + 1e-12 < config.t_end)
      throw ValidationError("rds run: sequence supplies " + std::to_string(covered) +
                            " time units but t_end is " + std::to_string(config.t_end));
    std::vector<SurfaceMesh> frames;
    frames.reserve(sequence.frame_count());
    for (std::size_t i = 0; i < sequence.frame_count(); ++i) {
      SurfaceMesh m = sequence.frame(i);
      m.frame_time = static_cast<double>(i) * config.swap_interval;
      frames.push_back(std::move(m));
    }
    retimed = MeshSequence::from_frames(std::move(frames), /*validate_first=*/false);
    seq = &retimed;
  }

  RdsRunResult out;
  out.steady = steady_state(config.params);
  auto [u, w] = perturbed_initial(seq->vertex_count(), config.params, config.perturbation,
                                  config.seed);

  RdsStepper stepper(std::vector<Tri>(seq->connectivity().begin(), seq->connectivity().end()),
                     seq->positions_at(0.0), config.params, config.solver);

  std::vector<double> scratch;
  auto record_stats = [&](double t) {
    RdsStats s;
    s.time = t;
    s.u = detail::field_stats(stepper.mass_matrix(), u, scratch);
    s.w = detail::field_stats(stepper.mass_matrix(), w, scratch);
    out.stats.push_back(s);
  };
  int snapshot_index = 0;
  auto emit_snapshot = [&](double t) {
    RdsSnapshot snap;
    snap.index = snapshot_index++;
    snap.time = t;
    snap.positions.assign(stepper.positions().begin(), stepper.positions().end());
    snap.u = u;
    snap.w = w;
    out.snapshot_times.push_back(t);
    on_snapshot(snap);
  };

  record_stats(0.0);
  emit_snapshot(0.0);

  const int steps = std::max(1, static_cast<int>(std::ceil(config.t_end / config.dt - 1e-9)));
  double next_stats = config.stats_interval;
  double next_snapshot = config.snapshot_interval;
  const double time_tol = 0.5 * config.dt;

  double t = 0.0;
  for (int k = 1; k <= steps; ++k) {
    const double t_next = (k == steps) ? config.t_end : k * config.dt;
    const double tau = t_next - t;
    std::vector<Vec3> next = seq->positions_at(std::min(t_next, seq->end_time()));
    try {
      stepper.advance(next, tau, u, w);
    } catch (const NumericalError& e) {
      throw NumericalError("rds run failed at step " + std::to_string(k) + " (t=" +
                           std::to_string(t_next) + "): " + e.what());
    }
    t = t_next;
    if (t + time_tol >= next_stats || k == steps) {
      record_stats(t);
      while (next_stats <= t + time_tol) next_stats += config.stats_interval;
    }
    if (t + time_tol >= next_snapshot || k == steps) {
      emit_snapshot(t);
      while (next_snapshot <= t + time_tol) next_snapshot += config.snapshot_interval;
    }
  }

  out.u = std::move(u);
  out.w = std::move(w);
  return out;
}

inline RdsRunResult run_rds(const MeshSequence& sequence, const RdsConfig& config) {
  return run_rds(sequence, config, [](const RdsSnapshot&) {});
}

} // namespace surfpde
