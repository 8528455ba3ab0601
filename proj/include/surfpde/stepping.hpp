#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "surfpde/assembly.hpp"
#include "surfpde/bicgstab.hpp"
#include "surfpde/element_geometry.hpp"
#include "surfpde/errors.hpp"
#include "surfpde/mesh_sequence.hpp"
#include "surfpde/sparse.hpp"
#include "surfpde/surface_mesh.hpp"
#include "surfpde/vec3.hpp"

namespace surfpde {

/// Largest triangle diameter over the mesh; the streamline stabilization
/// weight is its square, recomputed for every frame.
inline double streamline_weight(double h_max) { return h_max * h_max; }

/// Implicit-Euler integrator for surface advection-diffusion on a moving
/// triangulation with fixed connectivity. Holds the symbolic pattern, the
/// current frame's geometry and mass matrix, and the workspace reused by
/// every step. One step from the held frame to `next_positions` solves
///
///   (M_next + tau * (D*Stiff + Adv + D*h^2*Sld)) u_next = M_held * u_held
///
/// where Adv carries the tangential relative velocity between mesh and
/// material, and Sld is the streamline stabilization. Constant functions
/// testify that the total integral of u is conserved exactly by this update.
class EsfemStepper {
public:
  EsfemStepper(std::vector<Tri> connectivity, std::vector<Vec3> initial_positions,
               double diffusivity, SolverOptions solver = {})
      : tris_(std::move(connectivity)),
        positions_(std::move(initial_positions)),
        diffusivity_(diffusivity),
        solver_(solver) {
    if (!(diffusivity_ >= 0.0))
      throw ValidationError("stepper: diffusivity must be nonnegative");
    pattern_ = FemPattern::build(static_cast<int>(positions_.size()), tris_);
    geometry_ = element_geometry(positions_, tris_);
    mass_ = assemble_mass(pattern_, geometry_);
    system_ = pattern_.make_matrix();
    next_mass_ = pattern_.make_matrix();
  }

  const FemPattern& pattern() const { return pattern_; }
  const ElementGeometry& geometry() const { return geometry_; }
  std::span<const Vec3> positions() const { return positions_; }
  std::span<const Tri> triangles() const { return tris_; }
  double diffusivity() const { return diffusivity_; }
  const SparseMatrix& mass_matrix() const { return mass_; }
  const SolveStats& last_solve() const { return last_solve_; }

  /// Advances the nodal field in place from the held frame to
  /// `next_positions` over time step `tau`. Throws NumericalError when the
  /// linear solver fails.
  void advance(std::span<const Vec3> next_positions, double tau, std::vector<double>& u) {
    if (!(tau > 0.0)) throw ValidationError("stepper: time step must be positive");
    if (next_positions.size() != positions_.size())
      throw ValidationError("stepper: vertex count changed between frames");
    if (u.size() != positions_.size())
      throw ValidationError("stepper: solution size does not match vertex count");

    const bool frame_static = std::equal(
        next_positions.begin(), next_positions.end(), positions_.begin(),
        [](const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; });

    // rhs = M_held * u_held.
    rhs_.resize(u.size());
    mass_.multiply(u, rhs_);

    if (frame_static) {
      if (!static_system_valid_ || tau != static_tau_) {
        system_.set_zero();
        add_scaled_mass(pattern_, geometry_, 1.0, system_);
        add_scaled_stiffness(pattern_, geometry_, tau * diffusivity_, system_);
        static_system_valid_ = true;
        static_tau_ = tau;
      }
    } else {
      static_system_valid_ = false;
      next_geometry_ = element_geometry(next_positions, tris_);
      velocity_.resize(positions_.size());
      const double inv_tau = 1.0 / tau;
      for (std::size_t j = 0; j < positions_.size(); ++j)
        velocity_[j] = inv_tau * (next_positions[j] - positions_[j]);
      double h_max = 0.0;
      for (std::size_t t = 0; t < tris_.size(); ++t) {
        const Tri& tri = tris_[t];
        h_max = std::max(h_max, triangle_diameter(next_positions[tri[0]],
                                                  next_positions[tri[1]],
                                                  next_positions[tri[2]]));
      }
      system_.set_zero();
      add_scaled_mass(pattern_, next_geometry_, 1.0, system_);
      add_scaled_stiffness(pattern_, next_geometry_, tau * diffusivity_, system_);
      add_scaled_advection(pattern_, next_geometry_, tris_, velocity_, tau, system_);
      add_scaled_streamline(pattern_, next_geometry_, tris_, velocity_,
                            tau * diffusivity_ * streamline_weight(h_max), system_);
    }

    SolveResult result = bicgstab(system_, rhs_, u, solver_);
    last_solve_ = result.stats;
    if (result.stats.status != SolveStatus::converged)
      throw NumericalError("implicit step: linear solver " + to_string(result.stats.status) +
                           " after " + std::to_string(result.stats.iterations) +
                           " iterations (relative residual " +
                           std::to_string(result.stats.relative_residual) + ")");
    u = std::move(result.x);

    if (!frame_static) {
      positions_.assign(next_positions.begin(), next_positions.end());
      geometry_ = std::move(next_geometry_);
      next_mass_.set_zero();
      add_scaled_mass(pattern_, geometry_, 1.0, next_mass_);
      std::swap(mass_, next_mass_);
    }
  }

private:
  std::vector<Tri> tris_;
  std::vector<Vec3> positions_;
  double diffusivity_;
  SolverOptions solver_;
  FemPattern pattern_;
  ElementGeometry geometry_;
  ElementGeometry next_geometry_;
  SparseMatrix mass_;
  SparseMatrix next_mass_;
  SparseMatrix system_;
  std::vector<Vec3> velocity_;
  std::vector<double> rhs_;
  SolveStats last_solve_;
  bool static_system_valid_ = false;
  double static_tau_ = 0.0;
};

/// Snapshot handed to run_diffusion observers after every accepted step
/// (and once for the initial state, with step == 0).
struct DiffusionSample {
  int step = 0;
  double time = 0.0;
  std::span<const double> u;
  std::span<const Vec3> positions;
  const ElementGeometry* geometry = nullptr;
};

/// Runs the implicit integrator across [t_begin, t_end] with uniform step
/// dt (the final step is shortened to land exactly on t_end). Vertex
/// positions at intermediate times come from linear interpolation of the
/// sequence frames. The observer is invoked with the initial state and
/// after every step; it may be a no-op.
template <typename Observer>
std::vector<double> run_diffusion(const MeshSequence& sequence, std::vector<double> u,
                                  double diffusivity, double dt, double t_begin, double t_end,
                                  const SolverOptions& solver, Observer&& observe) {
  if (!(dt > 0.0)) throw ValidationError("diffusion run: dt must be positive");
  if (!(t_end > t_begin)) throw ValidationError("diffusion run: empty time interval");
  if (u.size() != sequence.vertex_count())
    throw ValidationError("diffusion run: initial state size does not match mesh");

  EsfemStepper stepper(std::vector<Tri>(sequence.connectivity().begin(),
                                        sequence.connectivity().end()),
                       sequence.positions_at(t_begin), diffusivity, solver);

  const double span = t_end - t_begin;
  const int steps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9)));

  observe(DiffusionSample{0, t_begin, u, stepper.positions(), &stepper.geometry()});

  double t = t_begin;
  for (int k = 1; k <= steps; ++k) {
    double t_next = (k == steps) ? t_end : t_begin + k * dt;
    double tau = t_next - t;
    std::vector<Vec3> next = sequence.positions_at(t_next);
    try {
      stepper.advance(next, tau, u);
    } catch (const NumericalError& e) {
      throw NumericalError("diffusion run failed at step " + std::to_string(k) + " (t=" +
                           std::to_string(t_next) + "): " + e.what());
    }
    t = t_next;
    observe(DiffusionSample{k, t, u, stepper.positions(), &stepper.geometry()});
  }
  return u;
}

/// Full time history of a diffusion run.
struct DiffusionTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
};

inline DiffusionTrajectory run_diffusion_trajectory(const MeshSequence& sequence,
                                                    std::vector<double> u0, double diffusivity,
                                                    double dt, double t_begin, double t_end,
                                                    const SolverOptions& solver = {}) {
  DiffusionTrajectory traj;
  run_diffusion(sequence, std::move(u0), diffusivity, dt, t_begin, t_end, solver,
                [&](const DiffusionSample& s) {
                  traj.times.push_back(s.time);
                  traj.states.emplace_back(s.u.begin(), s.u.end());
                });
  return traj;
}

} // namespace surfpde
