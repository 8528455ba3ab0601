#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "surfpde/assembly.hpp"
#include "surfpde/bicgstab.hpp"
#include "surfpde/element_geometry.hpp"
#include "surfpde/errors.hpp"
#include "surfpde/levenberg_marquardt.hpp"
#include "surfpde/mesh_sequence.hpp"
#include "surfpde/stepping.hpp"
#include "surfpde/surface_mesh.hpp"
#include "surfpde/vec3.hpp"

namespace surfpde {

/// Spherical region of interest. A non-positive radius requests the default:
/// one quarter of the mesh bounding-sphere radius at the bleach frame.
struct RoiSpec {
  Vec3 center{0.25, 0.25, 0.25};
  double radius = 0.0;
};

/// How triangles qualify as ROI members.
enum class RoiRule {
  barycenter,   // triangle barycenter inside the ball
  all_vertices, // every vertex of the triangle inside the ball
};

/// How the ROI follows the moving mesh. `frozen_elements` selects the member
/// triangles once at the bleach frame and keeps that set while the mesh
/// carries them along; `fixed_ball` re-selects against the static ball at
/// every sample time.
enum class RoiTracking { frozen_elements, fixed_ball };

inline RoiRule roi_rule_from_string(const std::string& s) {
  if (s == "barycenter") return RoiRule::barycenter;
  if (s == "all_vertices") return RoiRule::all_vertices;
  throw ValidationError("unknown roi rule '" + s + "' (expected barycenter or all_vertices)");
}

inline RoiTracking roi_tracking_from_string(const std::string& s) {
  if (s == "frozen_elements") return RoiTracking::frozen_elements;
  if (s == "fixed_ball") return RoiTracking::fixed_ball;
  throw ValidationError("unknown roi tracking '" + s +
                        "' (expected frozen_elements or fixed_ball)");
}

inline std::string to_string(RoiRule r) {
  return r == RoiRule::barycenter ? "barycenter" : "all_vertices";
}
inline std::string to_string(RoiTracking t) {
  return t == RoiTracking::frozen_elements ? "frozen_elements" : "fixed_ball";
}

struct FrapConfig {
  /// Diffusivity in squared length units per second (0.05 um^2/s matches a
  /// literature value of 5e-10 cm^2/s for membrane-bound protein).
  double diffusivity = 0.05;
  double dt = 0.04;
  /// Simulated recovery span after the bleach, seconds.
  double duration = 12.0;
  /// Only samples with (t - bleach time) <= fit_window enter the fit.
  double fit_window = 12.0;
  /// Absolute sequence time of the bleach; NaN selects the sequence start.
  double start_time = std::numeric_limits<double>::quiet_NaN();
  RoiSpec roi;
  RoiRule rule = RoiRule::barycenter;
  RoiTracking tracking = RoiTracking::frozen_elements;
  SolverOptions solver;
};

/// Triangles belonging to the ball-shaped ROI under the given rule.
inline std::vector<int> roi_elements(std::span<const Vec3> positions,
                                     std::span<const Tri> triangles, const Vec3& center,
                                     double radius, RoiRule rule = RoiRule::barycenter) {
  std::vector<int> out;
  const double r2 = radius * radius;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Tri& tri = triangles[t];
    bool in = false;
    if (rule == RoiRule::barycenter) {
      Vec3 b = (positions[tri[0]] + positions[tri[1]] + positions[tri[2]]) / 3.0;
      in = (b - center).squared_norm() < r2;
    } else {
      in = (positions[tri[0]] - center).squared_norm() < r2 &&
           (positions[tri[1]] - center).squared_norm() < r2 &&
           (positions[tri[2]] - center).squared_norm() < r2;
    }
    if (in) out.push_back(static_cast<int>(t));
  }
  return out;
}

/// Post-bleach state: concentration 0 at vertices strictly inside the ball,
/// ambient concentration 1 everywhere else.
inline std::vector<double> bleach_initial(std::span<const Vec3> positions, const Vec3& center,
                                          double radius) {
  std::vector<double> u(positions.size(), 1.0);
  const double r2 = radius * radius;
  for (std::size_t j = 0; j < positions.size(); ++j)
    if ((positions[j] - center).squared_norm() < r2) u[j] = 0.0;
  return u;
}

struct RoiMean {
  double mean = 0.0;
  double area = 0.0;
};

/// Area-weighted mean of a nodal field over a set of triangles: each
/// triangle contributes its area times its vertex average.
inline RoiMean mean_concentration(std::span<const Tri> triangles, const ElementGeometry& geom,
                                  std::span<const int> elements, std::span<const double> u) {
  double mass = 0.0, area = 0.0;
  for (int t : elements) {
    const Tri& tri = triangles[t];
    const double a = geom.areas[t];
    mass += a * (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
    area += a;
  }
  if (!(area > 0.0)) throw ValidationError("roi mean: selected region has zero area");
  return {mass / area, area};
}

/// Fits the saturating-exponential recovery model A * (1 - exp(-t/B)) to
/// (time since bleach, ROI mean) samples no later than `window`. Initial
/// guesses: A from the last sample; B from the first time the signal crosses
/// A*(1 - 1/e), falling back to half the sampled window. Flat or
/// near-constant signals are reported as non-converged without running the
/// optimizer.
inline FitResult recovery_fit(std::span<const double> all_times,
                              std::span<const double> all_means,
                              double fit_window = std::numeric_limits<double>::infinity()) {
  if (all_times.size() != all_means.size()) throw ValidationError("recovery fit: size mismatch");
  std::vector<double> times_v, means_v;
  times_v.reserve(all_times.size());
  means_v.reserve(all_means.size());
  for (std::size_t i = 0; i < all_times.size(); ++i) {
    if (all_times[i] <= fit_window + 1e-12) {
      times_v.push_back(all_times[i]);
      means_v.push_back(all_means[i]);
    }
  }
  std::span<const double> times = times_v, means = means_v;
  if (times.size() < 3)
    throw ValidationError("recovery fit: need at least 3 samples inside the window");

  const double a0 = means.back();
  double lo = means[0], hi = means[0];
  for (double v : means) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double window = times.back() - times.front();

  double b0 = window / 2.0;
  const double threshold = a0 * (1.0 - 1.0 / std::numbers::e_v<double>);
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (means[i] >= threshold && times[i] > 0.0) {
      b0 = times[i];
      break;
    }
  }
  b0 = std::max(b0, 1e-9 * std::max(window, 1.0));

  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi)) || !(a0 > 0.0)) {
    FitResult degenerate;
    degenerate.params = {a0, b0};
    degenerate.rss = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
      double r = means[i] - a0;
      degenerate.rss += r * r;
    }
    degenerate.converged = false;
    return degenerate;
  }

  auto model = [](double t, std::span<const double> q) {
    return q[0] * (1.0 - std::exp(-t / q[1]));
  };
  const double init[2] = {a0, b0};
  return levenberg_marquardt(model, times, means, init);
}

/// Half-recovery time of the fitted model.
inline double half_time(const FitResult& fit) {
  if (fit.params.size() < 2) return 0.0;
  return fit.params[1] * std::numbers::ln2_v<double>;
}

struct FrapResult {
  /// Seconds since the bleach for each sample (first entry 0).
  std::vector<double> times;
  std::vector<double> means;
  std::vector<double> roi_areas;
  /// ROI member triangles at the bleach frame.
  std::vector<int> roi;
  double roi_radius = 0.0;
  /// Fraction of the initial total tracer mass removed by the bleach.
  double bleached_area_fraction = 0.0;
  /// params = {A, B} of the recovery model A * (1 - exp(-t/B)).
  FitResult fit;
  double t_half = 0.0;
  double bleach_time = 0.0;
  std::vector<std::string> warnings;
};

/// Simulates a bleach-and-recovery experiment on the given mesh sequence:
/// zeroes the field inside the ROI ball at the bleach frame, integrates the
/// surface diffusion forward, records the ROI mean at every step, and fits
/// the recovery curve.
inline FrapResult run_frap(const MeshSequence& sequence, const FrapConfig& config) {
  if (!(config.duration > 0.0)) throw ValidationError("frap: duration must be positive");
  if (!(config.dt > 0.0)) throw ValidationError("frap: dt must be positive");
  if (!(config.fit_window > 0.0)) throw ValidationError("frap: fit window must be positive");
  if (config.fit_window > config.duration + 1e-12)
    throw ValidationError("frap: fit window exceeds the simulated duration");

  FrapResult out;
  out.bleach_time =
      std::isnan(config.start_time) ? sequence.start_time() : config.start_time;
  const double t_end = out.bleach_time + config.duration;
  if (!sequence.is_static() &&
      (out.bleach_time < sequence.start_time() || t_end > sequence.end_time() + 1e-12))
    throw ValidationError("frap: requested window [" + std::to_string(out.bleach_time) + ", " +
                          std::to_string(t_end) + "] leaves the recorded sequence span");

  std::vector<Vec3> start_positions = sequence.positions_at(out.bleach_time);
  const std::span<const Tri> tris = sequence.connectivity();

  const double bounding_radius = bounding_sphere_radius(start_positions);
  out.roi_radius = config.roi.radius;
  if (!(out.roi_radius > 0.0)) {
    out.roi_radius = 0.25 * bounding_radius;
    if (!(out.roi_radius > 0.0)) throw ValidationError("frap: degenerate mesh extent");
  }
  if (out.roi_radius > 0.5 * bounding_radius)
    out.warnings.push_back("roi radius " + std::to_string(out.roi_radius) +
                           " exceeds half the mesh bounding radius " +
                           std::to_string(bounding_radius));

  out.roi = roi_elements(start_positions, tris, config.roi.center, out.roi_radius, config.rule);
  if (out.roi.empty()) {
    // Fall back to the single triangle nearest the requested center so tiny
    // radii still produce a measurable signal.
    ElementGeometry geom0 = element_geometry(start_positions, tris);
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < tris.size(); ++t) {
      Vec3 b = (start_positions[tris[t][0]] + start_positions[tris[t][1]] +
                start_positions[tris[t][2]]) /
               3.0;
      double d2 = (b - config.roi.center).squared_norm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(t);
      }
    }
    out.roi = {best};
    out.warnings.push_back("roi radius " + std::to_string(out.roi_radius) +
                           " matched no triangles; using the nearest triangle instead");
  }

  std::vector<double> u0 = bleach_initial(start_positions, config.roi.center, out.roi_radius);
  {
    ElementGeometry geom0 = element_geometry(start_positions, tris);
    double total = integrate(tris, geom0, u0);
    std::vector<double> ones(u0.size(), 1.0);
    double whole = integrate(tris, geom0, ones);
    out.bleached_area_fraction = 1.0 - total / whole;
  }

  run_diffusion(
      sequence, std::move(u0), config.diffusivity, config.dt, out.bleach_time, t_end,
      config.solver, [&](const DiffusionSample& s) {
        std::vector<int> members;
        std::span<const int> active = out.roi;
        if (config.tracking == RoiTracking::fixed_ball) {
          members = roi_elements(s.positions, tris, config.roi.center, out.roi_radius,
                                 config.rule);
          if (members.empty()) members = out.roi;
          active = members;
        }
        RoiMean m = mean_concentration(tris, *s.geometry, active, s.u);
        out.times.push_back(s.time - out.bleach_time);
        out.means.push_back(m.mean);
        out.roi_areas.push_back(m.area);
      });

  try {
    out.fit = recovery_fit(out.times, out.means, config.fit_window);
    if (!out.fit.converged)
      out.warnings.push_back("recovery fit did not converge; reported parameters are the best "
                             "iterate");
  } catch (const ValidationError& e) {
    out.warnings.push_back(std::string("recovery fit skipped: ") + e.what());
  }
  out.t_half = half_time(out.fit);
  return out;
}

} // namespace surfpde
