#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/mesh_sequence.hpp"
#include "surfpde/surface_mesh.hpp"

namespace surfpde {

/// Regular icosahedron with vertices on the unit sphere, outward faces.
inline SurfaceMesh icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  const double s = 1.0 / std::sqrt(1.0 + t * t);
  SurfaceMesh mesh;
  mesh.vertices = {
      {-s, t * s, 0},  {s, t * s, 0},  {-s, -t * s, 0}, {s, -t * s, 0},
      {0, -s, t * s},  {0, s, t * s},  {0, -s, -t * s}, {0, s, -t * s},
      {t * s, 0, -s},  {t * s, 0, s},  {-t * s, 0, -s}, {-t * s, 0, s},
  };
  mesh.triangles = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  return mesh;
}

/// Unit icosphere: icosahedron subdivided the given number of times, every
/// subdivision splitting each triangle into four with new vertices projected
/// back onto the sphere. Level k has 20*4^k triangles and 2+10*4^k vertices.
inline SurfaceMesh icosphere(int subdivisions, double radius = 1.0) {
  if (subdivisions < 0) throw ValidationError("icosphere: subdivisions must be >= 0");
  if (!(radius > 0.0)) throw ValidationError("icosphere: radius must be positive");
  SurfaceMesh mesh = icosahedron();
  for (int level = 0; level < subdivisions; ++level) {
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(mesh.triangles.size() * 2);
    auto midpoint_index = [&](int a, int b) {
      std::uint64_t lo = static_cast<std::uint64_t>(std::min(a, b));
      std::uint64_t hi = static_cast<std::uint64_t>(std::max(a, b));
      std::uint64_t key = (lo << 32) | hi;
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = ((mesh.vertices[a] + mesh.vertices[b]) * 0.5).normalized();
      int idx = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(m);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Tri> next;
    next.reserve(mesh.triangles.size() * 4);
    for (const Tri& tri : mesh.triangles) {
      int m01 = midpoint_index(tri[0], tri[1]);
      int m12 = midpoint_index(tri[1], tri[2]);
      int m20 = midpoint_index(tri[2], tri[0]);
      next.push_back({tri[0], m01, m20});
      next.push_back({tri[1], m12, m01});
      next.push_back({tri[2], m20, m12});
      next.push_back({m01, m12, m20});
    }
    mesh.triangles = std::move(next);
  }
  if (radius != 1.0) {
    for (Vec3& v : mesh.vertices) v *= radius;
  }
  return mesh;
}

enum class SynthKind { static_sphere, expanding_sphere, oscillating_ellipsoid };

inline SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "static_sphere") return SynthKind::static_sphere;
  if (s == "expanding_sphere") return SynthKind::expanding_sphere;
  if (s == "oscillating_ellipsoid") return SynthKind::oscillating_ellipsoid;
  throw ValidationError("unknown synthetic sequence kind: " + s);
}

inline const char* to_string(SynthKind k) {
  switch (k) {
    case SynthKind::static_sphere: return "static_sphere";
    case SynthKind::expanding_sphere: return "expanding_sphere";
    case SynthKind::oscillating_ellipsoid: return "oscillating_ellipsoid";
  }
  return "?";
}

struct SynthParams {
  int subdivisions = 3;
  double radius = 1.0;       // R0
  double growth_rate = 0.1;  // expanding_sphere: R(t) = R0 + rate * t
  double amplitude = 0.25;   // oscillating_ellipsoid: a(t) = 1 + amplitude * sin(2 pi t / period)
  double period = 4.0;       // seconds
};

/// Synthetic constant-connectivity test sequences built on an icosphere.
/// Frame m sits at time m * frame_dt (starting at 0).
inline MeshSequence synth_sequence(SynthKind kind, const SynthParams& params, int frame_count,
                                   double frame_dt) {
  const int min_frames = kind == SynthKind::static_sphere ? 1 : 2;
  if (frame_count < min_frames)
    throw ValidationError("synth_sequence: frame_count must be >= " +
                          std::to_string(min_frames) + " for " + to_string(kind));
  if (!(frame_dt > 0.0)) throw ValidationError("synth_sequence: frame_dt must be positive");
  if (!(params.radius > 0.0)) throw ValidationError("synth_sequence: radius must be positive");
  if (kind == SynthKind::oscillating_ellipsoid && !(params.period > 0.0))
    throw ValidationError("synth_sequence: period must be positive");

  SurfaceMesh base = icosphere(params.subdivisions, 1.0);
  MeshSequence seq;
  seq.set_connectivity(base.triangles);
  for (int m = 0; m < frame_count; ++m) {
    double t = m * frame_dt;
    std::vector<Vec3> pos(base.vertices.size());
    switch (kind) {
      case SynthKind::static_sphere: {
        for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = base.vertices[i] * params.radius;
        break;
      }
      case SynthKind::expanding_sphere: {
        double r = params.radius + params.growth_rate * t;
        if (!(r > 0.0))
          throw ValidationError("synth_sequence: radius becomes non-positive at t=" +
                                std::to_string(t));
        for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = base.vertices[i] * r;
        break;
      }
      case SynthKind::oscillating_ellipsoid: {
        double a = 1.0 + params.amplitude * std::sin(2.0 * std::numbers::pi * t / params.period);
        if (!(a > 0.0))
          throw ValidationError("synth_sequence: x semi-axis becomes non-positive at t=" +
                                std::to_string(t));
        for (std::size_t i = 0; i < pos.size(); ++i) {
          const Vec3& v = base.vertices[i];
          pos[i] = Vec3{v.x * a, v.y, v.z} * params.radius;
        }
        break;
      }
    }
    seq.append_frame(std::move(pos), t);
  }
  return seq;
}

} // namespace surfpde
