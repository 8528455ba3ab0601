#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/surface_mesh.hpp"
#include "surfpde/vec3.hpp"

namespace surfpde {

/// Per-vertex velocity field, units length/second.
using VertexVelocityField = std::vector<Vec3>;

/// Difference quotient (curr - prev) / tau of vertex positions. Frames must
/// share connectivity, so only positions enter here.
inline VertexVelocityField vertex_velocity(std::span<const Vec3> prev, std::span<const Vec3> curr,
                                           double tau) {
  if (tau <= 0.0) throw ValidationError("vertex_velocity: tau must be positive");
  if (prev.size() != curr.size())
    throw ValidationError("vertex_velocity: vertex count mismatch between frames");
  VertexVelocityField w(curr.size());
  for (std::size_t i = 0; i < curr.size(); ++i) w[i] = (curr[i] - prev[i]) / tau;
  return w;
}

inline VertexVelocityField vertex_velocity(const SurfaceMesh& prev, const SurfaceMesh& curr,
                                           double tau) {
  if (prev.triangles != curr.triangles)
    throw ValidationError("vertex_velocity: frames do not share connectivity");
  return vertex_velocity(std::span<const Vec3>(prev.vertices),
                         std::span<const Vec3>(curr.vertices), tau);
}

/// Ordered frames at strictly increasing times sharing one triangle list.
/// Vertex positions for intermediate times come from linear interpolation.
/// A single-frame sequence is treated as a static surface valid at all times.
class MeshSequence {
public:
  MeshSequence() = default;

  /// Builds a sequence from full frames. The first frame is validated
  /// against all closed-surface invariants; later frames only need the same
  /// vertex count and a bit-identical triangle list (constant topology).
  static MeshSequence from_frames(std::vector<SurfaceMesh> frames, bool validate_first = true) {
    if (frames.empty()) throw ValidationError("mesh sequence: no frames");
    MeshSequence seq;
    seq.triangles_ = frames.front().triangles;
    if (validate_first) require_valid_mesh(frames.front(), "sequence frame 0");
    const std::size_t expected_vertices = frames.front().vertices.size();
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const SurfaceMesh& f = frames[i];
      if (f.vertices.size() != expected_vertices)
        throw ValidationError("sequence frame " + std::to_string(i) +
                              ": vertex count differs from frame 0");
      if (i > 0 && f.triangles != seq.triangles_)
        throw ValidationError("sequence frame " + std::to_string(i) +
                              ": connectivity differs from frame 0");
      if (i > 0 && !(f.frame_time > frames[i - 1].frame_time))
        throw ValidationError("sequence frame " + std::to_string(i) +
                              ": frame times not strictly increasing");
      seq.times_.push_back(f.frame_time);
      seq.positions_.push_back(std::move(frames[i].vertices));
    }
    return seq;
  }

  std::size_t frame_count() const { return times_.size(); }
  bool is_static() const { return times_.size() == 1; }
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }
  double time(std::size_t i) const { return times_.at(i); }
  const std::vector<Tri>& connectivity() const { return triangles_; }
  std::size_t vertex_count() const { return positions_.empty() ? 0 : positions_.front().size(); }

  const std::vector<Vec3>& frame_positions(std::size_t i) const { return positions_.at(i); }

  /// Materializes frame i as a standalone mesh (connectivity copied).
  SurfaceMesh frame(std::size_t i) const {
    return SurfaceMesh{positions_.at(i), triangles_, times_.at(i)};
  }

  /// Vertex positions at time t, piecewise linear between frames and exact
  /// at the frame times. Throws when t lies outside the covered interval.
  std::vector<Vec3> positions_at(double t) const {
    if (is_static()) return positions_.front();
    if (t < times_.front() || t > times_.back())
      throw ValidationError("positions_at: time " + std::to_string(t) +
                            " outside sequence range [" + std::to_string(times_.front()) + ", " +
                            std::to_string(times_.back()) + "]");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t hi = std::min<std::size_t>(times_.size() - 1,
                                           static_cast<std::size_t>(it - times_.begin()));
    if (hi == 0) hi = 1;
    std::size_t lo = hi - 1;
    if (t == times_[lo]) return positions_[lo];
    if (t == times_[hi]) return positions_[hi];
    double alpha = (t - times_[lo]) / (times_[hi] - times_[lo]);
    const auto& a = positions_[lo];
    const auto& b = positions_[hi];
    std::vector<Vec3> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * (1.0 - alpha) + b[i] * alpha;
    return out;
  }

  /// Whole interpolated frame at time t.
  SurfaceMesh interpolate_frames(double t) const {
    return SurfaceMesh{positions_at(t), triangles_, t};
  }

  /// Appends a frame from raw positions (used by readers and generators).
  void append_frame(std::vector<Vec3> positions, double t) {
    if (!times_.empty()) {
      if (positions.size() != positions_.front().size())
        throw ValidationError("append_frame: vertex count differs from frame 0");
      if (!(t > times_.back()))
        throw ValidationError("append_frame: frame times not strictly increasing");
    }
    times_.push_back(t);
    positions_.push_back(std::move(positions));
  }

  void set_connectivity(std::vector<Tri> tris) { triangles_ = std::move(tris); }

private:
  std::vector<Tri> triangles_;
  std::vector<double> times_;
  std::vector<std::vector<Vec3>> positions_;
};

/// Free-function form mirroring the frame-interpolation operation.
inline SurfaceMesh interpolate_frames(const MeshSequence& seq, double t) {
  return seq.interpolate_frames(t);
}

} // namespace surfpde
