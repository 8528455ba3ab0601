#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "surfpde/errors.hpp"
#include "surfpde/io/off.hpp"
#include "surfpde/mesh_sequence.hpp"
#include "surfpde/surface_mesh.hpp"

namespace surfpde {

/// One frame reference inside a sequence manifest.
struct ManifestFrame {
  std::string path;
  double time = 0.0;
};

/// Frame times default to 4-second spacing when the manifest omits them,
/// matching typical acquisition cadence for the target data.
inline constexpr double kDefaultFrameSpacing = 4.0;

/// Description of an on-disk mesh sequence: frame files with times, the
/// frame file format, and a unit-scale factor applied to all coordinates on
/// load (mesh units -> desired length units).
struct SequenceManifest {
  FrameFormat format = FrameFormat::off_ascii;
  double unit_scale = 1.0;
  std::vector<ManifestFrame> frames;
};

namespace detail {

inline void check_manifest_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ValidationError(where + ": unknown key '" + it.key() + "'");
  }
}

} // namespace detail

/// Parses a manifest JSON document. Frame entries are either plain path
/// strings or objects {"path": ..., "time": ...}; explicit times must be
/// given for all frames or none.
inline SequenceManifest parse_manifest(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": manifest must be a JSON object");
  detail::check_manifest_keys(j, {"format", "unit_scale", "frames"}, where);
  SequenceManifest m;
  try {
    if (j.contains("format")) m.format = frame_format_from_string(j.at("format").get<std::string>());
    if (j.contains("unit_scale")) m.unit_scale = j.at("unit_scale").get<double>();
    if (!j.contains("frames") || !j.at("frames").is_array() || j.at("frames").empty())
      throw ValidationError(where + ": manifest needs a non-empty 'frames' array");
    int with_time = 0;
    for (const auto& entry : j.at("frames")) {
      ManifestFrame f;
      if (entry.is_string()) {
        f.path = entry.get<std::string>();
      } else if (entry.is_object()) {
        detail::check_manifest_keys(entry, {"path", "time"}, where + " frame entry");
        f.path = entry.at("path").get<std::string>();
        if (entry.contains("time")) {
          f.time = entry.at("time").get<double>();
          ++with_time;
        }
      } else {
        throw ValidationError(where + ": frame entries must be strings or objects");
      }
      m.frames.push_back(std::move(f));
    }
    if (with_time != 0 && with_time != static_cast<int>(m.frames.size()))
      throw ValidationError(where + ": either all frames or none may carry explicit times");
    if (with_time == 0)
      for (std::size_t i = 0; i < m.frames.size(); ++i)
        m.frames[i].time = static_cast<double>(i) * kDefaultFrameSpacing;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + ": " + e.what());
  }
  if (!(m.unit_scale > 0.0)) throw ValidationError(where + ": unit_scale must be positive");
  return m;
}

inline SequenceManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open manifest");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": manifest is not valid JSON: " + e.what());
  }
  return parse_manifest(j, path);
}

/// Writes a manifest with explicit times; paths are recorded as given.
inline void write_manifest(const std::string& path, const SequenceManifest& m) {
  nlohmann::ordered_json j;
  j["format"] = to_string(m.format);
  j["unit_scale"] = m.unit_scale;
  j["frames"] = nlohmann::ordered_json::array();
  for (const ManifestFrame& f : m.frames)
    j["frames"].push_back(nlohmann::ordered_json{{"path", f.path}, {"time", f.time}});
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError(path + ": write failed");
}

/// Loads every frame named by the manifest into a validated MeshSequence.
/// Relative frame paths are resolved against the manifest's directory;
/// coordinates are multiplied by unit_scale. Frames after the first must
/// match its vertex count and connectivity.
inline MeshSequence load_sequence(const std::string& manifest_path) {
  SequenceManifest m = read_manifest(manifest_path);
  const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
  std::vector<SurfaceMesh> frames;
  frames.reserve(m.frames.size());
  for (const ManifestFrame& f : m.frames) {
    std::filesystem::path p(f.path);
    if (p.is_relative()) p = base / p;
    SurfaceMesh mesh = read_mesh_frame(p.string(), m.format);
    if (m.unit_scale != 1.0)
      for (Vec3& v : mesh.vertices) v = m.unit_scale * v;
    mesh.frame_time = f.time;
    frames.push_back(std::move(mesh));
  }
  return MeshSequence::from_frames(std::move(frames));
}

} // namespace surfpde
