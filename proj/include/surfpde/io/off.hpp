#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/io/format.hpp"
#include "surfpde/surface_mesh.hpp"
#include "surfpde/vec3.hpp"

namespace surfpde {

/// Mesh frame formats understood by the readers/writers: "off" is the ASCII
/// vertex/face list, "off-binary" a compact little-endian variant, and
/// "auto" sniffs the leading magic bytes.
enum class FrameFormat { off_ascii, off_binary, autodetect };

inline FrameFormat frame_format_from_string(const std::string& s) {
  if (s == "off") return FrameFormat::off_ascii;
  if (s == "off-binary" || s == "boff") return FrameFormat::off_binary;
  if (s == "auto") return FrameFormat::autodetect;
  throw ValidationError("unknown frame format '" + s + "' (expected off, off-binary, or auto)");
}

inline std::string to_string(FrameFormat f) {
  switch (f) {
  case FrameFormat::off_ascii: return "off";
  case FrameFormat::off_binary: return "off-binary";
  case FrameFormat::autodetect: return "auto";
  }
  return "off";
}

namespace detail {

inline constexpr char kBinaryMagic[4] = {'B', 'O', 'F', 'F'};
inline constexpr std::uint32_t kBinaryVersion = 1;

/// Splits on spaces/tabs; returns views into `line`.
inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

struct LineReader {
  std::istream& in;
  std::string path;
  int line_no = 0;
  std::string line;

  /// Next non-empty, non-comment line; false at end of stream.
  bool next() {
    while (std::getline(in, line)) {
      ++line_no;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      bool blank = true;
      for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') {
          blank = false;
          break;
        }
      if (!blank) return true;
    }
    return false;
  }

  std::string where() const { return path + ":" + std::to_string(line_no); }
};

inline SurfaceMesh read_off_ascii_stream(std::istream& in, const std::string& path) {
  LineReader r{in, path};
  if (!r.next()) throw IoError(path + ": empty file");
  {
    auto fields = split_fields(r.line);
    if (fields.size() != 1 || fields[0] != "OFF")
      throw IoError(r.where() + ": expected 'OFF' header, got '" + r.line + "'");
  }
  if (!r.next()) throw IoError(path + ": missing counts line");
  long long nv = 0, nf = 0;
  {
    auto fields = split_fields(r.line);
    if (fields.size() != 3)
      throw IoError(r.where() + ": counts line must be 'V F E', got '" + r.line + "'");
    nv = parse_integer(fields[0], r.where());
    nf = parse_integer(fields[1], r.where());
    (void)parse_integer(fields[2], r.where()); // edge count present but unused
    if (nv < 0 || nf < 0) throw IoError(r.where() + ": negative counts");
  }
  SurfaceMesh mesh;
  mesh.vertices.reserve(nv);
  for (long long i = 0; i < nv; ++i) {
    if (!r.next()) throw IoError(path + ": unexpected end of file in vertex list (read " +
                                 std::to_string(i) + " of " + std::to_string(nv) + ")");
    auto fields = split_fields(r.line);
    if (fields.size() != 3)
      throw IoError(r.where() + ": vertex line must have 3 coordinates, got " +
                    std::to_string(fields.size()));
    mesh.vertices.push_back({parse_double(fields[0], r.where()),
                             parse_double(fields[1], r.where()),
                             parse_double(fields[2], r.where())});
  }
  mesh.triangles.reserve(nf);
  for (long long i = 0; i < nf; ++i) {
    if (!r.next()) throw IoError(path + ": unexpected end of file in face list (read " +
                                 std::to_string(i) + " of " + std::to_string(nf) + ")");
    auto fields = split_fields(r.line);
    if (fields.size() != 4 || fields[0] != "3")
      throw IoError(r.where() + ": face line must be '3 i j k'");
    Tri t;
    for (int k = 0; k < 3; ++k) {
      long long idx = parse_integer(fields[k + 1], r.where());
      if (idx < 0 || idx >= nv)
        throw IoError(r.where() + ": face index " + std::to_string(idx) +
                      " out of range [0, " + std::to_string(nv) + ")");
      t[k] = static_cast<int>(idx);
    }
    mesh.triangles.push_back(t);
  }
  return mesh;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  // The build targets little-endian hosts; memcpy preserves that layout.
  out.write(bytes, sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& path, const char* what) {
  char bytes[sizeof(T)];
  in.read(bytes, sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw IoError(path + ": truncated file while reading " + std::string(what) + " at offset " +
                  std::to_string(static_cast<long long>(in.tellg())));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

inline SurfaceMesh read_off_binary_stream(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kBinaryMagic, 4) != 0)
    throw IoError(path + ": missing binary magic 'BOFF' at offset 0");
  const auto version = read_le<std::uint32_t>(in, path, "version");
  if (version != kBinaryVersion)
    throw IoError(path + ": unsupported binary version " + std::to_string(version));
  const auto nv = read_le<std::uint64_t>(in, path, "vertex count");
  const auto nf = read_le<std::uint64_t>(in, path, "face count");
  if (nv > (1ull << 32) || nf > (1ull << 32))
    throw IoError(path + ": implausible counts (" + std::to_string(nv) + " vertices, " +
                  std::to_string(nf) + " faces)");
  SurfaceMesh mesh;
  mesh.vertices.resize(nv);
  for (std::uint64_t i = 0; i < nv; ++i) {
    mesh.vertices[i].x = read_le<double>(in, path, "vertex coordinate");
    mesh.vertices[i].y = read_le<double>(in, path, "vertex coordinate");
    mesh.vertices[i].z = read_le<double>(in, path, "vertex coordinate");
  }
  mesh.triangles.resize(nf);
  for (std::uint64_t i = 0; i < nf; ++i)
    for (int k = 0; k < 3; ++k) {
      const auto idx = read_le<std::uint32_t>(in, path, "face index");
      if (idx >= nv)
        throw IoError(path + ": face " + std::to_string(i) + " index " + std::to_string(idx) +
                      " out of range [0, " + std::to_string(nv) + ")");
      mesh.triangles[i][k] = static_cast<int>(idx);
    }
  return mesh;
}

} // namespace detail

/// Reads one mesh frame. The mesh is syntactically validated here (counts,
/// index ranges); run require_valid_mesh for full topological validation.
inline SurfaceMesh read_mesh_frame(const std::string& path,
                                   FrameFormat format = FrameFormat::autodetect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open file");
  if (format == FrameFormat::autodetect) {
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    in.clear();
    in.seekg(0);
    format = std::memcmp(magic, detail::kBinaryMagic, 4) == 0 ? FrameFormat::off_binary
                                                              : FrameFormat::off_ascii;
  }
  return format == FrameFormat::off_binary ? detail::read_off_binary_stream(in, path)
                                           : detail::read_off_ascii_stream(in, path);
}

/// Writes the ASCII form: "OFF", counts, shortest-round-trip coordinates,
/// "3 i j k" faces. Deterministic bytes for identical meshes.
inline void write_mesh_frame_ascii(const std::string& path, const SurfaceMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out << "OFF\n";
  out << mesh.vertices.size() << ' ' << mesh.triangles.size() << ' '
      << (mesh.triangles.size() * 3) / 2 << '\n';
  for (const Vec3& v : mesh.vertices)
    out << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z) << '\n';
  for (const Tri& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) throw IoError(path + ": write failed");
}

/// Writes the compact binary form: 'BOFF', u32 version, u64 counts, f64
/// coordinates, u32 indices, all little-endian.
inline void write_mesh_frame_binary(const std::string& path, const SurfaceMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out.write(detail::kBinaryMagic, 4);
  detail::write_le(out, detail::kBinaryVersion);
  detail::write_le(out, static_cast<std::uint64_t>(mesh.vertices.size()));
  detail::write_le(out, static_cast<std::uint64_t>(mesh.triangles.size()));
  for (const Vec3& v : mesh.vertices) {
    detail::write_le(out, v.x);
    detail::write_le(out, v.y);
    detail::write_le(out, v.z);
  }
  for (const Tri& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) detail::write_le(out, static_cast<std::uint32_t>(t[k]));
  if (!out) throw IoError(path + ": write failed");
}

inline void write_mesh_frame(const std::string& path, const SurfaceMesh& mesh,
                             FrameFormat format = FrameFormat::off_ascii) {
  if (format == FrameFormat::off_binary)
    write_mesh_frame_binary(path, mesh);
  else
    write_mesh_frame_ascii(path, mesh);
}

} // namespace surfpde
