#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "surfpde/bicgstab.hpp"
#include "surfpde/errors.hpp"
#include "surfpde/frap.hpp"
#include "surfpde/icosphere.hpp"
#include "surfpde/rds.hpp"

namespace surfpde {

/// Where the mesh sequence comes from: a manifest on disk or a synthetic
/// generator. Exactly one of `manifest` / `synth` must be set.
struct SequenceConfig {
  std::string manifest;
  std::string synth; // static_sphere | expanding_sphere | oscillating_ellipsoid
  SynthParams synth_params;
  int frames = 2;
  double frame_dt = 4.0;
};

/// Scalar advection-diffusion run settings. NaN time bounds default to the
/// sequence's own span (an explicit t_end is required for static meshes).
struct DiffusionConfig {
  double diffusivity = 0.05;
  double dt = 0.04;
  double t_begin = std::numeric_limits<double>::quiet_NaN();
  double t_end = std::numeric_limits<double>::quiet_NaN();
  std::string initial = "uniform"; // uniform | coordinate
};

struct OutputConfig {
  bool vtk = true;
  bool csv = true;
};

/// Fully resolved run configuration: one section per concern, every default
/// overridable from the config document, unknown keys rejected.
struct RunConfig {
  SequenceConfig sequence;
  DiffusionConfig diffusion;
  FrapConfig frap;
  int frap_start_frame = -1; // overrides frap.start_time when >= 0
  RdsConfig rds;
  OutputConfig output;
  SolverOptions solver;
};

namespace detail {

inline void check_config_keys(const nlohmann::json& obj,
                              std::initializer_list<const char*> allowed,
                              const std::string& section) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ValidationError("config section [" + section + "]: unknown key '" + it.key() + "'");
  }
}

template <typename T>
void fetch(const nlohmann::json& obj, const char* key, T& out, const std::string& section) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config section [" + section + "], key '" + key + "': " + e.what());
  }
}

inline void fetch_vec3(const nlohmann::json& obj, const char* key, Vec3& out,
                       const std::string& section) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  const auto& a = obj.at(key);
  if (!a.is_array() || a.size() != 3)
    throw ValidationError("config section [" + section + "], key '" + key +
                          "': expected an array of 3 numbers");
  try {
    out = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config section [" + section + "], key '" + key + "': " + e.what());
  }
}

} // namespace detail

inline Preconditioner preconditioner_from_string(const std::string& s) {
  if (s == "jacobi") return Preconditioner::jacobi;
  if (s == "none") return Preconditioner::none;
  throw ValidationError("unknown preconditioner '" + s + "' (expected jacobi or none)");
}

inline std::string to_string(Preconditioner p) {
  return p == Preconditioner::jacobi ? "jacobi" : "none";
}

/// Parses a configuration document; every key is optional, unknown keys and
/// sections are rejected.
inline RunConfig parse_run_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: document root must be a JSON object");
  detail::check_config_keys(
      j, {"sequence", "diffusion", "frap", "rds", "output", "solver"}, "top level");
  RunConfig cfg;

  if (j.contains("sequence")) {
    const auto& s = j.at("sequence");
    detail::check_config_keys(s,
                              {"manifest", "synth", "subdivisions", "radius", "growth_rate",
                               "amplitude", "period", "frames", "frame_dt"},
                              "sequence");
    detail::fetch(s, "manifest", cfg.sequence.manifest, "sequence");
    detail::fetch(s, "synth", cfg.sequence.synth, "sequence");
    detail::fetch(s, "subdivisions", cfg.sequence.synth_params.subdivisions, "sequence");
    detail::fetch(s, "radius", cfg.sequence.synth_params.radius, "sequence");
    detail::fetch(s, "growth_rate", cfg.sequence.synth_params.growth_rate, "sequence");
    detail::fetch(s, "amplitude", cfg.sequence.synth_params.amplitude, "sequence");
    detail::fetch(s, "period", cfg.sequence.synth_params.period, "sequence");
    detail::fetch(s, "frames", cfg.sequence.frames, "sequence");
    detail::fetch(s, "frame_dt", cfg.sequence.frame_dt, "sequence");
    if (!cfg.sequence.manifest.empty() && !cfg.sequence.synth.empty())
      throw ValidationError("config section [sequence]: set either 'manifest' or 'synth', "
                            "not both");
  }

  if (j.contains("diffusion")) {
    const auto& s = j.at("diffusion");
    detail::check_config_keys(s, {"diffusivity", "dt", "t_begin", "t_end", "initial"},
                              "diffusion");
    detail::fetch(s, "diffusivity", cfg.diffusion.diffusivity, "diffusion");
    detail::fetch(s, "dt", cfg.diffusion.dt, "diffusion");
    detail::fetch(s, "t_begin", cfg.diffusion.t_begin, "diffusion");
    detail::fetch(s, "t_end", cfg.diffusion.t_end, "diffusion");
    detail::fetch(s, "initial", cfg.diffusion.initial, "diffusion");
    if (cfg.diffusion.initial != "uniform" && cfg.diffusion.initial != "coordinate")
      throw ValidationError("config section [diffusion]: initial must be 'uniform' or "
                            "'coordinate'");
  }

  if (j.contains("frap")) {
    const auto& s = j.at("frap");
    detail::check_config_keys(s,
                              {"diffusivity", "dt", "duration", "fit_window", "start_frame",
                               "start_time", "roi_center", "roi_radius", "rule", "tracking"},
                              "frap");
    detail::fetch(s, "diffusivity", cfg.frap.diffusivity, "frap");
    detail::fetch(s, "dt", cfg.frap.dt, "frap");
    detail::fetch(s, "duration", cfg.frap.duration, "frap");
    detail::fetch(s, "fit_window", cfg.frap.fit_window, "frap");
    detail::fetch(s, "start_frame", cfg.frap_start_frame, "frap");
    detail::fetch(s, "start_time", cfg.frap.start_time, "frap");
    detail::fetch_vec3(s, "roi_center", cfg.frap.roi.center, "frap");
    detail::fetch(s, "roi_radius", cfg.frap.roi.radius, "frap");
    std::string rule, tracking;
    detail::fetch(s, "rule", rule, "frap");
    detail::fetch(s, "tracking", tracking, "frap");
    if (!rule.empty()) cfg.frap.rule = roi_rule_from_string(rule);
    if (!tracking.empty()) cfg.frap.tracking = roi_tracking_from_string(tracking);
  }

  if (j.contains("rds")) {
    const auto& s = j.at("rds");
    detail::check_config_keys(s,
                              {"d_u", "d_w", "gamma", "a", "b", "dt", "swap_interval", "t_end",
                               "perturbation", "seed", "snapshot_interval", "stats_interval"},
                              "rds");
    detail::fetch(s, "d_u", cfg.rds.params.d_u, "rds");
    detail::fetch(s, "d_w", cfg.rds.params.d_w, "rds");
    detail::fetch(s, "gamma", cfg.rds.params.gamma, "rds");
    detail::fetch(s, "a", cfg.rds.params.a, "rds");
    detail::fetch(s, "b", cfg.rds.params.b, "rds");
    detail::fetch(s, "dt", cfg.rds.dt, "rds");
    detail::fetch(s, "swap_interval", cfg.rds.swap_interval, "rds");
    detail::fetch(s, "t_end", cfg.rds.t_end, "rds");
    detail::fetch(s, "perturbation", cfg.rds.perturbation, "rds");
    detail::fetch(s, "seed", cfg.rds.seed, "rds");
    detail::fetch(s, "snapshot_interval", cfg.rds.snapshot_interval, "rds");
    detail::fetch(s, "stats_interval", cfg.rds.stats_interval, "rds");
  }

  if (j.contains("output")) {
    const auto& s = j.at("output");
    detail::check_config_keys(s, {"vtk", "csv"}, "output");
    detail::fetch(s, "vtk", cfg.output.vtk, "output");
    detail::fetch(s, "csv", cfg.output.csv, "output");
  }

  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    detail::check_config_keys(s, {"rel_tol", "max_iterations", "preconditioner"}, "solver");
    detail::fetch(s, "rel_tol", cfg.solver.rel_tol, "solver");
    detail::fetch(s, "max_iterations", cfg.solver.max_iterations, "solver");
    std::string precond;
    detail::fetch(s, "preconditioner", precond, "solver");
    if (!precond.empty()) cfg.solver.preconditioner = preconditioner_from_string(precond);
  }

  cfg.frap.solver = cfg.solver;
  cfg.rds.solver = cfg.solver;
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open config file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": config is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

namespace detail {

inline nlohmann::ordered_json time_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

} // namespace detail

/// Serializes the fully resolved configuration (defaults merged with all
/// overrides) so a run can be reproduced from its output directory alone.
inline nlohmann::ordered_json resolved_config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["sequence"] = {{"manifest", cfg.sequence.manifest},
                   {"synth", cfg.sequence.synth},
                   {"subdivisions", cfg.sequence.synth_params.subdivisions},
                   {"radius", cfg.sequence.synth_params.radius},
                   {"growth_rate", cfg.sequence.synth_params.growth_rate},
                   {"amplitude", cfg.sequence.synth_params.amplitude},
                   {"period", cfg.sequence.synth_params.period},
                   {"frames", cfg.sequence.frames},
                   {"frame_dt", cfg.sequence.frame_dt}};
  j["diffusion"] = {{"diffusivity", cfg.diffusion.diffusivity},
                    {"dt", cfg.diffusion.dt},
                    {"t_begin", detail::time_or_null(cfg.diffusion.t_begin)},
                    {"t_end", detail::time_or_null(cfg.diffusion.t_end)},
                    {"initial", cfg.diffusion.initial}};
  j["frap"] = {{"diffusivity", cfg.frap.diffusivity},
               {"dt", cfg.frap.dt},
               {"duration", cfg.frap.duration},
               {"fit_window", cfg.frap.fit_window},
               {"start_frame", cfg.frap_start_frame},
               {"start_time", detail::time_or_null(cfg.frap.start_time)},
               {"roi_center",
                {cfg.frap.roi.center.x, cfg.frap.roi.center.y, cfg.frap.roi.center.z}},
               {"roi_radius", cfg.frap.roi.radius},
               {"rule", to_string(cfg.frap.rule)},
               {"tracking", to_string(cfg.frap.tracking)}};
  j["rds"] = {{"d_u", cfg.rds.params.d_u},
              {"d_w", cfg.rds.params.d_w},
              {"gamma", cfg.rds.params.gamma},
              {"a", cfg.rds.params.a},
              {"b", cfg.rds.params.b},
              {"dt", cfg.rds.dt},
              {"swap_interval", cfg.rds.swap_interval},
              {"t_end", cfg.rds.t_end},
              {"perturbation", cfg.rds.perturbation},
              {"seed", cfg.rds.seed},
              {"snapshot_interval", cfg.rds.snapshot_interval},
              {"stats_interval", cfg.rds.stats_interval}};
  j["output"] = {{"vtk", cfg.output.vtk}, {"csv", cfg.output.csv}};
  j["solver"] = {{"rel_tol", cfg.solver.rel_tol},
                 {"max_iterations", cfg.solver.max_iterations},
                 {"preconditioner", to_string(cfg.solver.preconditioner)}};
  return j;
}

} // namespace surfpde
