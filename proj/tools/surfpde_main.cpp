// Command-line driver for the surface-PDE toolkit: mesh/manifest inspection,
// synthetic sequence generation, scalar advection-diffusion runs, the
// photobleaching-recovery pipeline, the two-species pattern-formation run,
// and standalone recovery-curve fitting.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "surfpde/io/csv.hpp"
#include "surfpde/io/manifest.hpp"
#include "surfpde/io/off.hpp"
#include "surfpde/io/run_config.hpp"
#include "surfpde/io/vtk.hpp"
#include "surfpde/surfpde.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using namespace surfpde;

fs::path prepare_output_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError(dir + ": cannot create output directory: " + ec.message());
  return p;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open file for writing");
  out << content;
  if (!out) throw IoError(path.string() + ": write failed");
}

void write_resolved_config(const fs::path& dir, const RunConfig& cfg) {
  write_text_file(dir / "resolved-config.json", resolved_config_json(cfg).dump(2) + "\n");
}

MeshSequence build_sequence(const RunConfig& cfg) {
  const SequenceConfig& s = cfg.sequence;
  if (!s.manifest.empty()) return load_sequence(s.manifest);
  if (!s.synth.empty()) {
    SynthKind kind = synth_kind_from_string(s.synth);
    int frames = s.frames;
    if (kind == SynthKind::static_sphere) frames = 1;
    return synth_sequence(kind, s.synth_params, frames, s.frame_dt);
  }
  throw ValidationError("no mesh sequence selected: set [sequence].manifest or "
                        "[sequence].synth (or pass --manifest/--synth)");
}

std::string format_padded_index(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", i);
  return buf;
}

// ---------------------------------------------------------------- info ----

void print_mesh_row(std::ostream& out, const std::string& frame, const std::string& time,
                    const SurfaceMesh& mesh) {
  ValidationReport report = validate_mesh(mesh);
  out << frame << '\t' << time << '\t' << mesh.vertices.size() << '\t'
      << mesh.triangles.size() << '\t' << report.euler_characteristic << '\t'
      << format_double(max_element_diameter(mesh)) << '\t' << format_double(total_area(mesh))
      << '\t' << (report.accepted ? "ok" : ("invalid: " + report.first_violation)) << '\n';
}

int cmd_info(const std::string& manifest_path, const std::string& mesh_path) {
  if (manifest_path.empty() == mesh_path.empty())
    throw ValidationError("info: pass exactly one of --manifest or --mesh");
  std::cout << "frame\ttime_s\tvertices\ttriangles\teuler\th_max\tarea\tstatus\n";
  if (!mesh_path.empty()) {
    print_mesh_row(std::cout, "0", "-", read_mesh_frame(mesh_path));
    return 0;
  }
  SequenceManifest m = read_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    fs::path p(m.frames[i].path);
    if (p.is_relative()) p = base / p;
    SurfaceMesh mesh = read_mesh_frame(p.string(), m.format);
    if (m.unit_scale != 1.0)
      for (Vec3& v : mesh.vertices) v = m.unit_scale * v;
    print_mesh_row(std::cout, std::to_string(i), format_double(m.frames[i].time), mesh);
  }
  return 0;
}

// --------------------------------------------------------------- synth ----

int cmd_synth(const RunConfig& cfg, const std::string& output_dir, FrameFormat format) {
  MeshSequence seq = build_sequence(cfg);
  fs::path dir = prepare_output_dir(output_dir);
  write_resolved_config(dir, cfg);

  SequenceManifest manifest;
  manifest.format = format;
  manifest.unit_scale = 1.0;
  const std::string ext = format == FrameFormat::off_binary ? ".boff" : ".off";
  for (std::size_t i = 0; i < seq.frame_count(); ++i) {
    SurfaceMesh frame = seq.frame(i);
    std::string name = "frame_" + format_padded_index(static_cast<int>(i)) + ext;
    write_mesh_frame((dir / name).string(), frame, format);
    manifest.frames.push_back({name, seq.time(i)});
  }
  write_manifest((dir / "manifest.json").string(), manifest);
  std::cout << "wrote " << seq.frame_count() << " frame(s), " << seq.vertex_count()
            << " vertices each, manifest " << (dir / "manifest.json").string() << '\n';
  return 0;
}

// ------------------------------------------------------------- diffuse ----

int cmd_diffuse(const RunConfig& cfg, const std::string& output_dir) {
  MeshSequence seq = build_sequence(cfg);
  fs::path dir = prepare_output_dir(output_dir);
  write_resolved_config(dir, cfg);

  double t_begin = cfg.diffusion.t_begin;
  double t_end = cfg.diffusion.t_end;
  if (std::isnan(t_begin)) t_begin = seq.start_time();
  if (std::isnan(t_end)) {
    if (seq.is_static())
      throw ValidationError("diffuse: t_end is required for a static sequence");
    t_end = seq.end_time();
  }

  std::vector<double> u0(seq.vertex_count(), 1.0);
  if (cfg.diffusion.initial == "coordinate") {
    std::vector<Vec3> pos = seq.positions_at(t_begin);
    for (std::size_t j = 0; j < u0.size(); ++j) u0[j] = pos[j].x;
  }

  double mass0 = 0.0, mass_final = 0.0, max_drift = 0.0;
  // Drift is normalized by the integral of |u0| so sign-balanced profiles
  // (whose net mass is ~0) still report a meaningful relative number.
  double mass_scale = 0.0;
  int steps = 0;
  std::vector<Vec3> last_positions;
  std::vector<double> u_final = run_diffusion(
      seq, std::move(u0), cfg.diffusion.diffusivity, cfg.diffusion.dt, t_begin, t_end,
      cfg.solver, [&](const DiffusionSample& s) {
        const double mass =
            integrate(seq.connectivity(), *s.geometry, s.u);
        if (s.step == 0) {
          mass0 = mass;
          std::vector<double> abs_u(s.u.begin(), s.u.end());
          for (double& v : abs_u) v = std::abs(v);
          mass_scale = integrate(seq.connectivity(), *s.geometry, abs_u);
        }
        if (mass_scale > 0.0)
          max_drift = std::max(max_drift, std::abs(mass - mass0) / mass_scale);
        mass_final = mass;
        steps = s.step;
        last_positions.assign(s.positions.begin(), s.positions.end());
      });

  if (cfg.output.vtk) {
    std::vector<NamedField> fields{{"u", u_final}};
    write_vtk_frame((dir / "final.vtk").string(), last_positions, seq.connectivity(), fields);
  }

  ordered_json summary;
  summary["t_begin"] = t_begin;
  summary["t_end"] = t_end;
  summary["steps"] = steps;
  summary["diffusivity"] = cfg.diffusion.diffusivity;
  summary["initial_mass"] = mass0;
  summary["final_mass"] = mass_final;
  summary["max_relative_mass_drift"] = max_drift;
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "diffusion run: " << steps << " steps on [" << format_double(t_begin) << ", "
            << format_double(t_end) << "], max relative mass drift " << format_double(max_drift)
            << '\n';
  return 0;
}

// ---------------------------------------------------------------- frap ----

int cmd_frap(RunConfig cfg, const std::string& output_dir) {
  MeshSequence seq = build_sequence(cfg);
  if (cfg.frap_start_frame >= 0) {
    if (static_cast<std::size_t>(cfg.frap_start_frame) >= seq.frame_count())
      throw ValidationError("frap: start_frame " + std::to_string(cfg.frap_start_frame) +
                            " out of range (sequence has " + std::to_string(seq.frame_count()) +
                            " frames)");
    cfg.frap.start_time = seq.time(static_cast<std::size_t>(cfg.frap_start_frame));
  }
  fs::path dir = prepare_output_dir(output_dir);
  write_resolved_config(dir, cfg);

  FrapResult result = run_frap(seq, cfg.frap);

  if (cfg.output.csv)
    write_recovery_csv((dir / "recovery.csv").string(), result.times, result.means,
                       result.roi_areas);

  ordered_json report;
  report["bleach_time"] = result.bleach_time;
  report["roi_radius"] = result.roi_radius;
  report["roi_elements"] = result.roi.size();
  report["bleached_area_fraction"] = result.bleached_area_fraction;
  report["samples"] = result.times.size();
  report["fit"] = {{"converged", result.fit.converged},
                   {"iterations", result.fit.iterations},
                   {"rss", result.fit.rss},
                   {"amplitude", result.fit.params.size() > 0 ? result.fit.params[0] : 0.0},
                   {"timescale_s", result.fit.params.size() > 1 ? result.fit.params[1] : 0.0},
                   {"amplitude_stderr",
                    result.fit.stderrs.size() > 0 ? result.fit.stderrs[0] : 0.0},
                   {"timescale_stderr",
                    result.fit.stderrs.size() > 1 ? result.fit.stderrs[1] : 0.0}};
  report["t_half_s"] = result.t_half;
  report["warnings"] = result.warnings;
  write_text_file(dir / "frap-report.json", report.dump(2) + "\n");

  std::cout << "bleached fraction: " << format_double(result.bleached_area_fraction) << '\n';
  if (result.fit.params.size() >= 2) {
    std::cout << "A = " << format_double(result.fit.params[0]);
    if (result.fit.stderrs.size() >= 1)
      std::cout << " (stderr " << format_double(result.fit.stderrs[0]) << ")";
    std::cout << "\nB = " << format_double(result.fit.params[1]) << " s";
    if (result.fit.stderrs.size() >= 2)
      std::cout << " (stderr " << format_double(result.fit.stderrs[1]) << ")";
    std::cout << "\nT_half = " << format_double(result.t_half) << " s\n";
  }
  if (!result.fit.converged) std::cout << "fit: degenerate or not converged\n";
  for (const std::string& w : result.warnings) std::cout << "warning: " << w << '\n';
  return 0;
}

// ----------------------------------------------------------------- rds ----

int cmd_rds(const RunConfig& cfg, const std::string& output_dir) {
  MeshSequence seq = build_sequence(cfg);
  fs::path dir = prepare_output_dir(output_dir);
  write_resolved_config(dir, cfg);

  ordered_json snapshots = ordered_json::array();
  RdsRunResult result = run_rds(seq, cfg.rds, [&](const RdsSnapshot& snap) {
    ordered_json entry;
    entry["index"] = snap.index;
    entry["time"] = snap.time;
    if (cfg.output.vtk) {
      std::string name = "snapshot_" + format_padded_index(snap.index) + ".vtk";
      std::vector<NamedField> fields{{"u", snap.u}, {"w", snap.w}};
      write_vtk_frame((dir / name).string(), snap.positions, seq.connectivity(), fields);
      entry["file"] = name;
    }
    snapshots.push_back(entry);
  });

  ordered_json report;
  report["seed"] = cfg.rds.seed;
  report["steady_state"] = {{"u", result.steady.u}, {"w", result.steady.w}};
  report["snapshots"] = snapshots;
  ordered_json stats = ordered_json::array();
  for (const RdsStats& s : result.stats) {
    stats.push_back({{"time", s.time},
                     {"u", {{"min", s.u.min}, {"max", s.u.max}, {"mean", s.u.mean},
                            {"std", s.u.std_dev}}},
                     {"w", {{"min", s.w.min}, {"max", s.w.max}, {"mean", s.w.mean},
                            {"std", s.w.std_dev}}}});
  }
  report["stats"] = stats;
  write_text_file(dir / "rds-report.json", report.dump(2) + "\n");

  const RdsStats& last = result.stats.back();
  std::cout << "pattern run to t=" << format_double(last.time) << ": u in ["
            << format_double(last.u.min) << ", " << format_double(last.u.max)
            << "], spatial std " << format_double(last.u.std_dev) << ", "
            << result.snapshot_times.size() << " snapshot(s)\n";
  return 0;
}

// ----------------------------------------------------------------- fit ----

int cmd_fit(const std::string& csv_path, double window) {
  std::vector<RecoverySample> rows = read_recovery_csv(csv_path);
  std::vector<double> ts, ys;
  for (const RecoverySample& r : rows) {
    ts.push_back(r.time_s);
    ys.push_back(r.mean_concentration);
  }
  FitResult fit = recovery_fit(ts, ys, window);
  std::cout << "samples = " << ts.size() << '\n';
  std::cout << "A = " << format_double(fit.params[0]);
  if (!fit.stderrs.empty()) std::cout << " (stderr " << format_double(fit.stderrs[0]) << ")";
  std::cout << "\nB = " << format_double(fit.params[1]) << " s";
  if (fit.stderrs.size() > 1) std::cout << " (stderr " << format_double(fit.stderrs[1]) << ")";
  std::cout << "\nT_half = " << format_double(half_time(fit)) << " s\n";
  std::cout << "rss = " << format_double(fit.rss) << ", iterations = " << fit.iterations
            << ", converged = " << (fit.converged ? "true" : "false") << '\n';
  if (!fit.converged) std::cout << "fit: degenerate or not converged\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element solver for advection-diffusion and pattern formation on "
               "evolving triangulated surfaces"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir = "out";
  double dt_flag = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed_flag = 0;
  int frames_flag = -1;
  int subdivisions_flag = -1;
  std::string manifest_flag, synth_flag;

  auto add_common = [&](CLI::App* sub, bool with_sequence) {
    sub->add_option("--config", config_path, "JSON run configuration file");
    sub->add_option("--output-dir", output_dir, "Directory for run outputs (default: out)");
    sub->add_option("--dt", dt_flag, "Override the time step of this subcommand");
    sub->add_option("--seed", seed_flag, "Override the RNG seed");
    sub->add_option("--frames", frames_flag, "Override the synthetic frame count");
    if (with_sequence) {
      sub->add_option("--manifest", manifest_flag, "Mesh sequence manifest path");
      sub->add_option("--synth", synth_flag,
                      "Synthetic sequence kind (static_sphere, expanding_sphere, "
                      "oscillating_ellipsoid)");
      sub->add_option("--subdivisions", subdivisions_flag,
                      "Icosphere subdivision level for --synth sequences");
    }
  };

  // info
  auto* info_cmd = app.add_subcommand("info", "Report per-frame mesh statistics");
  std::string info_manifest, info_mesh;
  info_cmd->add_option("--manifest", info_manifest, "Sequence manifest to inspect");
  info_cmd->add_option("--mesh", info_mesh, "Single mesh frame to inspect");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic mesh sequence");
  add_common(synth_cmd, false);
  std::string synth_kind = "static_sphere";
  std::string synth_format = "off";
  int synth_subdivisions = -1;
  double synth_radius = std::numeric_limits<double>::quiet_NaN();
  double synth_growth = std::numeric_limits<double>::quiet_NaN();
  double synth_amplitude = std::numeric_limits<double>::quiet_NaN();
  double synth_period = std::numeric_limits<double>::quiet_NaN();
  double synth_frame_dt = std::numeric_limits<double>::quiet_NaN();
  synth_cmd->add_option("--kind", synth_kind, "Sequence kind (default static_sphere)");
  synth_cmd->add_option("--subdivisions", synth_subdivisions, "Icosphere subdivision level");
  synth_cmd->add_option("--radius", synth_radius, "Base radius");
  synth_cmd->add_option("--growth-rate", synth_growth, "Radius growth per second");
  synth_cmd->add_option("--amplitude", synth_amplitude, "Axis oscillation amplitude");
  synth_cmd->add_option("--period", synth_period, "Axis oscillation period, seconds");
  synth_cmd->add_option("--frame-dt", synth_frame_dt, "Seconds between frames");
  synth_cmd->add_option("--format", synth_format, "Frame format: off or off-binary");

  // diffuse
  auto* diffuse_cmd = app.add_subcommand("diffuse", "Run scalar surface advection-diffusion");
  add_common(diffuse_cmd, true);
  double diff_d = std::numeric_limits<double>::quiet_NaN();
  double diff_t_begin = std::numeric_limits<double>::quiet_NaN();
  double diff_t_end = std::numeric_limits<double>::quiet_NaN();
  std::string diff_initial;
  diffuse_cmd->add_option("--diffusivity", diff_d, "Diffusivity (length^2/s)");
  diffuse_cmd->add_option("--t-begin", diff_t_begin, "Start time (default: sequence start)");
  diffuse_cmd->add_option("--t-end", diff_t_end, "End time (default: sequence end)");
  diffuse_cmd->add_option("--initial", diff_initial, "Initial field: uniform or coordinate");

  // frap
  auto* frap_cmd = app.add_subcommand("frap", "Run the bleach-and-recovery pipeline");
  add_common(frap_cmd, true);
  double frap_d = std::numeric_limits<double>::quiet_NaN();
  double frap_duration = std::numeric_limits<double>::quiet_NaN();
  double frap_window = std::numeric_limits<double>::quiet_NaN();
  double frap_start_time = std::numeric_limits<double>::quiet_NaN();
  int frap_start_frame = -1;
  double frap_radius = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> frap_center;
  std::string frap_rule, frap_tracking;
  frap_cmd->add_option("--diffusivity", frap_d, "Diffusivity (length^2/s)");
  frap_cmd->add_option("--duration", frap_duration, "Simulated recovery span, seconds");
  frap_cmd->add_option("--fit-window", frap_window, "Fit window, seconds");
  frap_cmd->add_option("--start-frame", frap_start_frame, "Bleach at this frame index");
  frap_cmd->add_option("--start-time", frap_start_time, "Bleach at this sequence time");
  frap_cmd->add_option("--roi-radius", frap_radius,
                       "ROI ball radius (default: quarter of the bounding radius)");
  frap_cmd->add_option("--roi-center", frap_center, "ROI ball center (3 numbers)")
      ->expected(3);
  frap_cmd->add_option("--rule", frap_rule, "ROI membership: barycenter or all_vertices");
  frap_cmd->add_option("--tracking", frap_tracking,
                       "ROI tracking: frozen_elements or fixed_ball");

  // rds
  auto* rds_cmd = app.add_subcommand("rds", "Run the two-species pattern-formation system");
  add_common(rds_cmd, true);
  double rds_t_end = std::numeric_limits<double>::quiet_NaN();
  double rds_gamma = std::numeric_limits<double>::quiet_NaN();
  double rds_perturbation = std::numeric_limits<double>::quiet_NaN();
  double rds_swap = std::numeric_limits<double>::quiet_NaN();
  double rds_snapshot = std::numeric_limits<double>::quiet_NaN();
  double rds_stats = std::numeric_limits<double>::quiet_NaN();
  rds_cmd->add_option("--t-end", rds_t_end, "End time (model units)");
  rds_cmd->add_option("--gamma", rds_gamma, "Reaction strength");
  rds_cmd->add_option("--perturbation", rds_perturbation, "Initial perturbation amplitude");
  rds_cmd->add_option("--swap-interval", rds_swap, "Time units between mesh frames");
  rds_cmd->add_option("--snapshot-interval", rds_snapshot, "Time units between snapshots");
  rds_cmd->add_option("--stats-interval", rds_stats, "Time units between statistics rows");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a recovery model to an existing CSV series");
  std::string fit_csv;
  double fit_window = std::numeric_limits<double>::infinity();
  fit_cmd->add_option("--csv", fit_csv, "Recovery CSV produced by the frap subcommand")
      ->required();
  fit_cmd->add_option("--window", fit_window, "Only fit samples with time <= window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
    std::cerr << "error(usage): " << e.what() << '\n';
    std::cerr << "run with --help for usage\n";
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (!manifest_flag.empty() && !synth_flag.empty())
      throw ValidationError("pass either --manifest or --synth, not both");
    if (!manifest_flag.empty()) {
      cfg.sequence.manifest = manifest_flag;
      cfg.sequence.synth.clear();
    }
    if (!synth_flag.empty()) {
      cfg.sequence.synth = synth_flag;
      cfg.sequence.manifest.clear();
    }
    if (frames_flag >= 0) cfg.sequence.frames = frames_flag;
    if (subdivisions_flag >= 0) cfg.sequence.synth_params.subdivisions = subdivisions_flag;

    if (*info_cmd) return cmd_info(info_manifest, info_mesh);

    if (*synth_cmd) {
      cfg.sequence.synth = synth_kind;
      cfg.sequence.manifest.clear();
      if (synth_subdivisions >= 0) cfg.sequence.synth_params.subdivisions = synth_subdivisions;
      if (!std::isnan(synth_radius)) cfg.sequence.synth_params.radius = synth_radius;
      if (!std::isnan(synth_growth)) cfg.sequence.synth_params.growth_rate = synth_growth;
      if (!std::isnan(synth_amplitude)) cfg.sequence.synth_params.amplitude = synth_amplitude;
      if (!std::isnan(synth_period)) cfg.sequence.synth_params.period = synth_period;
      if (!std::isnan(synth_frame_dt)) cfg.sequence.frame_dt = synth_frame_dt;
      return cmd_synth(cfg, output_dir, frame_format_from_string(synth_format));
    }

    if (*diffuse_cmd) {
      if (!std::isnan(dt_flag)) cfg.diffusion.dt = dt_flag;
      if (!std::isnan(diff_d)) cfg.diffusion.diffusivity = diff_d;
      if (!std::isnan(diff_t_begin)) cfg.diffusion.t_begin = diff_t_begin;
      if (!std::isnan(diff_t_end)) cfg.diffusion.t_end = diff_t_end;
      if (!diff_initial.empty()) cfg.diffusion.initial = diff_initial;
      if (cfg.diffusion.initial != "uniform" && cfg.diffusion.initial != "coordinate")
        throw ValidationError("diffuse: initial must be 'uniform' or 'coordinate'");
      return cmd_diffuse(cfg, output_dir);
    }

    if (*frap_cmd) {
      if (!std::isnan(dt_flag)) cfg.frap.dt = dt_flag;
      if (!std::isnan(frap_d)) cfg.frap.diffusivity = frap_d;
      if (!std::isnan(frap_duration)) cfg.frap.duration = frap_duration;
      if (!std::isnan(frap_window)) cfg.frap.fit_window = frap_window;
      if (!std::isnan(frap_start_time)) cfg.frap.start_time = frap_start_time;
      if (frap_start_frame >= 0) cfg.frap_start_frame = frap_start_frame;
      if (!std::isnan(frap_radius)) cfg.frap.roi.radius = frap_radius;
      if (frap_center.size() == 3)
        cfg.frap.roi.center = {frap_center[0], frap_center[1], frap_center[2]};
      if (!frap_rule.empty()) cfg.frap.rule = roi_rule_from_string(frap_rule);
      if (!frap_tracking.empty()) cfg.frap.tracking = roi_tracking_from_string(frap_tracking);
      return cmd_frap(cfg, output_dir);
    }

    if (*rds_cmd) {
      if (!std::isnan(dt_flag)) cfg.rds.dt = dt_flag;
      if (rds_cmd->count("--seed")) cfg.rds.seed = seed_flag;
      if (!std::isnan(rds_t_end)) cfg.rds.t_end = rds_t_end;
      if (!std::isnan(rds_gamma)) cfg.rds.params.gamma = rds_gamma;
      if (!std::isnan(rds_perturbation)) cfg.rds.perturbation = rds_perturbation;
      if (!std::isnan(rds_swap)) cfg.rds.swap_interval = rds_swap;
      if (!std::isnan(rds_snapshot)) cfg.rds.snapshot_interval = rds_snapshot;
      if (!std::isnan(rds_stats)) cfg.rds.stats_interval = rds_stats;
      return cmd_rds(cfg, output_dir);
    }

    if (*fit_cmd) return cmd_fit(fit_csv, fit_window);

    throw ValidationError("no subcommand selected");
  } catch (const ValidationError& e) {
    std::cerr << "error(validation): " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error(io): " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error(numerical): " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error(internal): " << e.what() << '\n';
    return 4;
  }
}
