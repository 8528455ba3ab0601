#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "surfpde/io/csv.hpp"
#include "surfpde/io/off.hpp"
#include "surfpde/surface_mesh.hpp"

using namespace surfpde;
using Catch::Matchers::ContainsSubstring;

namespace {

/// Unique scratch directory, removed when the test section ends.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("surfpde_cli_" + std::to_string(counter.fetch_add(1)) + "_" +
            std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs the command-line tool with the given arguments, capturing streams.
CommandResult run_cli(const TempDir& dir, const std::string& args) {
  const std::string out_path = dir.file("_stdout.txt");
  const std::string err_path = dir.file("_stderr.txt");
  const std::string cmd = std::string("\"") + SURFPDE_CLI_PATH + "\" " + args + " >\"" +
                          out_path + "\" 2>\"" + err_path + "\"";
  const int status = std::system(cmd.c_str());
  CommandResult r;
  if (status != -1 && WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

} // namespace

TEST_CASE("cli help and usage errors") {
  TempDir dir;
  SECTION("--help exits cleanly and lists the subcommands") {
    CommandResult r = run_cli(dir, "--help");
    CHECK(r.exit_code == 0);
    for (const char* name : {"info", "synth", "diffuse", "frap", "rds", "fit"})
      CHECK_THAT(r.out, ContainsSubstring(name));
  }
  SECTION("unknown flag exits 2 with a usage error") {
    CommandResult r = run_cli(dir, "synth --no-such-flag");
    CHECK(r.exit_code == 2);
    CHECK(r.err.rfind("error(usage):", 0) == 0);
    CHECK_THAT(r.err, ContainsSubstring("--help"));
  }
  SECTION("missing subcommand exits 2") {
    CommandResult r = run_cli(dir, "");
    CHECK(r.exit_code == 2);
    CHECK(r.err.rfind("error(usage):", 0) == 0);
  }
  SECTION("unknown subcommand exits 2") {
    CommandResult r = run_cli(dir, "frobnicate");
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("cli io and validation failures use distinct exit codes") {
  TempDir dir;
  SECTION("missing manifest file exits 3 as an io error") {
    CommandResult r = run_cli(dir, "info --manifest " + dir.file("ghost.json"));
    CHECK(r.exit_code == 3);
    CHECK(r.err.rfind("error(io):", 0) == 0);
  }
  SECTION("static sequence without an end time exits 3 as validation") {
    CommandResult r =
        run_cli(dir, "diffuse --synth static_sphere --subdivisions 0 --output-dir " +
                         dir.file("out"));
    CHECK(r.exit_code == 3);
    CHECK(r.err.rfind("error(validation):", 0) == 0);
  }
  SECTION("config files fail closed on unknown keys") {
    std::ofstream(dir.file("bad.json")) << R"({"rds": {"gama": 1.0}})";
    CommandResult r = run_cli(dir, "rds --config " + dir.file("bad.json") +
                                       " --synth static_sphere --subdivisions 0 --t-end 0.001");
    CHECK(r.exit_code == 3);
    CHECK(r.err.rfind("error(validation):", 0) == 0);
    CHECK_THAT(r.err, ContainsSubstring("unknown key 'gama'"));
  }
  SECTION("info requires exactly one input") {
    CommandResult r = run_cli(dir, "info");
    CHECK(r.exit_code == 3);
    CHECK(r.err.rfind("error(validation):", 0) == 0);
  }
}

TEST_CASE("cli synth writes frames, manifest, and resolved config") {
  TempDir dir;
  const std::string out = dir.file("sphere");
  CommandResult r = run_cli(
      dir, "synth --kind static_sphere --subdivisions 3 --output-dir " + out);
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("wrote 1 frame(s)"));
  CHECK_THAT(r.out, ContainsSubstring("642 vertices"));
  CHECK(std::filesystem::exists(out + "/frame_0000.off"));
  CHECK(std::filesystem::exists(out + "/manifest.json"));
  CHECK(std::filesystem::exists(out + "/resolved-config.json"));

  SECTION("info reads the manifest back") {
    CommandResult info = run_cli(dir, "info --manifest " + out + "/manifest.json");
    REQUIRE(info.exit_code == 0);
    CHECK_THAT(info.out, ContainsSubstring("frame\ttime_s\tvertices"));
    CHECK_THAT(info.out, ContainsSubstring("642\t1280\t2"));
    CHECK_THAT(info.out, ContainsSubstring("ok"));
  }
  SECTION("info reads a single frame file directly") {
    CommandResult info = run_cli(dir, "info --mesh " + out + "/frame_0000.off");
    REQUIRE(info.exit_code == 0);
    CHECK_THAT(info.out, ContainsSubstring("642\t1280\t2"));
  }
  SECTION("binary frames autodetect through the same pipeline") {
    const std::string bout = dir.file("bsphere");
    CommandResult bs = run_cli(dir,
                               "synth --kind static_sphere --subdivisions 1 --format boff "
                               "--output-dir " +
                                   bout);
    REQUIRE(bs.exit_code == 0);
    CHECK(std::filesystem::exists(bout + "/frame_0000.boff"));
    CommandResult info = run_cli(dir, "info --manifest " + bout + "/manifest.json");
    REQUIRE(info.exit_code == 0);
    CHECK_THAT(info.out, ContainsSubstring("42\t80\t2"));
  }
  SECTION("expanding sequences carry explicit frame times") {
    const std::string eout = dir.file("egrow");
    CommandResult es = run_cli(dir,
                               "synth --kind expanding_sphere --subdivisions 1 --frames 3 "
                               "--frame-dt 0.5 --output-dir " +
                                   eout);
    REQUIRE(es.exit_code == 0);
    auto manifest = nlohmann::json::parse(slurp(eout + "/manifest.json"));
    REQUIRE(manifest.at("frames").size() == 3);
    CHECK(manifest.at("frames").at(2).at("time").get<double>() == 1.0);
  }
}

TEST_CASE("cli diffuse conserves mass on a static sphere") {
  TempDir dir;
  const std::string out = dir.file("diff");
  CommandResult r = run_cli(dir,
                            "diffuse --synth static_sphere --subdivisions 1 --diffusivity 1 "
                            "--initial coordinate --dt 0.005 --t-end 0.02 --output-dir " +
                                out);
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("diffusion run: 4 steps"));
  REQUIRE(std::filesystem::exists(out + "/summary.json"));
  CHECK(std::filesystem::exists(out + "/final.vtk"));
  CHECK(std::filesystem::exists(out + "/resolved-config.json"));

  auto summary = nlohmann::json::parse(slurp(out + "/summary.json"));
  CHECK(summary.at("steps").get<int>() == 4);
  CHECK(summary.at("diffusivity").get<double>() == 1.0);
  CHECK(summary.at("max_relative_mass_drift").get<double>() < 1e-8);
  const std::string vtk = slurp(out + "/final.vtk");
  CHECK_THAT(vtk, ContainsSubstring("SCALARS u double 1"));
}

TEST_CASE("cli frap produces a recovery trace and fit report") {
  TempDir dir;
  const std::string out = dir.file("frap");
  CommandResult r = run_cli(dir,
                            "frap --synth static_sphere --subdivisions 1 --duration 2 "
                            "--fit-window 2 --dt 0.1 --roi-center 1 0 0 --roi-radius 0.8 "
                            "--output-dir " +
                                out);
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("bleached fraction:"));
  CHECK_THAT(r.out, ContainsSubstring("T_half"));
  REQUIRE(std::filesystem::exists(out + "/recovery.csv"));
  REQUIRE(std::filesystem::exists(out + "/frap-report.json"));

  std::vector<RecoverySample> rows = read_recovery_csv(out + "/recovery.csv");
  REQUIRE(rows.size() == 21);
  CHECK(rows.front().time_s == 0.0);
  CHECK(rows.back().time_s == 2.0);
  CHECK(rows.front().mean_concentration < rows.back().mean_concentration);

  auto report = nlohmann::json::parse(slurp(out + "/frap-report.json"));
  CHECK(report.at("roi_elements").get<int>() > 0);
  const double f = report.at("bleached_area_fraction").get<double>();
  CHECK(f > 0.0);
  CHECK(f < 0.5);
  CHECK(report.at("samples").get<int>() == 21);
}

TEST_CASE("cli rds runs a short pattern simulation") {
  TempDir dir;
  const std::string out = dir.file("rds");
  CommandResult r = run_cli(dir,
                            "rds --synth static_sphere --subdivisions 0 --dt 0.001 "
                            "--t-end 0.002 --snapshot-interval 0.002 --stats-interval 0.001 "
                            "--output-dir " +
                                out);
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("pattern run to t=0.002"));
  REQUIRE(std::filesystem::exists(out + "/rds-report.json"));
  CHECK(std::filesystem::exists(out + "/snapshot_0000.vtk"));
  CHECK(std::filesystem::exists(out + "/snapshot_0001.vtk"));

  auto report = nlohmann::json::parse(slurp(out + "/rds-report.json"));
  CHECK(report.at("seed").get<std::uint64_t>() == 42);
  CHECK(report.at("steady_state").at("u").get<double>() == 1.0);
  CHECK(report.at("stats").size() == 3);
  const std::string vtk = slurp(out + "/snapshot_0000.vtk");
  CHECK_THAT(vtk, ContainsSubstring("SCALARS u double 1"));
  CHECK_THAT(vtk, ContainsSubstring("SCALARS w double 1"));
}

TEST_CASE("cli fit recovers the generating parameters from a csv") {
  TempDir dir;
  const double amplitude = 0.8;
  const double timescale = 2.0;
  std::vector<double> ts, ys, areas;
  for (int i = 0; i <= 120; ++i) {
    const double t = 0.1 * i;
    ts.push_back(t);
    ys.push_back(amplitude * (1.0 - std::exp(-t / timescale)));
    areas.push_back(1.0);
  }
  write_recovery_csv(dir.file("trace.csv"), ts, ys, areas);

  CommandResult r = run_cli(dir, "fit --csv " + dir.file("trace.csv"));
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("samples = 121"));
  CHECK_THAT(r.out, ContainsSubstring("converged = true"));
  CHECK(r.out.find("degenerate") == std::string::npos);

  // The printed half-time must equal timescale * ln 2 to fit precision.
  const auto pos = r.out.find("T_half = ");
  REQUIRE(pos != std::string::npos);
  const double printed = std::strtod(r.out.c_str() + pos + 9, nullptr);
  CHECK(printed == Catch::Approx(timescale * std::numbers::ln2_v<double>).epsilon(1e-6));

  SECTION("missing csv exits 3") {
    CommandResult miss = run_cli(dir, "fit --csv " + dir.file("ghost.csv"));
    CHECK(miss.exit_code == 3);
    CHECK(miss.err.rfind("error(io):", 0) == 0);
  }
}
