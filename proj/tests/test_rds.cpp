#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "surfpde/icosphere.hpp"
#include "surfpde/rds.hpp"
#include "surfpde/stepping.hpp"

using namespace surfpde;

namespace {

MeshSequence static_sphere(int level) {
  SurfaceMesh f = icosphere(level);
  f.frame_time = 0.0;
  return MeshSequence::from_frames({f});
}

std::vector<Tri> connectivity_of(const MeshSequence& seq) {
  return std::vector<Tri>(seq.connectivity().begin(), seq.connectivity().end());
}

double integral_of(const MeshSequence& seq, std::span<const Vec3> positions,
                   std::span<const double> field) {
  ElementGeometry geom = element_geometry(positions, seq.connectivity());
  return integrate(seq.connectivity(), geom, field);
}

} // namespace

TEST_CASE("kinetics equilibrium") {
  SchnakenbergParams params; // a = 0.1, b = 0.9
  SteadyState s = steady_state(params);
  CHECK(s.u == 1.0);
  CHECK(s.w == 0.9);
  // Both reaction terms vanish identically there.
  CHECK(params.gamma * (params.a - s.u + s.u * s.u * s.w) == 0.0);
  CHECK(params.gamma * (params.b - s.u * s.u * s.w) == 0.0);

  SchnakenbergParams bad;
  bad.a = -1.0;
  bad.b = 1.0;
  CHECK_THROWS_AS(steady_state(bad), ValidationError);
}

TEST_CASE("perturbed initial state is reproducible and bounded") {
  SchnakenbergParams params;
  auto [u1, w1] = perturbed_initial(500, params, 0.1, 42);
  auto [u2, w2] = perturbed_initial(500, params, 0.1, 42);
  CHECK(u1 == u2);
  CHECK(w1 == w2);
  auto [u3, w3] = perturbed_initial(500, params, 0.1, 43);
  CHECK(u3 != u1);

  SteadyState s = steady_state(params);
  double u_min = 1e9, u_max = -1e9;
  for (double v : u1) {
    u_min = std::min(u_min, v);
    u_max = std::max(u_max, v);
    CHECK(v >= s.u * 0.9);
    CHECK(v <= s.u * 1.1);
  }
  // The amplitude is actually used, not just bounded.
  CHECK(u_max - u_min > 0.05 * s.u);
  for (double v : w1) {
    CHECK(v >= s.w * 0.9);
    CHECK(v <= s.w * 1.1);
  }
  CHECK_THROWS_AS(perturbed_initial(10, params, 1.5, 1), ValidationError);
}

TEST_CASE("uniform steady state is an exact fixed point of the stepper") {
  MeshSequence seq = static_sphere(2);
  SchnakenbergParams params;
  SteadyState s = steady_state(params);
  std::vector<double> u(seq.vertex_count(), s.u);
  std::vector<double> w(seq.vertex_count(), s.w);

  RdsStepper stepper(connectivity_of(seq), seq.positions_at(0.0), params);
  for (int k = 0; k < 100; ++k) stepper.advance(seq.positions_at(0.0), 1e-3, u, w);
  for (std::size_t j = 0; j < u.size(); ++j) {
    CHECK(std::abs(u[j] - s.u) < 1e-10);
    CHECK(std::abs(w[j] - s.w) < 1e-10);
  }
}

TEST_CASE("single semi-implicit step converges to the ODE oracle") {
  // Reference: Heun's method (second order, so its own error is negligible
  // at a thousandfold smaller step) applied to the semi-discrete system
  // M x' = -D S x + M f(x), inverting the mass matrix densely. One
  // linearized implicit step has local error O(dt^2), so halving dt must
  // shrink the defect about fourfold. The quadratic regime is only visible
  // on time scales the step resolves, so the initial data must be smooth:
  // the stiffest mode here has d_w * lambda_max ~ 6e2, and rough random
  // data would put dt * d_w * lambda_max near 1, where backward Euler
  // legitimately degrades to first order.
  MeshSequence seq = static_sphere(1);
  SchnakenbergParams params;
  params.gamma = 20.0;

  const std::size_t n = seq.vertex_count();
  SteadyState equilibrium = steady_state(params);
  std::vector<double> u0(n), w0(n);
  std::span<const Vec3> pos0 = seq.frame_positions(0);
  for (std::size_t j = 0; j < n; ++j) {
    u0[j] = equilibrium.u * (1.0 + 0.1 * pos0[j].x);
    w0[j] = equilibrium.w * (1.0 - 0.1 * pos0[j].z);
  }
  FemPattern pattern = FemPattern::build(static_cast<int>(n), seq.connectivity());
  ElementGeometry geom = element_geometry(seq.positions_at(0.0), seq.connectivity());
  std::vector<double> mass_dense = oracle::to_dense(assemble_mass(pattern, geom));
  std::vector<double> stiff_dense = oracle::to_dense(assemble_stiffness(pattern, geom));

  // Time derivative of (u, w) under the semi-discrete system.
  auto ode_rhs = [&](const std::vector<double>& u, const std::vector<double>& w) {
    std::vector<double> su = oracle::dense_multiply(stiff_dense, u, n);
    std::vector<double> sw = oracle::dense_multiply(stiff_dense, w, n);
    for (std::size_t j = 0; j < n; ++j) {
      su[j] *= -params.d_u;
      sw[j] *= -params.d_w;
    }
    std::vector<double> du = oracle::solve_dense_or_die(mass_dense, su, n);
    std::vector<double> dw = oracle::solve_dense_or_die(mass_dense, sw, n);
    for (std::size_t j = 0; j < n; ++j) {
      const double uu = u[j], ww = w[j];
      du[j] += params.gamma * (params.a - uu + uu * uu * ww);
      dw[j] += params.gamma * (params.b - uu * uu * ww);
    }
    return std::pair{du, dw};
  };

  auto oracle_evolve = [&](double t_final, double dt_oracle) {
    std::vector<double> u = u0, w = w0;
    int steps = static_cast<int>(std::round(t_final / dt_oracle));
    for (int k = 0; k < steps; ++k) {
      auto [du, dw] = ode_rhs(u, w);
      std::vector<double> up(n), wp(n);
      for (std::size_t j = 0; j < n; ++j) {
        up[j] = u[j] + dt_oracle * du[j];
        wp[j] = w[j] + dt_oracle * dw[j];
      }
      auto [dup, dwp] = ode_rhs(up, wp);
      for (std::size_t j = 0; j < n; ++j) {
        u[j] += 0.5 * dt_oracle * (du[j] + dup[j]);
        w[j] += 0.5 * dt_oracle * (dw[j] + dwp[j]);
      }
    }
    return std::pair{u, w};
  };

  auto implicit_step = [&](double dt) {
    std::vector<double> u = u0, w = w0;
    rds_step(seq.connectivity(), seq.positions_at(0.0), seq.positions_at(0.0), dt, params, u, w);
    return std::pair{u, w};
  };

  auto max_err = [&](const std::pair<std::vector<double>, std::vector<double>>& got,
                     const std::pair<std::vector<double>, std::vector<double>>& want) {
    double e = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      e = std::max(e, std::abs(got.first[j] - want.first[j]));
      e = std::max(e, std::abs(got.second[j] - want.second[j]));
    }
    return e;
  };

  const double dt = 5e-4;
  double err_full = max_err(implicit_step(dt), oracle_evolve(dt, dt / 2000.0));
  double err_half = max_err(implicit_step(dt / 2), oracle_evolve(dt / 2, dt / 4000.0));
  CHECK(err_full < 1e-3);
  CHECK(err_full / err_half > 3.0);
  CHECK(err_full / err_half < 5.5);
}

TEST_CASE("gamma = 0 decouples the system into two scalar diffusions") {
  MeshSequence seq = static_sphere(2);
  SchnakenbergParams params;
  params.gamma = 0.0;
  params.d_u = 1.0;
  params.d_w = 10.0;

  auto [u0, w0] = perturbed_initial(seq.vertex_count(), SchnakenbergParams{}, 0.1, 9);
  const double dt = 0.01;
  const int steps = 5;

  std::vector<double> u = u0, w = w0;
  RdsStepper stepper(connectivity_of(seq), seq.positions_at(0.0), params);
  for (int k = 0; k < steps; ++k) stepper.advance(seq.positions_at(0.0), dt, u, w);

  std::vector<double> u_scalar =
      run_diffusion(seq, u0, params.d_u, dt, 0.0, steps * dt, {}, [](const DiffusionSample&) {});
  std::vector<double> w_scalar =
      run_diffusion(seq, w0, params.d_w, dt, 0.0, steps * dt, {}, [](const DiffusionSample&) {});

  for (std::size_t j = 0; j < u.size(); ++j) {
    CHECK(u[j] == Catch::Approx(u_scalar[j]).margin(1e-8));
    CHECK(w[j] == Catch::Approx(w_scalar[j]).margin(1e-8));
  }
}

TEST_CASE("equal diffusivities and no reaction keep equal fields equal") {
  MeshSequence seq = static_sphere(1);
  SchnakenbergParams params;
  params.gamma = 0.0;
  params.d_u = params.d_w = 2.0;
  auto [u0, w0] = perturbed_initial(seq.vertex_count(), SchnakenbergParams{}, 0.1, 10);
  std::vector<double> u = u0, w = u0; // identical start
  RdsStepper stepper(connectivity_of(seq), seq.positions_at(0.0), params);
  for (int k = 0; k < 10; ++k) stepper.advance(seq.positions_at(0.0), 0.01, u, w);
  for (std::size_t j = 0; j < u.size(); ++j) CHECK(u[j] == Catch::Approx(w[j]).margin(1e-12));
}

TEST_CASE("per-field mass conservation holds exactly iff the reaction is off") {
  SynthParams sp;
  sp.subdivisions = 2;
  sp.amplitude = 0.2;
  sp.period = 1.0;
  MeshSequence seq = synth_sequence(SynthKind::oscillating_ellipsoid, sp, 11, 0.1);
  auto [u0, w0] = perturbed_initial(seq.vertex_count(), SchnakenbergParams{}, 0.1, 11);
  const double dt = 0.01;

  SECTION("gamma = 0 conserves both integrals on a moving mesh") {
    SchnakenbergParams params;
    params.gamma = 0.0;
    std::vector<double> u = u0, w = w0;
    RdsStepper stepper(connectivity_of(seq), seq.positions_at(0.0), params);
    const double mu0 = integral_of(seq, seq.positions_at(0.0), u0);
    const double mw0 = integral_of(seq, seq.positions_at(0.0), w0);
    for (int k = 1; k <= 20; ++k) {
      stepper.advance(seq.positions_at(k * dt), dt, u, w);
      CHECK(std::abs(integral_of(seq, seq.positions_at(k * dt), u) - mu0) < 1e-8 * mu0);
      CHECK(std::abs(integral_of(seq, seq.positions_at(k * dt), w) - mw0) < 1e-8 * mw0);
    }
  }
  SECTION("gamma > 0 sources and sinks mass") {
    SchnakenbergParams params; // gamma = 200
    // The linearized kinetics scale with dt * gamma, so the step must resolve
    // the reaction time scale for the solver to stay well conditioned.
    const double dt_fast = 1e-3;
    std::vector<double> u = u0, w = w0;
    RdsStepper stepper(connectivity_of(seq), seq.positions_at(0.0), params);
    const double mu0 = integral_of(seq, seq.positions_at(0.0), u0);
    double drift = 0.0;
    for (int k = 1; k <= 10; ++k) {
      stepper.advance(seq.positions_at(k * dt_fast), dt_fast, u, w);
      drift = std::max(drift,
                       std::abs(integral_of(seq, seq.positions_at(k * dt_fast), u) - mu0) / mu0);
    }
    CHECK(drift > 1e-6);
  }
}

TEST_CASE("full run reports stats and snapshots on schedule") {
  MeshSequence seq = static_sphere(1);
  RdsConfig config;
  config.dt = 0.01;
  config.t_end = 0.1;
  config.stats_interval = 0.05;
  config.snapshot_interval = 0.05;
  config.perturbation = 0.0;
  config.seed = 1;

  std::vector<double> snapshot_times;
  RdsRunResult result = run_rds(seq, config, [&](const RdsSnapshot& snap) {
    snapshot_times.push_back(snap.time);
    CHECK(snap.positions.size() == seq.vertex_count());
    CHECK(snap.u.size() == seq.vertex_count());
    CHECK(snap.w.size() == seq.vertex_count());
  });

  REQUIRE(!result.stats.empty());
  CHECK(result.stats.front().time == 0.0);
  CHECK(result.stats.back().time == Catch::Approx(0.1));
  CHECK(result.snapshot_times == snapshot_times);
  REQUIRE(snapshot_times.size() >= 2);
  CHECK(snapshot_times.front() == 0.0);

  // Unperturbed start stays at the uniform equilibrium.
  SteadyState s = steady_state(config.params);
  CHECK(result.stats.back().u.mean == Catch::Approx(s.u).margin(1e-9));
  CHECK(result.stats.back().u.std_dev == Catch::Approx(0.0).margin(1e-9));
  CHECK(result.u.size() == seq.vertex_count());
  CHECK(result.w.size() == seq.vertex_count());
}

TEST_CASE("recorded sequences are retimed by the swap interval") {
  SynthParams sp;
  sp.subdivisions = 1;
  sp.amplitude = 0.05;
  sp.period = 4.0;
  // Frames recorded 1 s apart; the run remaps them to 0.02 s apart.
  MeshSequence seq = synth_sequence(SynthKind::oscillating_ellipsoid, sp, 3, 1.0);

  RdsConfig config;
  config.dt = 0.01;
  config.swap_interval = 0.02;
  config.stats_interval = 0.02;
  config.snapshot_interval = 1.0;

  SECTION("covered span runs") {
    config.t_end = 0.04;
    RdsRunResult result = run_rds(seq, config);
    CHECK(result.stats.back().time == Catch::Approx(0.04));
  }
  SECTION("uncovered span is rejected") {
    config.t_end = 0.05;
    CHECK_THROWS_AS(run_rds(seq, config), ValidationError);
  }
}

TEST_CASE("run validation") {
  MeshSequence seq = static_sphere(0);
  RdsConfig config;
  SECTION("dt must be positive") {
    config.dt = 0.0;
    CHECK_THROWS_AS(run_rds(seq, config), ValidationError);
  }
  SECTION("swap interval must cover a step") {
    config.dt = 0.5;
    config.swap_interval = 0.1;
    CHECK_THROWS_AS(run_rds(seq, config), ValidationError);
  }
  SECTION("negative end time") {
    config.t_end = -1.0;
    CHECK_THROWS_AS(run_rds(seq, config), ValidationError);
  }
}
