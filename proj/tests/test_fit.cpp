#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <span>
#include <vector>

#include "oracles.hpp"
#include "surfpde/levenberg_marquardt.hpp"

using namespace surfpde;

namespace {

double recovery_model(double t, std::span<const double> p) {
  return p[0] * (1.0 - std::exp(-t / p[1]));
}

std::vector<double> sample_times(int n, double span) {
  std::vector<double> ts(n);
  for (int i = 0; i < n; ++i) ts[i] = span * static_cast<double>(i) / (n - 1);
  return ts;
}

} // namespace

TEST_CASE("exact model data is recovered to 1e-6") {
  const double a_true = 0.8, b_true = 2.0;
  std::vector<double> ts = sample_times(25, 12.0);
  std::vector<double> ys(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    ys[i] = recovery_model(ts[i], std::vector<double>{a_true, b_true});

  std::vector<double> init = {0.5, 1.0};
  FitResult fit = levenberg_marquardt(recovery_model, ts, ys, init);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.params[0] - a_true) < 1e-6);
  CHECK(std::abs(fit.params[1] - b_true) < 1e-6);
  CHECK(fit.rss < 1e-12);
}

TEST_CASE("linear-in-parameters model matches the normal-equations oracle") {
  // For y = p0 + p1 t the optimum has a closed form; the iterative fitter
  // must land on it regardless of the starting point.
  oracle::Rng rng(99);
  std::vector<double> ts = sample_times(40, 5.0);
  std::vector<double> ys(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) ys[i] = 1.3 - 0.7 * ts[i] + rng.gaussian(0.0, 0.05);

  auto linear_model = [](double t, std::span<const double> p) { return p[0] + p[1] * t; };

  // Normal equations assembled and solved with the independent dense path.
  double s00 = static_cast<double>(ts.size()), s01 = 0, s11 = 0, r0 = 0, r1 = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    s01 += ts[i];
    s11 += ts[i] * ts[i];
    r0 += ys[i];
    r1 += ts[i] * ys[i];
  }
  std::vector<double> x_oracle =
      oracle::solve_dense_or_die({s00, s01, s01, s11}, {r0, r1}, 2);

  std::vector<double> init = {0.0, 0.0};
  FitResult fit = levenberg_marquardt(linear_model, ts, ys, init);
  REQUIRE(fit.converged);
  CHECK(fit.params[0] == Catch::Approx(x_oracle[0]).margin(1e-8));
  CHECK(fit.params[1] == Catch::Approx(x_oracle[1]).margin(1e-8));
}

TEST_CASE("noisy recovery data lands within a few standard errors") {
  const double a_true = 0.73, b_true = 0.54;
  oracle::Rng rng(1234);
  std::vector<double> ts = sample_times(120, 6.0);
  std::vector<double> ys(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    ys[i] = recovery_model(ts[i], std::vector<double>{a_true, b_true}) +
            rng.gaussian(0.0, 0.01 * a_true);

  std::vector<double> init = {0.5, 1.0};
  FitResult fit = levenberg_marquardt(recovery_model, ts, ys, init);
  REQUIRE(fit.converged);
  REQUIRE(fit.stderrs.size() == 2);
  CHECK(fit.stderrs[0] > 0.0);
  CHECK(fit.stderrs[1] > 0.0);
  CHECK(std::abs(fit.params[0] - a_true) < 4.0 * fit.stderrs[0]);
  CHECK(std::abs(fit.params[1] - b_true) < 4.0 * fit.stderrs[1]);
  // 1% noise should produce sub-5% parameter uncertainty on 120 samples.
  CHECK(fit.stderrs[0] < 0.05 * a_true);
  CHECK(fit.stderrs[1] < 0.05 * b_true);
}

TEST_CASE("cost trace never increases") {
  const double a_true = 1.1, b_true = 0.9;
  std::vector<double> ts = sample_times(30, 4.0);
  std::vector<double> ys(ts.size());
  oracle::Rng rng(7);
  for (std::size_t i = 0; i < ts.size(); ++i)
    ys[i] = recovery_model(ts[i], std::vector<double>{a_true, b_true}) +
            rng.gaussian(0.0, 0.02);
  std::vector<double> init = {0.2, 3.0};
  FitResult fit = levenberg_marquardt(recovery_model, ts, ys, init);
  REQUIRE(fit.cost_trace.size() >= 2);
  for (std::size_t i = 1; i < fit.cost_trace.size(); ++i)
    CHECK(fit.cost_trace[i] <= fit.cost_trace[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("input validation") {
  std::vector<double> ts = {0.0, 1.0};
  std::vector<double> ys = {0.0};
  std::vector<double> init = {1.0, 1.0};
  CHECK_THROWS_AS(levenberg_marquardt(recovery_model, ts, ys, init), ValidationError);
  ys = {0.0, 1.0};
  std::vector<double> too_many = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(levenberg_marquardt(recovery_model, std::vector<double>{0.0},
                                      std::vector<double>{0.0}, too_many),
                  ValidationError);
  CHECK_THROWS_AS(levenberg_marquardt(recovery_model, ts, ys, std::vector<double>{}),
                  ValidationError);
}
