#include <gtest/gtest.h>

#include <array>

#include "manufactured.hpp"
#include "sigmaevo/evolution_engine.hpp"

using namespace sigmaevo;

namespace {

const ProblemParams admissible{7, 1.0, 1.0, 9.0, 10.0, 4.0, 1.0};

GridPtr small_radial(int n = 3) { return Grid::make({GridMode::radial, n, 256, 20.0}); }

double max_diff(const SpectralField& a, const SpectralField& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) d = std::max(d, std::abs(a.values[k] - b.values[k]));
  return d;
}

double max_diff(const SpatialField& a, const SpatialField& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) d = std::max(d, std::abs(a.values[k] - b.values[k]));
  return d;
}

}  // namespace

TEST(LinearFlow, Semigroup) {
  const auto g = small_radial();
  const auto f = sample_radial(g, [](double r) { return std::exp(-r * r); });
  const auto f1 = sample_radial(g, [](double r) { return r * std::exp(-r * r); });
  for (double sigma : {1.0, 1.5}) {
    const auto s = make_component(f, f1, sigma);
    const auto once = linear_evolve(s, 2.5);
    const auto twice = linear_evolve(linear_evolve(s, 1.0), 1.5);
    EXPECT_LT(max_diff(once.field_hat, twice.field_hat), 1e-10);
    EXPECT_LT(max_diff(once.velocity_hat, twice.velocity_hat), 1e-10);
    EXPECT_LT(max_diff(linear_evolve(s, 0.0).field_hat, s.field_hat), 0.0 + 1e-300);
  }
  EXPECT_THROW(linear_evolve(make_component(f, f1, 1.0), -1.0), InvalidParameters);
}

TEST(LinearFlow, SingleModeMatchesScalarOde) {
  // A single Fourier mode on a periodic grid evolves by the scalar ODE
  // a'' + s a' + s a = 0 with s = ξ^{2σ}.
  const int M = 64;
  const double L = pi * 4.0;
  const auto g = Grid::make({GridMode::full, 1, M, L});
  const double xi = 3.0 * pi / L;
  SpatialField u0(g), u1(g);
  for (int i = 0; i < M; ++i) {
    const double x = -L + i * 2.0 * L / M;
    u0.values[i] = std::cos(xi * x);
    u1.values[i] = 0.3 * std::cos(xi * x);
  }
  const double sigma = 1.5, t = 2.0, s = std::pow(xi, 2 * sigma);
  std::array<double, 2> y{1.0, 0.3};
  const int steps = 200000;
  const double h = t / steps;
  auto f = [s](const std::array<double, 2>& z) { return std::array<double, 2>{z[1], -s * z[1] - s * z[0]}; };
  for (int i = 0; i < steps; ++i) {
    const auto a = f(y);
    const auto b = f({y[0] + 0.5 * h * a[0], y[1] + 0.5 * h * a[1]});
    const auto c = f({y[0] + 0.5 * h * b[0], y[1] + 0.5 * h * b[1]});
    const auto d = f({y[0] + h * c[0], y[1] + h * c[1]});
    for (int k = 0; k < 2; ++k) y[k] += h / 6.0 * (a[k] + 2 * b[k] + 2 * c[k] + d[k]);
  }
  const auto out = linear_evolve(make_component(u0, u1, sigma), t);
  const auto u = to_physical(out.field_hat), ut = to_physical(out.velocity_hat);
  for (int i = 0; i < M; ++i) {
    EXPECT_NEAR(u.values[i], y[0] * u0.values[i], 1e-9);
    EXPECT_NEAR(ut.values[i], y[1] * u0.values[i], 1e-9);
  }
}

TEST(Nonlinearity, GaussianPower) {
  const auto g = small_radial();
  const auto f = sample_radial(g, [](double r) { return -std::exp(-0.5 * r * r); });
  const auto sq = nonlinearity(f, 2.0);
  for (std::size_t i = 0; i < g->size(); ++i)
    EXPECT_NEAR(sq.values[i], std::exp(-g->radius()[i] * g->radius()[i]), 1e-15);
  EXPECT_THROW(nonlinearity(f, 1.0), InvalidParameters);

  // The 2/3 rule removes the top third of the spectrum in full mode.
  const auto full = Grid::make({GridMode::full, 1, 64, 10.0});
  const auto noisy = sample_radial(full, [](double r) { return std::exp(-r * r) + 0.1; });
  const auto hat = to_spectral(nonlinearity(noisy, 3.0, true));
  for (int k = 0; k < 64; ++k)
    if (std::abs(full->signed_index(k)) > 64 / 3) {
      EXPECT_LT(std::abs(hat.values[k]), 1e-12);
    }
}

TEST(Stepper, ZeroDataStaysZero) {
  const auto g = small_radial();
  const SpatialField z(g);
  const auto r = run_coupled({3, 1, 1, 2, 3, 2, 1}, {z, z, z, z}, 5.0, {}, {0.5, 5});
  ASSERT_FALSE(r.blew_up);
  for (const auto& name : r.series.names())
    for (double v : r.series.column(name)) EXPECT_EQ(v, 0.0);
}

TEST(Stepper, LinearModeMatchesLinearFlow) {
  const auto g = small_radial();
  const auto d = make_data(g, {DataKind::gaussian, 0.5, 1.0});
  StepperConfig cfg;
  cfg.nonlinear = false;
  cfg.h = 0.3;
  const ProblemParams p{3, 1.0, 1.5, 2.0, 3.0, 2.0, 1.0};
  auto s = initial_state(p, d);
  for (int i = 0; i < 10; ++i) s = duhamel_step(s, p, cfg);
  const auto lin = linear_evolve(make_component(d.v0, d.v1, 1.5), 3.0);
  EXPECT_LT(max_diff(s.v.field_hat, lin.field_hat), 1e-10);
  EXPECT_NEAR(s.t, 3.0, 1e-12);
}

TEST(Stepper, ManufacturedLocalOrders) {
  const auto prob = manufactured::standard();
  for (double o : prob.orders(Scheme::frozen, 0.4, 3)) EXPECT_NEAR(o, 2.0, 0.4);
  for (double o : prob.orders(Scheme::midpoint_etd, 0.4, 3)) EXPECT_NEAR(o, 3.0, 0.4);
}

TEST(Stepper, ManufacturedGlobalError) {
  const auto prob = manufactured::standard();
  const double exact = std::exp(-2.0) * lq_norm(prob.g1, 2.0);
  auto error = [&](double h) {
    StepperConfig cfg;
    cfg.h = h;
    cfg.dealias = false;
    const auto r = run_coupled(prob.params, prob.data(), 2.0, cfg, {0.5, 4}, prob.forcing());
    EXPECT_FALSE(r.blew_up);
    return std::abs(r.series.column("u_Lq").back() - exact);
  };
  const double coarse = error(0.1), fine = error(0.05);
  EXPECT_LT(fine, 1e-3 * exact);
  EXPECT_NEAR(std::log2(coarse / fine), 2.0, 0.4);
}

TEST(Stepper, Deterministic) {
  const auto g = Grid::make({GridMode::radial, 7, 128, 40.0});
  const auto d = make_data(g, {DataKind::gaussian, 0.2, 1.0});
  StepperConfig cfg;
  cfg.h = 0.1;
  const auto a = run_coupled(admissible, d, 3.0, cfg, {0.1, 5});
  const auto b = run_coupled(admissible, d, 3.0, cfg, {0.1, 5});
  EXPECT_EQ(a.series.to_csv(), b.series.to_csv());
}

TEST(Stepper, OutputTimes) {
  const auto t = output_times(100.0, {1.0, 10});
  ASSERT_EQ(t.size(), 22u);
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_EQ(t[1], 1.0);
  EXPECT_NEAR(t[11], 10.0, 1e-12);
  EXPECT_EQ(t.back(), 100.0);
  EXPECT_THROW(output_times(0.0, {}), InvalidParameters);
}

TEST(Stepper, BlowUpIsReported) {
  const auto g = Grid::make({GridMode::full, 1, 256, 40.0});
  const auto d = make_data(g, {DataKind::gaussian, 20.0, 2.0});
  StepperConfig cfg;
  cfg.h = 0.01;
  const auto r = run_coupled({1, 1, 1, 2, 2, 2, 1}, d, 10.0, cfg, {0.1, 20});
  EXPECT_TRUE(r.blew_up);
  EXPECT_GT(r.blowup_time, 0.0);
  EXPECT_LT(r.blowup_time, 10.0);
  EXPECT_TRUE(r.series.truncated);
  EXPECT_LT(r.series.times().back(), r.blowup_time);
}

TEST(Stepper, RejectsMismatchedData) {
  const auto a = small_radial(3);
  const auto b = small_radial(5);
  const SpatialField za(a), zb(b);
  EXPECT_THROW(initial_state({3, 1, 1, 2, 2, 2, 1}, {za, za, zb, zb}), GridMismatch);
  EXPECT_THROW(initial_state({5, 1, 1, 2, 2, 2, 1}, {za, za, za, za}), GridMismatch);
  StepperConfig bad;
  bad.h = 0.0;
  EXPECT_THROW(validate(bad), InvalidParameters);
}

TEST(Picard, ZeroDataHasZeroDistances) {
  const auto g = small_radial();
  const SpatialField z(g);
  StepperConfig cfg;
  cfg.h = 0.5;
  const auto r = picard_solve({3, 1, 1, 2, 3, 2, 1}, {z, z, z, z}, 2.0, cfg);
  ASSERT_EQ(r.distances.size(), 1u);
  EXPECT_EQ(r.distances[0], 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(Picard, ContractsAndMatchesStepper) {
  const auto g = Grid::make({GridMode::radial, 3, 256, 20.0});
  const auto d = make_data(g, {DataKind::gaussian, 0.5, 1.0});
  const ProblemParams p{3, 1.0, 1.0, 2.0, 3.0, 2.0, 1.0};
  StepperConfig cfg;
  cfg.h = 0.02;
  cfg.dealias = false;
  const auto r = picard_solve(p, d, 2.0, cfg);
  ASSERT_GE(r.distances.size(), 3u);
  EXPECT_FALSE(r.diverged);
  for (std::size_t k = 2; k < r.distances.size(); ++k) {
    if (r.distances[k - 1] == 0.0) break;
    EXPECT_LT(r.distances[k], r.distances[k - 1]);
  }
  const auto run = run_coupled(p, d, 2.0, cfg, {1.0, 1});
  const double u_lq = lq_norm(r.u_T, p.q);
  EXPECT_NEAR(u_lq, run.series.column("u_Lq").back(), 1e-4 * u_lq);
  // The first iterate is the linear flow; the nonlinearity must show up at T.
  EXPECT_GT(max_diff(r.u_T, r.u_linear_T), 1e-6);
}
