#pragma once

// Manufactured solution u = e^{−t}G1, v = e^{−t}G2 of the forced coupled system.
// e^{−t}G solves w_tt + (−Δ)^σ w + (−Δ)^σ w_t = e^{−t}G for any σ, so the
// forcing only has to cancel the power nonlinearities.

#include <cmath>
#include <vector>

#include "sigmaevo/evolution_engine.hpp"

namespace manufactured {

using namespace sigmaevo;

struct Problem {
  ProblemParams params;
  GridPtr grid;
  SpatialField g1, g2;

  Problem(ProblemParams p, GridPtr g) : params(p), grid(std::move(g)) {
    g1 = sample_radial(grid, [](double r) { return std::exp(-0.5 * r * r); });
    g2 = sample_radial(grid, [](double r) { return 0.5 * std::exp(-0.25 * r * r); });
  }

  SpatialField scaled(const SpatialField& f, double a) const {
    SpatialField out = f;
    for (double& x : out.values) x *= a;
    return out;
  }

  InitialData data() const { return {g1, scaled(g1, -1.0), g2, scaled(g2, -1.0)}; }

  Forcing forcing() const {
    return [this](double t) {
      const double e = std::exp(-t);
      SpatialField fu = scaled(g1, e), fv = scaled(g2, e);
      for (std::size_t i = 0; i < fu.values.size(); ++i) {
        fu.values[i] -= std::pow(std::abs(e * g2.values[i]), params.p1);
        fv.values[i] -= std::pow(std::abs(e * g1.values[i]), params.p2);
      }
      return std::pair{fu, fv};
    };
  }

  // L² distance of the numerical (u, u_t, v, v_t) after one step of length h
  // from the exact state.
  double one_step_error(Scheme scheme, double h) const {
    StepperConfig cfg;
    cfg.scheme = scheme;
    cfg.h = h;
    cfg.dealias = false;
    const auto s = duhamel_step(initial_state(params, data()), params, cfg, forcing());
    const double e = std::exp(-h);
    auto dist = [](SpatialField a, const SpatialField& b, double scale) {
      for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] -= scale * b.values[i];
      return lq_norm(a, 2.0);
    };
    return dist(to_physical(s.u.field_hat), g1, e) + dist(to_physical(s.u.velocity_hat), g1, -e) +
           dist(to_physical(s.v.field_hat), g2, e) + dist(to_physical(s.v.velocity_hat), g2, -e);
  }

  // Observed orders log2(e(h)/e(h/2)) over successive halvings starting at h0.
  std::vector<double> orders(Scheme scheme, double h0, int halvings) const {
    std::vector<double> errs;
    for (int i = 0; i <= halvings; ++i) errs.push_back(one_step_error(scheme, h0 / std::pow(2.0, i)));
    std::vector<double> out;
    for (std::size_t i = 1; i < errs.size(); ++i) out.push_back(std::log2(errs[i - 1] / errs[i]));
    return out;
  }
};

inline Problem standard() {
  return Problem({3, 1.0, 1.0, 2.0, 3.0, 2.0, 1.0}, Grid::make({GridMode::radial, 3, 256, 20.0}));
}

}  // namespace manufactured
