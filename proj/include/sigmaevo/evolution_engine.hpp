#pragma once

// Time integration of
//   u_tt + (−Δ)^{σ1} u + (−Δ)^{σ1} u_t = |v|^{p1},
//   v_tt + (−Δ)^{σ2} v + (−Δ)^{σ2} v_t = |u|^{p2},
// with exact per-mode linear propagation and exponential Duhamel quadrature
// for the sources.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sigmaevo/core.hpp"
#include "sigmaevo/exponent_calculus.hpp"
#include "sigmaevo/multiplier_kernels.hpp"
#include "sigmaevo/norm_series.hpp"
#include "sigmaevo/transforms.hpp"

namespace sigmaevo {

struct ComponentState {
  SpectralField field_hat;
  SpectralField velocity_hat;
  double sigma = 1.0;
};

inline ComponentState make_component(const SpatialField& w0, const SpatialField& w1, double sigma) {
  require_same_grid(w0.grid, w1.grid, "make_component");
  return {to_spectral(w0), to_spectral(w1), sigma};
}

inline ComponentState zero_component(const GridPtr& grid, double sigma) {
  return {SpectralField(grid), SpectralField(grid), sigma};
}

struct CoupledState {
  ComponentState u;
  ComponentState v;
  double t = 0.0;
};

struct InitialData {
  SpatialField u0, u1, v0, v1;
};

inline CoupledState initial_state(const ProblemParams& p, const InitialData& d) {
  require_same_grid(d.u0.grid, d.v0.grid, "initial_state");
  if (d.u0.grid->dimension() != p.n) throw GridMismatch("initial_state: grid dimension differs from n");
  return {make_component(d.u0, d.u1, p.sigma1), make_component(d.v0, d.v1, p.sigma2), 0.0};
}

enum class DataKind { gaussian, bump };

struct DataSpec {
  DataKind kind = DataKind::gaussian;
  double amplitude = 1e-3;
  double width = 1.0;
};

/// amplitude·e^{−r²/(2w²)}, or the compactly supported bump
/// amplitude·e^{1 − 1/(1 − (r/w)²)} on r < w.
inline SpatialField make_profile(const GridPtr& grid, const DataSpec& d) {
  if (!(d.width > 0.0)) throw InvalidParameters("data: width must be positive");
  if (d.kind == DataKind::gaussian)
    return sample_radial(grid, [&](double r) { return d.amplitude * std::exp(-0.5 * r * r / (d.width * d.width)); });
  return sample_radial(grid, [&](double r) {
    const double z = r / d.width;
    return z < 1.0 ? d.amplitude * std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0;
  });
}

/// The same profile in all four data slots.
inline InitialData make_data(const GridPtr& grid, const DataSpec& d) {
  const auto f = make_profile(grid, d);
  return {f, f, f, f};
}

enum class Scheme { frozen, midpoint_etd };

inline const char* to_string(Scheme s) { return s == Scheme::frozen ? "frozen" : "midpoint_etd"; }

struct StepperConfig {
  double h = 0.05;
  Scheme scheme = Scheme::midpoint_etd;
  bool dealias = true;
  int picard_max_iters = 6;
  double picard_tol = 0.0;
  bool nonlinear = true;  // false drops the |·|^p sources
};

inline void validate(const StepperConfig& c) {
  if (!(c.h > 0.0) || !std::isfinite(c.h)) throw InvalidParameters("stepper: h must be positive");
  if (c.picard_max_iters < 1) throw InvalidParameters("stepper: picard_max_iters must be >= 1");
  if (!(c.picard_tol >= 0.0)) throw InvalidParameters("stepper: picard_tol must be >= 0");
}

/// Extra sources (F_u, F_v) added to the right-hand sides, evaluated at time t.
using Forcing = std::function<std::pair<SpatialField, SpatialField>(double)>;

namespace detail {

inline void dealias_in_place(SpectralField& f) {
  const auto& g = *f.grid;
  if (g.spec().mode != GridMode::full) return;
  const int M = g.spec().points;
  const int keep = M / 3;
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    const int kx = g.signed_index(static_cast<int>(idx % M));
    const int ky = g.spec().n == 1 ? 0 : g.signed_index(static_cast<int>(idx / M));
    if (std::abs(kx) > keep || std::abs(ky) > keep) f.values[idx] = 0.0;
  }
}

inline SpatialField pointwise_power(const SpatialField& f, double p) {
  SpatialField out(f.grid);
  for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = std::pow(std::abs(f.values[i]), p);
  return out;
}

inline SpectralField nonlinearity_hat(const SpatialField& f, double p, bool dealias) {
  auto out = to_spectral(pointwise_power(f, p));
  if (dealias) dealias_in_place(out);
  return out;
}

inline void axpy(SpectralField& y, double a, const SpectralField& x) {
  for (std::size_t k = 0; k < y.values.size(); ++k) y.values[k] += a * x.values[k];
}

// One propagation over dt with a source that is linear in time, N0 at the
// start and N1 at the end (N1 == nullptr: constant N0; N0 == nullptr: none).
inline ComponentState propagate(const ComponentState& s, double dt, const SpectralField* N0,
                                const SpectralField* N1) {
  ComponentState out{SpectralField(s.field_hat.grid), SpectralField(s.field_hat.grid), s.sigma};
  const auto rho = s.field_hat.grid->rho();
  for (std::size_t k = 0; k < rho.size(); ++k) {
    const double sym = symbol_power(rho[k], s.sigma);
    const KernelEval ke = kernel_eval_symbol(dt, sym);
    const auto u = s.field_hat.values[k];
    const auto ut = s.velocity_hat.values[k];
    auto nu = ke.k0 * u + ke.k1 * ut;
    auto nut = ke.k0dot * u + ke.k1dot * ut;
    if (N0 != nullptr && dt > 0.0) {
      const DuhamelWeights w = duhamel_weights_symbol(dt, sym, ke);
      const auto n0 = N0->values[k];
      nu += w.first * n0;
      nut += ke.k1 * n0;
      if (N1 != nullptr) {
        const auto slope = (N1->values[k] - n0) / dt;
        nu += w.second * slope;
        nut += w.first * slope;
      }
    }
    out.field_hat.values[k] = nu;
    out.velocity_hat.values[k] = nut;
  }
  return out;
}

inline bool finite(const SpectralField& f) {
  for (const auto& z : f.values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

inline bool finite(const CoupledState& s) {
  return finite(s.u.field_hat) && finite(s.u.velocity_hat) && finite(s.v.field_hat) && finite(s.v.velocity_hat);
}

struct Sources {
  SpectralField u, v;
};

inline Sources sources(const ComponentState& u, const ComponentState& v, double t, const ProblemParams& p,
                       const StepperConfig& cfg, const Forcing& forcing) {
  Sources out{SpectralField(u.field_hat.grid), SpectralField(u.field_hat.grid)};
  if (cfg.nonlinear) {
    out.u = nonlinearity_hat(to_physical(v.field_hat), p.p1, cfg.dealias);
    out.v = nonlinearity_hat(to_physical(u.field_hat), p.p2, cfg.dealias);
  }
  if (forcing) {
    const auto [fu, fv] = forcing(t);
    axpy(out.u, 1.0, to_spectral(fu));
    axpy(out.v, 1.0, to_spectral(fv));
  }
  return out;
}

}  // namespace detail

/// Exact linear flow over dt, per mode.
inline ComponentState linear_evolve(const ComponentState& s, double dt) {
  if (!(dt >= 0.0)) throw InvalidParameters("linear_evolve: dt must be >= 0");
  require_same_grid(s.field_hat.grid, s.velocity_hat.grid, "linear_evolve");
  return detail::propagate(s, dt, nullptr, nullptr);
}

/// Pointwise |f|^p; in full mode with dealias set, truncated by the 2/3 rule.
inline SpatialField nonlinearity(const SpatialField& f, double p_exp, bool dealias = false) {
  if (!(p_exp > 1.0)) throw InvalidParameters("nonlinearity: exponent must be > 1");
  if (dealias && f.grid->spec().mode == GridMode::full) return to_physical(detail::nonlinearity_hat(f, p_exp, true));
  return detail::pointwise_power(f, p_exp);
}

/// One step of length cfg.h (or `h_override` when positive).
inline CoupledState duhamel_step(const CoupledState& s, const ProblemParams& p, const StepperConfig& cfg,
                                 const Forcing& forcing = {}, double h_override = 0.0) {
  validate(cfg);
  const double h = h_override > 0.0 ? h_override : cfg.h;
  const auto n0 = detail::sources(s.u, s.v, s.t, p, cfg, forcing);
  CoupledState out;
  if (cfg.scheme == Scheme::frozen) {
    out.u = detail::propagate(s.u, h, &n0.u, nullptr);
    out.v = detail::propagate(s.v, h, &n0.v, nullptr);
  } else {
    const auto hu = detail::propagate(s.u, 0.5 * h, &n0.u, nullptr);
    const auto hv = detail::propagate(s.v, 0.5 * h, &n0.v, nullptr);
    const auto nm = detail::sources(hu, hv, s.t + 0.5 * h, p, cfg, forcing);
    out.u = detail::propagate(s.u, h, &nm.u, nullptr);
    out.v = detail::propagate(s.v, h, &nm.v, nullptr);
  }
  out.t = s.t + h;
  if (!detail::finite(out)) throw BlowUp(out.t, "state became non-finite at t = " + std::to_string(out.t));
  return out;
}

/// Geometric output cadence t0·10^{k/per_decade} below T, plus 0 and T.
struct OutputSchedule {
  double t0 = 0.1;
  int per_decade = 20;
};

inline std::vector<double> output_times(double T, const OutputSchedule& s) {
  if (!(T > 0.0)) throw InvalidParameters("output_times: horizon must be positive");
  if (!(s.t0 > 0.0) || s.per_decade < 1) throw InvalidParameters("output_times: bad schedule");
  std::vector<double> out{0.0};
  for (int k = 0;; ++k) {
    const double t = s.t0 * std::pow(10.0, static_cast<double>(k) / s.per_decade);
    if (t >= T * (1.0 - 1e-12)) break;
    out.push_back(t);
  }
  out.push_back(T);
  return out;
}

inline const std::vector<std::string>& coupled_columns() {
  static const std::vector<std::string> names{
      "u_Lq", "Dsig_u_Lq", "D2sig_u_Lq", "ut_Lq", "v_Lq",    "Dsig_v_Lq",
      "D2sig_v_Lq", "vt_Lq", "v_Lmp1", "v_Lqp1", "u_Lmp2", "u_Lqp2"};
  return names;
}

/// ‖w‖, ‖|D|^σ w‖, ‖|D|^{2σ} w‖, ‖w_t‖ in L^q.
inline std::vector<double> component_norms(const ComponentState& s, double q) {
  const auto& f = s.field_hat;
  return {lq_norm(to_physical(f), q), lq_norm(to_physical(apply_multiplier(f, riesz_symbol(s.sigma))), q),
          lq_norm(to_physical(apply_multiplier(f, riesz_symbol(2.0 * s.sigma))), q),
          lq_norm(to_physical(s.velocity_hat), q)};
}

inline std::vector<double> record_norms(const CoupledState& s, const ProblemParams& p) {
  auto row = component_norms(s.u, p.q);
  const auto vn = component_norms(s.v, p.q);
  row.insert(row.end(), vn.begin(), vn.end());
  const auto u = to_physical(s.u.field_hat);
  const auto v = to_physical(s.v.field_hat);
  row.push_back(lq_norm(v, p.m * p.p1));
  row.push_back(lq_norm(v, p.q * p.p1));
  row.push_back(lq_norm(u, p.m * p.p2));
  row.push_back(lq_norm(u, p.q * p.p2));
  return row;
}

struct RunResult {
  NormSeries series;
  bool blew_up = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
  std::string blowup_message;
  double boundary_mass = 0.0;  // max over output times, both components
};

inline RunResult run_coupled(const ProblemParams& p, const InitialData& data, double T, const StepperConfig& cfg,
                             const OutputSchedule& schedule = {}, const Forcing& forcing = {}) {
  validate(p);
  validate(cfg);
  CoupledState state = initial_state(p, data);
  RunResult out;
  out.series = NormSeries(coupled_columns());
  auto record = [&](const CoupledState& s) {
    out.series.append(s.t, record_norms(s, p));
    out.boundary_mass = std::max({out.boundary_mass, boundary_mass(to_physical(s.u.field_hat)),
                                  boundary_mass(to_physical(s.v.field_hat))});
  };
  const auto times = output_times(T, schedule);
  record(state);
  try {
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double span = times[k] - state.t;
      const int steps = std::max(1, static_cast<int>(std::ceil(span / cfg.h - 1e-9)));
      const double dt = span / steps;
      for (int i = 0; i < steps; ++i) {
        state = duhamel_step(state, p, cfg, forcing, dt);
      }
      state.t = times[k];
      record(state);
    }
  } catch (const BlowUp& e) {
    out.blew_up = true;
    out.blowup_time = e.time();
    out.blowup_message = e.what();
    out.series.truncated = true;
    out.series.truncated_at = e.time();
  }
  return out;
}

struct PicardResult {
  std::vector<double> distances;  // d_k = sup_t (‖Δu‖_{L^q} + ‖Δv‖_{L^q}) between iterates k and k+1
  bool diverged = false;
  bool converged = false;
  SpatialField u_T, v_T;          // last iterate at the horizon
  SpatialField u_linear_T, v_linear_T;
};

/// Successive substitution w^{k+1} = w_lin + Duhamel[w^k] on a uniform time
/// grid, sources interpolated linearly in time between grid points.
inline PicardResult picard_solve(const ProblemParams& p, const InitialData& data, double T, const StepperConfig& cfg) {
  validate(p);
  validate(cfg);
  if (!(T > 0.0)) throw InvalidParameters("picard_solve: horizon must be positive");
  const CoupledState s0 = initial_state(p, data);
  const GridPtr grid = s0.u.field_hat.grid;
  const int K = std::max(1, static_cast<int>(std::ceil(T / cfg.h - 1e-9)));
  const double dt = T / K;

  std::vector<SpatialField> lin_u(K + 1), lin_v(K + 1);
  for (int k = 0; k <= K; ++k) {
    lin_u[k] = to_physical(linear_evolve(s0.u, k * dt).field_hat);
    lin_v[k] = to_physical(linear_evolve(s0.v, k * dt).field_hat);
  }
  std::vector<SpatialField> corr_u(K + 1, SpatialField(grid)), corr_v(K + 1, SpatialField(grid));

  auto duhamel = [&](const std::vector<SpectralField>& N, double sigma) {
    std::vector<SpatialField> out(K + 1, SpatialField(grid));
    ComponentState d = zero_component(grid, sigma);
    for (int k = 0; k < K; ++k) {
      d = detail::propagate(d, dt, &N[k], &N[k + 1]);
      out[k + 1] = to_physical(d.field_hat);
    }
    return out;
  };

  PicardResult res;
  int increases = 0;
  for (int iter = 0; iter < cfg.picard_max_iters; ++iter) {
    std::vector<SpectralField> Nu(K + 1), Nv(K + 1);
    for (int k = 0; k <= K; ++k) {
      SpatialField u = lin_u[k], v = lin_v[k];
      for (std::size_t i = 0; i < u.values.size(); ++i) {
        u.values[i] += corr_u[k].values[i];
        v.values[i] += corr_v[k].values[i];
      }
      Nu[k] = detail::nonlinearity_hat(v, p.p1, cfg.dealias);
      Nv[k] = detail::nonlinearity_hat(u, p.p2, cfg.dealias);
    }
    auto next_u = duhamel(Nu, p.sigma1);
    auto next_v = duhamel(Nv, p.sigma2);
    double d = 0.0;
    bool finite = true;
    for (int k = 0; k <= K; ++k) {
      SpatialField du(grid), dv(grid);
      for (std::size_t i = 0; i < du.values.size(); ++i) {
        du.values[i] = next_u[k].values[i] - corr_u[k].values[i];
        dv.values[i] = next_v[k].values[i] - corr_v[k].values[i];
        finite = finite && std::isfinite(du.values[i]) && std::isfinite(dv.values[i]);
      }
      if (finite) d = std::max(d, lq_norm(du, p.q) + lq_norm(dv, p.q));
    }
    if (!finite) {
      res.diverged = true;
      break;
    }
    if (!res.distances.empty()) increases = d > res.distances.back() ? increases + 1 : 0;
    res.distances.push_back(d);
    corr_u = std::move(next_u);
    corr_v = std::move(next_v);
    if (increases >= 3) {
      res.diverged = true;
      break;
    }
    if (d <= cfg.picard_tol) {
      res.converged = true;
      break;
    }
  }
  res.u_linear_T = lin_u[K];
  res.v_linear_T = lin_v[K];
  res.u_T = lin_u[K];
  res.v_T = lin_v[K];
  for (std::size_t i = 0; i < res.u_T.values.size(); ++i) {
    res.u_T.values[i] += corr_u[K].values[i];
    res.v_T.values[i] += corr_v[K].values[i];
  }
  return res;
}

}  // namespace sigmaevo
