#pragma once

// Envelope checks, rate fits and the weighted sup norm used to monitor
// boundedness of solutions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sigmaevo/core.hpp"
#include "sigmaevo/evolution_engine.hpp"
#include "sigmaevo/exponent_calculus.hpp"
#include "sigmaevo/multiplier_kernels.hpp"
#include "sigmaevo/norm_series.hpp"
#include "sigmaevo/transforms.hpp"

namespace sigmaevo {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

struct WeightSpec {
  Scenario scenario = Scenario::none;
  std::vector<std::pair<std::string, double>> exponents;  // column → e, weight (1+τ)^e

  double exponent(const std::string& column) const {
    for (const auto& [c, e] : exponents)
      if (c == column) return e;
    throw MissingColumn(column);
  }
};

/// Order per component: L^q, |D|^σ, time derivative, |D|^{2σ}.
inline WeightSpec build_weights(const ProblemParams& p, const TheoremVerdict& v, const DerivedConstants& c) {
  if (v.scenario == Scenario::none) throw InvalidParameters("build_weights: no existence result applies");
  const auto rates = predicted_rates(p, v, c);
  WeightSpec w;
  w.scenario = v.scenario;
  w.exponents = {{"u_Lq", rates.u.rate_lq},   {"Dsig_u_Lq", rates.u.rate_mid}, {"ut_Lq", rates.u.rate_mid},
                 {"D2sig_u_Lq", rates.u.rate_top}, {"v_Lq", rates.v.rate_lq},   {"Dsig_v_Lq", rates.v.rate_mid},
                 {"vt_Lq", rates.v.rate_mid},  {"D2sig_v_Lq", rates.v.rate_top}};
  return w;
}

/// sup over recorded τ <= t_max of Σ_columns (1+τ)^{−e}·value.
inline double x_norm(const NormSeries& s, const WeightSpec& w,
                     double t_max = std::numeric_limits<double>::infinity()) {
  std::vector<const std::vector<double>*> cols;
  for (const auto& [name, e] : w.exponents) cols.push_back(&s.column(name));
  double out = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.times()[i];
    if (t > t_max) break;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) acc += std::pow(1.0 + t, -w.exponents[c].second) * (*cols[c])[i];
    out = std::max(out, acc);
  }
  return out;
}

struct Window {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

struct RateFit {
  double slope = nan_value;
  double std_error = nan_value;
  std::size_t samples = 0;
};

/// OLS slope of log(value) against log(1+t) over the window.
inline RateFit fit_rate(const NormSeries& s, const std::string& column, const Window& w) {
  const auto& v = s.column(column);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.times()[i];
    if (t < w.lo || t > w.hi) continue;
    if (!(v[i] > 0.0)) throw InvalidParameters("fit_rate: nonpositive value in window for " + column);
    xs.push_back(std::log1p(t));
    ys.push_back(std::log(v[i]));
  }
  if (xs.size() < 8) throw InvalidParameters("fit_rate: fewer than 8 samples in window for " + column);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  RateFit f;
  f.samples = xs.size();
  f.slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - my - f.slope * (xs[i] - mx);
    ssr += res * res;
  }
  f.std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  return f;
}

struct EnvelopeResult {
  std::string column;
  double exponent = 0.0;
  double constant = nan_value;      // sup over the window of value/(1+t)^e
  double sup_early = nan_value;     // over [T/4, T/2]
  double sup_late = nan_value;      // over [T/2, T]
  double slope = nan_value;         // fitted over the window, NaN when not fittable
  double slope_stderr = nan_value;
  bool pass = false;
};

/// Envelope semantics: passes iff the sup of value/(1+t)^e over [T/2, T]
/// exceeds the sup over [T/4, T/2] by less than 10%, T = window.hi clipped to
/// the last sample.
inline EnvelopeResult envelope_check(const NormSeries& s, const std::string& column, double exponent,
                                     Window window = {}) {
  const auto& v = s.column(column);
  EnvelopeResult r;
  r.column = column;
  r.exponent = exponent;
  if (s.empty()) throw InvalidParameters("envelope_check: empty series");
  const double T = std::min(window.hi, s.times().back());
  double early = -1.0, late = -1.0, all = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.times()[i];
    if (t < window.lo || t > T) continue;
    const double ratio = v[i] / std::pow(1.0 + t, exponent);
    if (!std::isfinite(ratio)) finite = false;
    all = std::max(all, ratio);
    if (t >= 0.25 * T && t <= 0.5 * T) early = std::max(early, ratio);
    if (t >= 0.5 * T) late = std::max(late, ratio);
  }
  if (early < 0.0 || late < 0.0) throw InvalidParameters("envelope_check: window does not cover [T/4, T]");
  r.constant = all;
  r.sup_early = early;
  r.sup_late = late;
  r.pass = finite && (late == 0.0 || late < 1.1 * early);
  try {
    const auto fit = fit_rate(s, column, {window.lo, T});
    r.slope = fit.slope;
    r.slope_stderr = fit.std_error;
  } catch (const InvalidParameters&) {
  }
  return r;
}

// ---------------------------------------------------------------------------
// Kernel decay: F^{-1}(χ(|ξ|)|ξ|^a K̂1(t,ξ)) in L^r

/// t^{1/2 + (2+[n/2])/(2r) − n/(2σ)(1−1/r) − a/(2σ)}; r = ∞ gives −(n+a−σ)/(2σ)
/// and r = 1 gives 1 + (1 + [n/2])/2 − a/(2σ).
inline double kernel_exponent(int n, double sigma, double a, double r_exp) {
  const double inv_r = std::isinf(r_exp) ? 0.0 : 1.0 / r_exp;
  return 0.5 + 0.5 * (2.0 + n / 2) * inv_r - n / (2.0 * sigma) * (1.0 - inv_r) - a / (2.0 * sigma);
}

struct RadialProfile {
  std::vector<double> r;
  std::vector<double> values;
  std::vector<double> weights;  // ω_{n−1} r^{n−1} dr trapezoid weights
};

/// Physical-side low-frequency kernel at time t on a radial grid wide enough
/// to hold the propagating front.
inline RadialProfile kernel_profile(int n, double sigma, double a, double t) {
  const double rho_cap = 2.0 * cutoff_radius(sigma);
  // beyond ρ^{2σ} t / 2 > 46 the integrand is below e^{−46}
  const double rho_max = std::min(rho_cap, std::pow(92.0 / std::max(t, 1e-12), 1.0 / (2.0 * sigma)));
  const double speed = sigma * std::pow(rho_max, sigma - 1.0);
  const double R = speed * t + 10.0 * std::pow(t, 1.0 / (2.0 * sigma)) + 20.0;
  const double drho = pi / (8.0 * R);
  const int nrho = static_cast<int>(std::ceil(rho_max / drho)) + 1;
  std::vector<double> rho(nrho), w(nrho), vals(nrho);
  for (int j = 0; j < nrho; ++j) {
    rho[j] = j * drho;
    w[j] = (j == 0 || j == nrho - 1) ? 0.5 * drho : drho;
    vals[j] = cutoff_chi(rho[j], sigma) * (a == 0.0 ? 1.0 : std::pow(rho[j], a)) *
              kernel_eval(t, rho[j], sigma).k1;
  }
  const double dr = std::min(0.25, pi / (8.0 * rho_max));
  const int nr = static_cast<int>(std::ceil(R / dr)) + 1;
  RadialProfile prof;
  prof.r.resize(nr);
  prof.weights.resize(nr);
  const double omega = sphere_area(n);
  for (int i = 0; i < nr; ++i) {
    prof.r[i] = i * dr;
    const double tw = (i == 0 || i == nr - 1) ? 0.5 : 1.0;
    prof.weights[i] = omega * std::pow(prof.r[i], n - 1) * tw * dr;
  }
  prof.values = radial_inverse_quadrature(n, rho, w, vals, prof.r);
  return prof;
}

struct KernelSuiteResult {
  NormSeries series;  // column "kernel_Lr"
  double predicted_exponent = 0.0;
  EnvelopeResult envelope;
  RateFit fit;
};

inline KernelSuiteResult kernel_norm_suite(int n, double sigma, double a, double r_exp,
                                           const std::vector<double>& times) {
  if (!(n > sigma)) throw InvalidParameters("kernel_norm_suite: requires n > sigma");
  if (n % 2 == 0 || n > 7) throw InvalidParameters("kernel_norm_suite: radial evaluation needs odd n <= 7");
  if (!(r_exp >= 1.0)) throw InvalidParameters("kernel_norm_suite: r must be >= 1");
  KernelSuiteResult out;
  out.series = NormSeries({"kernel_Lr"});
  out.predicted_exponent = kernel_exponent(n, sigma, a, r_exp);
  for (double t : times) {
    const auto prof = kernel_profile(n, sigma, a, t);
    out.series.append(t, {lq_norm(prof.values, prof.weights, r_exp)});
  }
  const Window win{times.front(), times.back()};
  out.envelope = envelope_check(out.series, "kernel_Lr", out.predicted_exponent, win);
  out.fit = fit_rate(out.series, "kernel_Lr", win);
  return out;
}

// ---------------------------------------------------------------------------
// Linear (L^m ∩ L^q) − L^q envelopes

enum class DataSlot { position, velocity };  // data (G, 0) or (0, G)

inline const char* to_string(DataSlot s) { return s == DataSlot::position ? "position" : "velocity"; }

/// Exponents for ‖w‖, ‖|D|^σ w‖, ‖|D|^{2σ} w‖, ‖w_t‖ in the order of
/// linear_columns().
inline std::vector<double> linear_exponents(int n, double sigma, double q, double m, DataSlot slot) {
  const double inv_r = 1.0 + 1.0 / q - 1.0 / m;
  const double gamma = (2.0 + n / 2) * inv_r;
  const double base = -n / (2.0 * sigma) * (1.0 - inv_r);
  const double w_lead = slot == DataSlot::position ? 0.5 * gamma : 0.5 * (gamma + 1.0);
  const double wt_lead = slot == DataSlot::position ? 0.5 * (gamma - 1.0) : 0.5 * gamma;
  return {w_lead + base, w_lead + base - 0.5, w_lead + base - 1.0, wt_lead + base};
}

inline const std::vector<std::string>& linear_columns() {
  static const std::vector<std::string> names{"w_Lq", "Dsig_w_Lq", "D2sig_w_Lq", "wt_Lq"};
  return names;
}

struct LinearSuiteSpec {
  int n = 3;
  double sigma = 1.0;
  double q = 2.0;
  double m = 1.0;
  DataSlot slot = DataSlot::position;
  double T = 100.0;
  GridSpec grid{GridMode::radial, 3, 1024, 300.0};
  DataSpec data{DataKind::gaussian, 1.0, 1.0};
  OutputSchedule schedule{1.0, 20};
};

struct LinearSuiteResult {
  NormSeries series;
  std::vector<double> exponents;
  std::vector<EnvelopeResult> envelopes;
  double data_norm = 0.0;
  double boundary_mass = 0.0;
};

inline LinearSuiteResult linear_rate_suite(const LinearSuiteSpec& spec) {
  if (!(spec.n > spec.sigma)) throw InvalidParameters("linear_rate_suite: requires n > sigma");
  if (!(spec.m >= 1.0 && spec.m < spec.q)) throw InvalidParameters("linear_rate_suite: requires 1 <= m < q");
  if (spec.grid.n != spec.n) throw GridMismatch("linear_rate_suite: grid dimension differs from n");
  const auto grid = Grid::make(spec.grid);
  const auto g = make_profile(grid, spec.data);
  const SpatialField zero(grid);
  const auto& w0 = spec.slot == DataSlot::position ? g : zero;
  const auto& w1 = spec.slot == DataSlot::position ? zero : g;
  const ComponentState s0 = make_component(w0, w1, spec.sigma);

  LinearSuiteResult out;
  out.series = NormSeries(linear_columns());
  out.exponents = linear_exponents(spec.n, spec.sigma, spec.q, spec.m, spec.slot);
  out.data_norm = data_norm(w0, w1, spec.sigma, spec.q, spec.m);
  for (double t : output_times(spec.T, spec.schedule)) {
    const auto s = linear_evolve(s0, t);
    out.series.append(t, component_norms(s, spec.q));
    out.boundary_mass = std::max(out.boundary_mass, boundary_mass(to_physical(s.field_hat)));
  }
  const Window win{1.0, spec.T};
  for (std::size_t c = 0; c < out.exponents.size(); ++c)
    out.envelopes.push_back(envelope_check(out.series, linear_columns()[c], out.exponents[c], win));
  return out;
}

// ---------------------------------------------------------------------------
// Gagliardo–Nirenberg source envelopes

struct GnColumn {
  std::string column;  // recorded norm, raised to `power` before the check
  double power = 1.0;
  double exponent = 0.0;
};

/// ‖v‖^{p1}_{L^{ℓ p1}} and ‖u‖^{p2}_{L^{ℓ p2}}, ℓ ∈ {m, q}, against
/// (1+τ)^{p(−n/(2σ)(1/m − 1/(ℓ p)) + κ/2)}; the first family uses (σ2, κ1)
/// for both sources, the second (σ1, κ2).
inline std::vector<GnColumn> gn_columns(const ProblemParams& p, const TheoremVerdict& v, const DerivedConstants& c) {
  if (v.scenario == Scenario::none) throw InvalidParameters("gn_columns: no existence result applies");
  const bool first = is_first_family(v.scenario);
  const double sigma = first ? p.sigma2 : p.sigma1;
  const double kappa = first ? c.kappa1 : c.kappa2;
  auto e = [&](double pe, double target) { return gn_source_exponent(pe, sigma, kappa, target, p); };
  return {{"v_Lmp1", p.p1, e(p.p1, p.m)},
          {"v_Lqp1", p.p1, e(p.p1, p.q)},
          {"u_Lmp2", p.p2, e(p.p2, p.m)},
          {"u_Lqp2", p.p2, e(p.p2, p.q)}};
}

inline std::vector<EnvelopeResult> gn_envelope_check(const NormSeries& s, const ProblemParams& p,
                                                     const TheoremVerdict& v, const DerivedConstants& c,
                                                     Window window = {}) {
  std::vector<EnvelopeResult> out;
  for (const auto& g : gn_columns(p, v, c)) {
    const auto& col = s.column(g.column);
    std::vector<double> powered(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) powered[i] = std::pow(col[i], g.power);
    NormSeries one({g.column + "^p"});
    for (std::size_t i = 0; i < s.size(); ++i) one.append(s.times()[i], {powered[i]});
    auto r = envelope_check(one, g.column + "^p", g.exponent, window);
    out.push_back(r);
  }
  return out;
}

}  // namespace sigmaevo
