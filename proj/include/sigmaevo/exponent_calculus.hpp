#pragma once

// Admissibility conditions and predicted decay exponents for the weakly
// coupled system
//
//   u_tt + (-Δ)^σ1 u + (-Δ)^σ1 u_t = |v|^p1,
//   v_tt + (-Δ)^σ2 v + (-Δ)^σ2 v_t = |u|^p2,
//
// with data in L^m ∩ L^q based energy spaces. Everything here is closed-form
// double arithmetic; no iteration.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sigmaevo/core.hpp"

namespace sigmaevo {

struct ProblemParams {
  int n = 1;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double p1 = 2.0;
  double p2 = 2.0;
  double q = 2.0;
  double m = 1.0;

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

/// Throws InvalidParameters naming the first violated invariant.
inline void validate(const ProblemParams& p) {
  auto fail = [](const std::string& what) { throw InvalidParameters(what); };
  auto g = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return std::string(buf);
  };
  if (p.n < 1) fail("n >= 1 violated (n = " + std::to_string(p.n) + ")");
  if (!(p.q > 1.0) || !std::isfinite(p.q)) fail("1 < q < inf violated (q = " + g(p.q) + ")");
  if (!(p.m >= 1.0)) fail("m >= 1 violated (m = " + g(p.m) + ")");
  if (!(p.m < p.q)) fail("m < q violated (m = " + g(p.m) + ", q = " + g(p.q) + ")");
  if (!(p.sigma1 >= 1.0) || !std::isfinite(p.sigma1)) fail("sigma1 >= 1 violated");
  if (!(p.sigma2 >= 1.0) || !std::isfinite(p.sigma2)) fail("sigma2 >= 1 violated");
  if (!(p.p1 > 1.0) || !std::isfinite(p.p1)) fail("p1 > 1 violated");
  if (!(p.p2 > 1.0) || !std::isfinite(p.p2)) fail("p2 > 1 violated");
}

struct DerivedConstants {
  int half_n = 0;  // floor(n/2)
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double r = 1.0;  // 1 + 1/q = 1/r + 1/m
};

inline DerivedConstants derived_constants(const ProblemParams& p) {
  validate(p);
  DerivedConstants c;
  c.half_n = p.n / 2;
  const double n = p.n;
  const double gap = 1.0 / p.m - 1.0 / p.q;
  const double base = 2.0 + c.half_n;
  c.alpha = gap * (base + n * (1.0 / p.sigma2 - 1.0 / p.sigma1));
  c.beta = gap * (base + n * (1.0 / p.sigma1 - 1.0 / p.sigma2));
  c.gamma = (1.0 + 1.0 / p.q - 1.0 / p.m) * base;
  c.kappa1 = 0.5 * (1.0 + c.gamma + c.alpha);
  c.kappa2 = 0.5 * (1.0 + c.gamma + c.beta);
  c.r = 1.0 / (1.0 + 1.0 / p.q - 1.0 / p.m);
  return c;
}

/// Which reading of the loss exponent to use. `paper` carries p·κ as in the
/// theorem statements; `gn_derived` carries p·κ/2 as the Gagliardo–Nirenberg
/// envelopes in the existence argument do.
enum class EpsVariant { paper, gn_derived };

/// ε(p, σ) = 1 − n(p−1)/(2mσ) + p·κ  (or p·κ/2 for the gn_derived variant).
/// `sigma_other` is the order of the component feeding the nonlinearity and
/// `kappa` the κ of the branch (κ1 for ε(p1,σ2), κ2 for ε(p2,σ1)).
inline double epsilon_loss(double p_exp, double sigma_other, double kappa, const ProblemParams& p,
                           EpsVariant variant = EpsVariant::paper) {
  validate(p);
  if (!(p_exp > 1.0)) throw InvalidParameters("epsilon_loss: exponent must exceed 1");
  if (!(sigma_other >= 1.0)) throw InvalidParameters("epsilon_loss: sigma must be >= 1");
  const double k = variant == EpsVariant::paper ? kappa : 0.5 * kappa;
  return 1.0 - p.n / (2.0 * p.m * sigma_other) * (p_exp - 1.0) + p_exp * k;
}

inline double epsilon_p1_sigma2(const ProblemParams& p, const DerivedConstants& c,
                                EpsVariant variant = EpsVariant::paper) {
  return epsilon_loss(p.p1, p.sigma2, c.kappa1, p, variant);
}

inline double epsilon_p2_sigma1(const ProblemParams& p, const DerivedConstants& c,
                                EpsVariant variant = EpsVariant::paper) {
  return epsilon_loss(p.p2, p.sigma1, c.kappa2, p, variant);
}

/// Time exponent of the envelope ‖|w|^p‖_{L^target} ≲ (1+τ)^{e} obtained from
/// the fractional Gagliardo–Nirenberg inequality:
///   e = p·(−n/(2σ)·(1/m − 1/(target·p)) + κ/2),
/// with target ∈ {m, q}. The `paper` variant replaces κ/2 by κ, which makes
/// e(target = m) = ε − 1.
inline double gn_source_exponent(double p_exp, double sigma, double kappa, double target,
                                 const ProblemParams& p,
                                 EpsVariant variant = EpsVariant::gn_derived) {
  const double k = variant == EpsVariant::paper ? kappa : 0.5 * kappa;
  return p_exp * (-p.n / (2.0 * sigma) * (1.0 / p.m - 1.0 / (target * p_exp)) + k);
}

/// True iff the Duhamel integrand envelope (1+τ)^{e}, e = gn_source_exponent
/// with target m, fails to be integrable on [0,∞), i.e. e ≥ −1.
inline bool nonintegrability_flag(double p_exp, double sigma_other, double kappa,
                                  const ProblemParams& p,
                                  EpsVariant variant = EpsVariant::gn_derived) {
  if (!(p_exp > 1.0)) throw InvalidParameters("nonintegrability_flag: exponent must exceed 1");
  return gn_source_exponent(p_exp, sigma_other, kappa, p.m, p, variant) >= -1.0;
}

// ---------------------------------------------------------------------------
// Condition report

struct ConditionEntry {
  std::string id;
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string note;
};

struct ConditionReport {
  std::vector<ConditionEntry> entries;

  const ConditionEntry* find(const std::string& id) const {
    for (const auto& e : entries)
      if (e.id == id) return &e;
    return nullptr;
  }
  bool holds(const std::string& id) const {
    const auto* e = find(id);
    return e != nullptr && e->satisfied;
  }
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

inline double threshold_denominator(const ProblemParams& p, double sigma, double kappa) {
  return p.n - 2.0 * p.m * sigma * kappa;
}

inline double threshold_value(const ProblemParams& p, double sigma, double kappa) {
  return 1.0 + 2.0 * p.m * sigma * (1.0 + kappa) / threshold_denominator(p, sigma, kappa);
}

}  // namespace detail

/// Evaluates every inequality of the four existence results with its stated
/// strictness. Never throws for valid parameters.
inline ConditionReport check_conditions(const ProblemParams& p, const DerivedConstants& c) {
  using detail::fmt;
  ConditionReport rep;
  const double n = p.n;
  const double qm = p.q / p.m;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto add = [&](std::string id, bool ok, double lhs, double rhs, std::string note) {
    rep.entries.push_back({std::move(id), ok, lhs, rhs, std::move(note)});
  };

  // Upper GN bound n/(n − 2qσ) for exponents; only meaningful when n > 2qσ,
  // and a block using it is inactive otherwise.
  auto gn_upper = [&](double sigma) -> std::optional<double> {
    if (!(n > 2.0 * p.q * sigma)) return std::nullopt;
    return n / (n - 2.0 * p.q * sigma);
  };
  auto range_note = [&](const char* name, double val, std::optional<double> upper) {
    std::string s = "q/m=" + fmt(qm) + " <= " + name + "=" + fmt(val);
    if (upper) s += " <= " + fmt(*upper);
    const bool ok = qm <= val && (!upper || val <= *upper);
    return std::pair<bool, std::string>{ok, s + (ok ? " ok" : " fails")};
  };

  // One GN block: regime lo < n <= hi (lo = -inf for the first block), then
  // optional upper bounds on p1 and p2.
  auto gn_block = [&](const std::string& id, double lo, double hi, std::optional<double> up1,
                      std::optional<double> up2, const std::string& regime) {
    const bool active = n > lo && n <= hi;
    auto [ok1, s1] = range_note("p1", p.p1, up1);
    auto [ok2, s2] = range_note("p2", p.p2, up2);
    std::string note = regime + (active ? " active; " : " inactive; ") + s1 + "; " + s2;
    add(id, active && ok1 && ok2, n, hi, note);
  };

  const double inf = std::numeric_limits<double>::infinity();
  const double twoq1 = 2.0 * p.q * p.sigma1;
  const double twoq2 = 2.0 * p.q * p.sigma2;

  // 1.x family: σ1 >= σ2.
  gn_block("GN11A1", -inf, twoq2, std::nullopt, std::nullopt, "n <= 2q*sigma2");
  gn_block("GN11A2", twoq2, twoq1, gn_upper(p.sigma2), std::nullopt, "2q*sigma2 < n <= 2q*sigma1");
  gn_block("GN11A3", twoq1, 2.0 * p.q * p.q * p.sigma2 / (p.q - p.m), gn_upper(p.sigma2),
           gn_upper(p.sigma1), "2q*sigma1 < n <= 2q^2*sigma2/(q-m)");
  // 2.x family: σ2 >= σ1.
  gn_block("GN12A1", -inf, twoq1, std::nullopt, std::nullopt, "n <= 2q*sigma1");
  gn_block("GN12A2", twoq1, twoq2, std::nullopt, gn_upper(p.sigma1), "2q*sigma1 < n <= 2q*sigma2");
  gn_block("GN12A3", twoq2, 2.0 * p.q * p.q * p.sigma1 / (p.q - p.m), gn_upper(p.sigma2),
           gn_upper(p.sigma1), "2q*sigma2 < n <= 2q^2*sigma1/(q-m)");

  auto exponent_block = [&](const std::string& tag, double sig_a, double sig_b, double kappa,
                            double pa, double pb) {
    // tag 11: pa = p1, pb = p2, sig_a = σ1, sig_b = σ2, κ = κ1.
    // tag 12: pa = p2, pb = p1, sig_a = σ2, sig_b = σ1, κ = κ2.
    const double num = 1.0 + pb + pb * (1.0 + pa) * kappa;
    const double den = (pb - 1.0) / sig_a + pb * (pa - 1.0) / sig_b;
    const double lhs1 = p.m * num / den;
    add("EXP" + tag + "A-part1", lhs1 < n / 2.0, lhs1, n / 2.0,
        "m*(1+pb+pb(1+pa)kappa)/((pb-1)/sig_a + pb(pa-1)/sig_b) < n/2");

    const double denom = detail::threshold_denominator(p, sig_b, kappa);
    add("THRESH-DENOM-" + tag, denom > 0.0, denom, 0.0,
        "n - 2m*sigma*kappa = " + fmt(denom) + (denom > 0.0 ? " > 0" : " <= 0: threshold undefined"));
    if (denom > 0.0) {
      const double thr = detail::threshold_value(p, sig_b, kappa);
      const bool ok = pa <= thr && thr < pb;
      add("EXP" + tag + "A-threshold", ok, pa, thr,
          "p_loss=" + fmt(pa) + " <= threshold=" + fmt(thr) + " < p_other=" + fmt(pb));
      const double mn = std::min(p.p1, p.p2);
      add("EXP" + tag + "B", mn > thr, mn, thr, "min(p1,p2)=" + fmt(mn) + " > threshold=" + fmt(thr));
    } else {
      add("EXP" + tag + "A-threshold", false, pa, nan, "threshold undefined");
      add("EXP" + tag + "B", false, std::min(p.p1, p.p2), nan, "threshold undefined");
    }
  };
  exponent_block("11", p.sigma1, p.sigma2, c.kappa1, p.p1, p.p2);
  exponent_block("12", p.sigma2, p.sigma1, c.kappa2, p.p2, p.p1);

  const double smax = std::max(p.sigma1, p.sigma2);
  add("DIM", n > smax, n, smax, "n > max(sigma1, sigma2)");
  add("ORD-11", p.sigma1 >= p.sigma2, p.sigma1, p.sigma2, "sigma1 >= sigma2");
  add("ORD-12", p.sigma2 >= p.sigma1, p.sigma2, p.sigma1, "sigma2 >= sigma1");
  return rep;
}

// ---------------------------------------------------------------------------
// Classification

enum class Scenario { Thm11_loss, Thm12_loss, Thm11B_noloss, Thm12B_noloss, none };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Thm11_loss: return "Thm11_loss";
    case Scenario::Thm12_loss: return "Thm12_loss";
    case Scenario::Thm11B_noloss: return "Thm11B_noloss";
    case Scenario::Thm12B_noloss: return "Thm12B_noloss";
    case Scenario::none: return "none";
  }
  return "none";
}

inline std::optional<Scenario> scenario_from_string(const std::string& s) {
  for (auto sc : {Scenario::Thm11_loss, Scenario::Thm12_loss, Scenario::Thm11B_noloss,
                  Scenario::Thm12B_noloss, Scenario::none})
    if (s == to_string(sc)) return sc;
  return std::nullopt;
}

inline bool is_loss(Scenario s) { return s == Scenario::Thm11_loss || s == Scenario::Thm12_loss; }

/// Family 1.x (σ1 >= σ2) versus 2.x (σ2 >= σ1).
inline bool is_first_family(Scenario s) {
  return s == Scenario::Thm11_loss || s == Scenario::Thm11B_noloss;
}

/// Condition ids a scenario needs, besides one satisfied GN block of its family.
inline std::vector<std::string> required_conditions(Scenario s) {
  switch (s) {
    case Scenario::Thm11_loss:
      return {"ORD-11", "DIM", "THRESH-DENOM-11", "EXP11A-part1", "EXP11A-threshold"};
    case Scenario::Thm12_loss:
      return {"ORD-12", "DIM", "THRESH-DENOM-12", "EXP12A-part1", "EXP12A-threshold"};
    case Scenario::Thm11B_noloss: return {"ORD-11", "DIM", "THRESH-DENOM-11", "EXP11B"};
    case Scenario::Thm12B_noloss: return {"ORD-12", "DIM", "THRESH-DENOM-12", "EXP12B"};
    case Scenario::none: return {};
  }
  return {};
}

inline std::array<std::string, 3> gn_block_ids(Scenario s) {
  if (is_first_family(s)) return {"GN11A1", "GN11A2", "GN11A3"};
  return {"GN12A1", "GN12A2", "GN12A3"};
}

inline bool scenario_holds(const ConditionReport& rep, Scenario s) {
  if (s == Scenario::none) return false;
  for (const auto& id : required_conditions(s))
    if (!rep.holds(id)) return false;
  const auto gn = gn_block_ids(s);
  return std::any_of(gn.begin(), gn.end(), [&](const std::string& id) { return rep.holds(id); });
}

struct TheoremVerdict {
  Scenario scenario = Scenario::none;
  ConditionReport report;
  std::optional<double> eps_p1_sigma2;
  std::optional<double> eps_p2_sigma1;
  std::string note;
};

/// No-loss results are tested first, then loss; with σ1 = σ2 and both
/// families holding, the 1.x id is reported.
inline TheoremVerdict classify(const ProblemParams& p) {
  const auto c = derived_constants(p);
  TheoremVerdict v;
  v.report = check_conditions(p, c);
  const std::array<std::pair<Scenario, Scenario>, 2> order{
      std::pair{Scenario::Thm11B_noloss, Scenario::Thm12B_noloss},
      std::pair{Scenario::Thm11_loss, Scenario::Thm12_loss}};
  for (const auto& [first, second] : order) {
    const bool a = scenario_holds(v.report, first);
    const bool b = scenario_holds(v.report, second);
    if (!a && !b) continue;
    v.scenario = a ? first : second;
    if (a && b) v.note = "branches coincide (sigma1 = sigma2)";
    break;
  }
  if (v.scenario == Scenario::Thm11_loss) v.eps_p1_sigma2 = epsilon_p1_sigma2(p, c);
  if (v.scenario == Scenario::Thm12_loss) v.eps_p2_sigma1 = epsilon_p2_sigma1(p, c);
  return v;
}

// ---------------------------------------------------------------------------
// Predicted decay exponents of (1+t)

struct ComponentRates {
  double rate_lq = 0.0;   // ‖w‖_{L^q}
  double rate_mid = 0.0;  // ‖|D|^σ w‖_{L^q} and ‖w_t‖_{L^q}
  double rate_top = 0.0;  // ‖|D|^{2σ} w‖_{L^q}
};

struct DecayRateTable {
  ComponentRates u;
  ComponentRates v;
};

/// −n/(2σ)(1 − 1/r): the L^m ∩ L^q → L^q heat-like part shared by all rates.
inline double linear_base_rate(const ProblemParams& p, const DerivedConstants& c, double sigma) {
  return -p.n / (2.0 * sigma) * (1.0 - 1.0 / c.r);
}

inline DecayRateTable predicted_rates(const ProblemParams& p, const TheoremVerdict& v,
                                      const DerivedConstants& c) {
  if (v.scenario == Scenario::none)
    throw InvalidParameters("predicted_rates: no existence result applies");
  auto family = [](double lq) { return ComponentRates{lq, lq - 0.5, lq - 1.0}; };
  const double bu = linear_base_rate(p, c, p.sigma1);
  const double bv = linear_base_rate(p, c, p.sigma2);
  DecayRateTable t;
  switch (v.scenario) {
    case Scenario::Thm11_loss: {
      const double eps = v.eps_p1_sigma2.value_or(epsilon_p1_sigma2(p, c));
      t.u = family(bu + eps + 0.5 * c.kappa1);
      t.v = family(bv + 0.5 * c.kappa1);
      break;
    }
    case Scenario::Thm12_loss: {
      const double eps = v.eps_p2_sigma1.value_or(epsilon_p2_sigma1(p, c));
      t.u = family(bu + 0.5 * c.kappa2);
      t.v = family(bv + eps + 0.5 * c.kappa2);
      break;
    }
    case Scenario::Thm11B_noloss:
    case Scenario::Thm12B_noloss:
      t.u = family(bu + 0.5 * (c.gamma + 1.0));
      t.v = family(bv + 0.5 * (c.gamma + 1.0));
      break;
    case Scenario::none: break;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Region scan

struct ParamGrid {
  std::vector<int> n;
  std::vector<double> sigma1, sigma2, p1, p2, q, m;

  std::size_t cardinality() const {
    return n.size() * sigma1.size() * sigma2.size() * p1.size() * p2.size() * q.size() * m.size();
  }

  /// Row-major decode with m varying fastest.
  ProblemParams at(std::size_t idx) const {
    ProblemParams p;
    p.m = m[idx % m.size()];  idx /= m.size();
    p.q = q[idx % q.size()];  idx /= q.size();
    p.p2 = p2[idx % p2.size()];  idx /= p2.size();
    p.p1 = p1[idx % p1.size()];  idx /= p1.size();
    p.sigma2 = sigma2[idx % sigma2.size()];  idx /= sigma2.size();
    p.sigma1 = sigma1[idx % sigma1.size()];  idx /= sigma1.size();
    p.n = n[idx % n.size()];
    return p;
  }
};

struct ScanRow {
  ProblemParams params;
  bool valid = true;
  std::string invalid_reason;
  TheoremVerdict verdict;
};

/// Classifies every point of the product grid. Invalid tuples are kept as
/// rows with `valid = false` so the output cardinality equals the grid's.
inline std::vector<ScanRow> region_scan(const ParamGrid& grid, unsigned jobs = 1) {
  const std::size_t total = grid.cardinality();
  std::vector<ScanRow> rows(total);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      ScanRow& row = rows[i];
      row.params = grid.at(i);
      try {
        row.verdict = classify(row.params);
      } catch (const InvalidParameters& e) {
        row.valid = false;
        row.invalid_reason = e.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  if (jobs == 1 || total < 2) {
    work(0, total);
    return rows;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (total + jobs - 1) / jobs;
  for (unsigned j = 0; j < jobs; ++j) {
    const std::size_t b = j * chunk;
    const std::size_t e = std::min(total, b + chunk);
    if (b >= e) break;
    pool.emplace_back(work, b, e);
  }
  for (auto& th : pool) th.join();
  return rows;
}

inline std::map<std::string, std::size_t> scan_summary(const std::vector<ScanRow>& rows) {
  std::map<std::string, std::size_t> counts;
  for (auto sc : {Scenario::Thm11_loss, Scenario::Thm12_loss, Scenario::Thm11B_noloss,
                  Scenario::Thm12B_noloss, Scenario::none})
    counts[to_string(sc)] = 0;
  counts["invalid"] = 0;
  for (const auto& r : rows) {
    if (!r.valid)
      ++counts["invalid"];
    else
      ++counts[to_string(r.verdict.scenario)];
  }
  return counts;
}

}  // namespace sigmaevo
