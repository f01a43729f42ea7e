#pragma once

// Configuration parsing, run-directory persistence and report rendering for
// the sigmaevo command-line tool.

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "sigmaevo/decay_harness.hpp"
#include "sigmaevo/evolution_engine.hpp"
#include "sigmaevo/exponent_calculus.hpp"
#include "sigmaevo/transforms.hpp"

namespace sigmaevo::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr const char* version = "0.1.0";

/// Malformed or incomplete configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem failure; maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

enum ExitCode { exit_ok = 0, exit_invalid = 2, exit_io = 3 };

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed for " + p.string());
}

/// Parses JSON text, reporting line and column on syntax errors.
inline json parse_config_text(const std::string& text, const std::string& source = "config") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": malformed JSON (" + e.what() + ")");
  }
}

inline json load_config(const fs::path& p) { return parse_config_text(read_file(p), p.string()); }

// ---------------------------------------------------------------------------
// Typed field access with path diagnostics

inline const json* find(const json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline const json& require_block(const json& cfg, const std::string& key) {
  const json* b = find(cfg, key);
  if (b == nullptr) throw ConfigError("missing block '" + key + "'");
  if (!b->is_object()) throw ConfigError("field '" + key + "': expected an object");
  return *b;
}

/// Number, or the strings "inf"/"infinity".
inline double as_number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError("field '" + path + "': expected a number");
}

inline double get_number(const json& obj, const std::string& key, const std::string& path, double fallback) {
  const json* v = find(obj, key);
  return v == nullptr ? fallback : as_number(*v, path + "." + key);
}

inline double need_number(const json& obj, const std::string& key, const std::string& path) {
  const json* v = find(obj, key);
  if (v == nullptr) throw ConfigError("field '" + path + "." + key + "': required");
  return as_number(*v, path + "." + key);
}

inline int get_int(const json& obj, const std::string& key, const std::string& path, int fallback) {
  const json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) throw ConfigError("field '" + path + "." + key + "': expected an integer");
  return v->get<int>();
}

inline bool get_bool(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  const json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) throw ConfigError("field '" + path + "." + key + "': expected true or false");
  return v->get<bool>();
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& path,
                              const std::string& fallback) {
  const json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) throw ConfigError("field '" + path + "." + key + "': expected a string");
  return v->get<std::string>();
}

/// A scalar or an array of scalars as a list.
inline std::vector<double> get_list(const json& obj, const std::string& key, const std::string& path,
                                    std::vector<double> fallback) {
  const json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_array()) return {as_number(*v, path + "." + key)};
  std::vector<double> out;
  for (std::size_t i = 0; i < v->size(); ++i)
    out.push_back(as_number((*v)[i], path + "." + key + "[" + std::to_string(i) + "]"));
  if (out.empty()) throw ConfigError("field '" + path + "." + key + "': empty list");
  return out;
}

// ---------------------------------------------------------------------------
// Blocks

inline ProblemParams parse_params(const json& cfg) {
  const json& b = require_block(cfg, "params");
  ProblemParams p;
  const json* n = find(b, "n");
  if (n == nullptr || !n->is_number_integer()) throw ConfigError("field 'params.n': expected an integer");
  p.n = n->get<int>();
  p.sigma1 = need_number(b, "sigma1", "params");
  p.sigma2 = need_number(b, "sigma2", "params");
  p.p1 = need_number(b, "p1", "params");
  p.p2 = need_number(b, "p2", "params");
  p.q = need_number(b, "q", "params");
  p.m = need_number(b, "m", "params");
  validate(p);
  return p;
}

inline json to_json(const ProblemParams& p) {
  return {{"n", p.n}, {"sigma1", p.sigma1}, {"sigma2", p.sigma2}, {"p1", p.p1},
          {"p2", p.p2}, {"q", p.q},           {"m", p.m}};
}

inline GridSpec parse_grid(const json& cfg, int n_default) {
  GridSpec g;
  g.n = n_default;
  g.mode = n_default <= 2 ? GridMode::full : GridMode::radial;
  const json* b = find(cfg, "grid");
  if (b != nullptr) {
    const auto mode = get_string(*b, "mode", "grid", to_string(g.mode));
    if (mode != "full" && mode != "radial") throw ConfigError("field 'grid.mode': expected full or radial");
    g.mode = mode == "full" ? GridMode::full : GridMode::radial;
    g.n = get_int(*b, "n", "grid", n_default);
    g.points = get_int(*b, "points", "grid", g.points);
    g.extent = get_number(*b, "extent", "grid", g.extent);
  }
  validate(g);
  return g;
}

inline json to_json(const GridSpec& g) {
  return {{"mode", to_string(g.mode)}, {"n", g.n}, {"points", g.points}, {"extent", g.extent}};
}

inline StepperConfig parse_stepper(const json& cfg) {
  StepperConfig s;
  const json* b = find(cfg, "stepper");
  if (b != nullptr) {
    s.h = get_number(*b, "h", "stepper", s.h);
    const auto scheme = get_string(*b, "scheme", "stepper", to_string(s.scheme));
    if (scheme != "frozen" && scheme != "midpoint_etd")
      throw ConfigError("field 'stepper.scheme': expected frozen or midpoint_etd");
    s.scheme = scheme == "frozen" ? Scheme::frozen : Scheme::midpoint_etd;
    s.dealias = get_bool(*b, "dealias", "stepper", s.dealias);
    s.picard_max_iters = get_int(*b, "picard_max_iters", "stepper", s.picard_max_iters);
    s.picard_tol = get_number(*b, "picard_tol", "stepper", s.picard_tol);
    s.nonlinear = get_bool(*b, "nonlinear", "stepper", s.nonlinear);
  }
  validate(s);
  return s;
}

inline json to_json(const StepperConfig& s) {
  return {{"h", s.h},
          {"scheme", to_string(s.scheme)},
          {"dealias", s.dealias},
          {"picard_max_iters", s.picard_max_iters},
          {"picard_tol", s.picard_tol},
          {"nonlinear", s.nonlinear}};
}

inline DataSpec parse_data(const json& cfg, const DataSpec& fallback = {}) {
  DataSpec d = fallback;
  const json* b = find(cfg, "data");
  if (b != nullptr) {
    const auto kind = get_string(*b, "kind", "data", d.kind == DataKind::gaussian ? "gaussian" : "bump");
    if (kind != "gaussian" && kind != "bump") throw ConfigError("field 'data.kind': expected gaussian or bump");
    d.kind = kind == "gaussian" ? DataKind::gaussian : DataKind::bump;
    d.amplitude = get_number(*b, "amplitude", "data", d.amplitude);
    d.width = get_number(*b, "width", "data", d.width);
  }
  if (!(d.width > 0.0)) throw ConfigError("field 'data.width': must be positive");
  return d;
}

inline json to_json(const DataSpec& d) {
  return {{"kind", d.kind == DataKind::gaussian ? "gaussian" : "bump"},
          {"amplitude", d.amplitude},
          {"width", d.width}};
}

inline OutputSchedule parse_schedule(const json& cfg, const OutputSchedule& fallback = {}) {
  OutputSchedule s = fallback;
  const json* b = find(cfg, "output");
  if (b != nullptr) {
    s.t0 = get_number(*b, "t0", "output", s.t0);
    s.per_decade = get_int(*b, "per_decade", "output", s.per_decade);
  }
  if (!(s.t0 > 0.0) || s.per_decade < 1) throw ConfigError("field 'output': t0 > 0 and per_decade >= 1 required");
  return s;
}

inline json to_json(const OutputSchedule& s) { return {{"t0", s.t0}, {"per_decade", s.per_decade}}; }

inline double parse_horizon(const json& cfg, double fallback) {
  const double T = get_number(cfg, "horizon", "", fallback);
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("field 'horizon': must be positive and finite");
  return T;
}

/// Default region-scan grid: 2·3·3·5·5·3·2 = 2700 tuples.
inline ParamGrid default_scan_grid() {
  ParamGrid g;
  g.n = {3, 7};
  g.sigma1 = {1.0, 1.5, 2.0};
  g.sigma2 = {1.0, 1.5, 2.0};
  g.p1 = {2.0, 3.0, 5.0, 9.0, 10.0};
  g.p2 = {2.0, 3.0, 5.0, 9.0, 10.0};
  g.q = {2.0, 4.0, 8.0};
  g.m = {1.0, 1.5};
  return g;
}

inline ParamGrid parse_scan(const json& cfg) {
  ParamGrid g = default_scan_grid();
  const json* b = find(cfg, "scan");
  if (b == nullptr) return g;
  if (!b->is_object()) throw ConfigError("field 'scan': expected an object");
  const auto ns = get_list(*b, "n", "scan", {3, 7});
  g.n.clear();
  for (double v : ns) {
    if (v != std::floor(v)) throw ConfigError("field 'scan.n': expected integers");
    g.n.push_back(static_cast<int>(v));
  }
  g.sigma1 = get_list(*b, "sigma1", "scan", g.sigma1);
  g.sigma2 = get_list(*b, "sigma2", "scan", g.sigma2);
  g.p1 = get_list(*b, "p1", "scan", g.p1);
  g.p2 = get_list(*b, "p2", "scan", g.p2);
  g.q = get_list(*b, "q", "scan", g.q);
  g.m = get_list(*b, "m", "scan", g.m);
  return g;
}

// ---------------------------------------------------------------------------
// Verdict rendering

/// Shortest %g text that reads back to the same double ("0", "3.75", "-14.5",
/// "10"); exponent notation only outside [1e-5, 1e16).
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  const bool plain = x == 0.0 || (std::abs(x) >= 1e-5 && std::abs(x) < 1e16);
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) != x) continue;
    if (plain && std::strchr(buf, 'e') != nullptr) continue;
    break;
  }
  return buf;
}

inline std::string theorem_label(Scenario s) {
  switch (s) {
    case Scenario::Thm11_loss: return "Theorem 1.1 (loss of decay)";
    case Scenario::Thm12_loss: return "Theorem 1.2 (loss of decay)";
    case Scenario::Thm11B_noloss: return "Theorem 1.3 (no loss of decay)";
    case Scenario::Thm12B_noloss: return "Theorem 1.4 (no loss of decay)";
    case Scenario::none: break;
  }
  return "none";
}

inline std::string verdict_line(const TheoremVerdict& v) {
  if (v.scenario == Scenario::none) return "no theorem applies";
  std::string out = theorem_label(v.scenario) + ": APPLIES";
  if (v.eps_p1_sigma2) out += ", ε(p₁,σ₂)=" + num(*v.eps_p1_sigma2);
  if (v.eps_p2_sigma1) out += ", ε(p₂,σ₁)=" + num(*v.eps_p2_sigma1);
  return out;
}

inline json to_json(const DerivedConstants& c) {
  return {{"half_n", c.half_n}, {"alpha", c.alpha},   {"beta", c.beta}, {"gamma", c.gamma},
          {"kappa1", c.kappa1}, {"kappa2", c.kappa2}, {"r", c.r}};
}

inline json to_json(const ConditionReport& rep) {
  json arr = json::array();
  for (const auto& e : rep.entries)
    arr.push_back({{"id", e.id}, {"satisfied", e.satisfied}, {"lhs", e.lhs}, {"rhs", e.rhs}, {"note", e.note}});
  return arr;
}

inline json to_json(const DecayRateTable& t) {
  auto comp = [](const ComponentRates& r) {
    return json{{"rate_lq", r.rate_lq}, {"rate_mid", r.rate_mid}, {"rate_top", r.rate_top}};
  };
  return {{"u", comp(t.u)}, {"v", comp(t.v)}};
}

inline json to_json(const TheoremVerdict& v) {
  json out{{"scenario", to_string(v.scenario)}, {"label", theorem_label(v.scenario)}};
  out["eps_p1_sigma2"] = v.eps_p1_sigma2 ? json(*v.eps_p1_sigma2) : json(nullptr);
  out["eps_p2_sigma1"] = v.eps_p2_sigma1 ? json(*v.eps_p2_sigma1) : json(nullptr);
  out["note"] = v.note;
  out["conditions"] = to_json(v.report);
  return out;
}

/// Full admissibility record for one tuple, as printed by `check`.
inline json check_record(const ProblemParams& p) {
  const auto c = derived_constants(p);
  const auto v = classify(p);
  json out{{"params", to_json(p)}, {"verdict", to_json(v)}, {"constants", to_json(c)}};
  out["rates"] = v.scenario == Scenario::none ? json(nullptr) : to_json(predicted_rates(p, v, c));
  return out;
}

inline std::string render_check(const ProblemParams& p) {
  const auto c = derived_constants(p);
  const auto v = classify(p);
  std::ostringstream o;
  o << verdict_line(v) << "\n";
  if (!v.note.empty()) o << "note: " << v.note << "\n";
  o << "constants: [n/2]=" << c.half_n << " alpha=" << num(c.alpha) << " beta=" << num(c.beta)
    << " gamma=" << num(c.gamma) << " kappa1=" << num(c.kappa1) << " kappa2=" << num(c.kappa2)
    << " r=" << num(c.r) << "\n";
  if (v.scenario != Scenario::none) {
    const auto t = predicted_rates(p, v, c);
    o << "decay exponents of (1+t):\n";
    o << "  u: L^q " << num(t.u.rate_lq) << ", |D|^sigma1 and u_t " << num(t.u.rate_mid) << ", |D|^2sigma1 "
      << num(t.u.rate_top) << "\n";
    o << "  v: L^q " << num(t.v.rate_lq) << ", |D|^sigma2 and v_t " << num(t.v.rate_mid) << ", |D|^2sigma2 "
      << num(t.v.rate_top) << "\n";
  } else {
    o << "failing conditions:\n";
    for (const auto& e : v.report.entries)
      if (!e.satisfied) o << "  " << e.id << ": " << num(e.lhs) << " vs " << num(e.rhs) << " (" << e.note << ")\n";
  }
  o << "conditions:\n";
  for (const auto& e : v.report.entries)
    o << "  [" << (e.satisfied ? "x" : " ") << "] " << e.id << "  lhs=" << num(e.lhs) << " rhs=" << num(e.rhs)
      << "  " << e.note << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Scan CSV

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::string out = "n,m,q,sigma1,sigma2,p1,p2,valid,scenario,eps_p1_sigma2,eps_p2_sigma1,failing,note\r\n";
  for (const auto& r : rows) {
    const auto& p = r.params;
    std::string failing;
    if (r.valid)
      for (const auto& e : r.verdict.report.entries)
        if (!e.satisfied) failing += (failing.empty() ? "" : ";") + e.id;
    std::string line = std::to_string(p.n) + "," + num(p.m) + "," + num(p.q) + "," + num(p.sigma1) + "," +
                       num(p.sigma2) + "," + num(p.p1) + "," + num(p.p2) + "," + (r.valid ? "true" : "false") + "," +
                       (r.valid ? to_string(r.verdict.scenario) : "invalid") + "," +
                       (r.verdict.eps_p1_sigma2 ? num(*r.verdict.eps_p1_sigma2) : "") + "," +
                       (r.verdict.eps_p2_sigma1 ? num(*r.verdict.eps_p2_sigma1) : "") + "," + csv_escape(failing) +
                       "," + csv_escape(r.valid ? r.verdict.note : r.invalid_reason);
    out += line + "\r\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run directories

inline json envelope_json(const EnvelopeResult& e, const std::string& group) {
  return {{"group", group},
          {"column", e.column},
          {"exponent", e.exponent},
          {"constant", e.constant},
          {"sup_early", e.sup_early},
          {"sup_late", e.sup_late},
          {"slope", e.slope},
          {"slope_stderr", e.slope_stderr},
          {"pass", e.pass}};
}

inline json versions_json() {
  return {{"sigmaevo", version}, {"fftw", std::string(fftw_version)}, {"compiler", __VERSION__}};
}

/// Chooses the run directory: explicit path, else `<root>/<command>-<k>` with
/// the first unused k, root from SIGMAEVO_OUT or "runs".
inline fs::path make_run_dir(const std::string& explicit_dir, const std::string& command) {
  fs::path dir;
  if (!explicit_dir.empty()) {
    dir = explicit_dir;
  } else {
    const char* env = std::getenv("SIGMAEVO_OUT");
    const fs::path root = env != nullptr && *env != '\0' ? fs::path(env) : fs::path("runs");
    for (int k = 1;; ++k) {
      dir = root / (command + "-" + std::to_string(k));
      if (!fs::exists(dir)) break;
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create run directory " + dir.string());
  return dir;
}

inline std::string plots_script(const NormSeries& s, const std::string& command) {
  std::ostringstream o;
  o << "# gnuplot script; run from the run directory: gnuplot plots.gp\n";
  o << "set datafile separator ','\n";
  o << "set terminal pngcairo size 1000,700\n";
  o << "set output '" << command << ".png'\n";
  o << "set key outside right\n";
  if (command == "picard") {
    o << "set logscale y\nset xlabel 'iterate k'\nset ylabel 'distance'\n";
  } else {
    o << "set logscale xy\nset xlabel 't'\nset ylabel 'norm'\n";
  }
  if (s.names().empty()) {
    o << "# no data\n";
    return o.str();
  }
  o << "plot ";
  for (std::size_t c = 0; c < s.names().size(); ++c) {
    if (c > 0) o << ", \\\n     ";
    o << "'series.csv' using 1:" << c + 2 << " with linespoints title columnheader(" << c + 2 << ")";
  }
  o << "\n";
  return o.str();
}

inline std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Markdown report built from a run directory's meta.json, verdicts.json and
/// series.csv alone. Numbers are echoed with the JSON text of verdicts.json.
inline std::string render_report(const json& meta, const json& verdicts, const NormSeries& series) {
  std::ostringstream o;
  const std::string command = meta.value("command", std::string("unknown"));
  o << "# sigmaevo report: " << command << "\n\n";
  if (const json* p = find(meta, "params"); p != nullptr && !p->is_null()) {
    o << "## Parameters\n\n| n | m | q | sigma1 | sigma2 | p1 | p2 |\n|---|---|---|---|---|---|---|\n| ";
    for (const char* k : {"n", "m", "q", "sigma1", "sigma2", "p1", "p2"}) o << cell((*p)[k]) << " | ";
    o << "\n\n";
  }
  if (const json* v = find(meta, "verdict"); v != nullptr && !v->is_null()) {
    o << "## Classification\n\n" << cell((*v)["label"]) << " (`" << cell((*v)["scenario"]) << "`)";
    if (!(*v)["eps_p1_sigma2"].is_null()) o << ", eps(p1,sigma2) = " << cell((*v)["eps_p1_sigma2"]);
    if (!(*v)["eps_p2_sigma1"].is_null()) o << ", eps(p2,sigma1) = " << cell((*v)["eps_p2_sigma1"]);
    o << "\n\n";
  }
  o << "## Series\n\n";
  if (series.empty()) {
    o << "no data\n\n";
  } else {
    o << series.size() << " samples, t from " << num(series.times().front()) << " to " << num(series.times().back())
      << ", columns: " << series.names().size() << "\n\n";
  }
  if (const json* s = find(verdicts, "scalars"); s != nullptr && !s->empty()) {
    o << "## Scalars\n\n| name | value |\n|---|---|\n";
    for (const auto& [k, v] : s->items()) o << "| " << k << " | " << cell(v) << " |\n";
    o << "\n";
  }
  if (const json* env = find(verdicts, "envelopes"); env != nullptr && !env->empty()) {
    o << "## Envelope checks\n\n"
      << "| group | column | exponent | constant | sup [T/4,T/2] | sup [T/2,T] | slope | stderr | pass |\n"
      << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& e : *env) {
      o << "| " << cell(e["group"]) << " | " << cell(e["column"]);
      for (const char* k : {"exponent", "constant", "sup_early", "sup_late", "slope", "slope_stderr", "pass"})
        o << " | " << cell(e[k]);
      o << " |\n";
    }
    o << "\n";
  }
  if (const json* d = find(verdicts, "distances"); d != nullptr) {
    o << "## Picard distances\n\n| k | d_k |\n|---|---|\n";
    for (std::size_t k = 0; k < d->size(); ++k) o << "| " << k << " | " << cell((*d)[k]) << " |\n";
    o << "\n";
  }
  o << "## Notes\n\n"
    << "- Envelope checks are one-sided: a column passes when value/(1+t)^exponent stops growing "
       "(sup over [T/2,T] below 1.1 times the sup over [T/4,T/2]).\n"
    << "- r is taken from 1 + 1/q = 1/r + 1/m throughout.\n"
    << "- Runs use rapidly decaying data only; slowly decaying L^m data are not exercised.\n";
  return o.str();
}

struct RunArtifacts {
  json meta;
  json verdicts;
  NormSeries series;
};

inline void write_run(const fs::path& dir, const RunArtifacts& a) {
  write_file(dir / "meta.json", a.meta.dump(2) + "\n");
  write_file(dir / "series.csv", a.series.to_csv());
  write_file(dir / "verdicts.json", a.verdicts.dump(2) + "\n");
  write_file(dir / "report.md", render_report(a.meta, a.verdicts, a.series));
  write_file(dir / "plots.gp", plots_script(a.series, a.meta.value("command", std::string("run"))));
}

/// Regenerates report.md and plots.gp from a run directory; returns the report.
inline std::string report_from_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a run directory: " + dir.string());
  const json meta = parse_config_text(read_file(dir / "meta.json"), (dir / "meta.json").string());
  const json verdicts = fs::exists(dir / "verdicts.json")
                            ? parse_config_text(read_file(dir / "verdicts.json"), (dir / "verdicts.json").string())
                            : json::object();
  NormSeries series;
  if (fs::exists(dir / "series.csv")) {
    const auto text = read_file(dir / "series.csv");
    if (!text.empty()) series = NormSeries::from_csv(text);
  }
  const auto report = render_report(meta, verdicts, series);
  write_file(dir / "report.md", report);
  write_file(dir / "plots.gp", plots_script(series, meta.value("command", std::string("run"))));
  return report;
}

// ---------------------------------------------------------------------------
// Commands producing run directories

inline std::vector<double> geometric_times(double t_min, double t_max, int per_decade) {
  if (!(t_min > 0.0) || !(t_max > t_min) || per_decade < 1)
    throw ConfigError("time range: need 0 < t_min < t_max and per_decade >= 1");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double t = t_min * std::pow(10.0, static_cast<double>(k) / per_decade);
    if (t > t_max * (1.0 + 1e-12)) break;
    out.push_back(t);
  }
  if (out.back() < t_max * (1.0 - 1e-12)) out.push_back(t_max);
  return out;
}

inline std::string r_label(double r) { return std::isinf(r) ? "inf" : num(r); }

inline RunArtifacts cmd_kernel(const json& cfg) {
  const json& b = require_block(cfg, "kernel");
  const int n = get_int(b, "n", "kernel", 3);
  const double sigma = get_number(b, "sigma", "kernel", 1.0);
  const auto as = get_list(b, "a", "kernel", {0.0, 1.0, 2.0});
  const auto rs = get_list(b, "r", "kernel", {std::numeric_limits<double>::infinity(), 1.0});
  const auto times = geometric_times(get_number(b, "t_min", "kernel", 10.0), get_number(b, "t_max", "kernel", 1000.0),
                                     get_int(b, "per_decade", "kernel", 10));
  std::vector<std::string> names;
  std::vector<KernelSuiteResult> results;
  json env = json::array();
  for (double a : as)
    for (double r : rs) {
      try {
        results.push_back(kernel_norm_suite(n, sigma, a, r, times));
      } catch (const InvalidParameters& e) {
        throw ConfigError(std::string("kernel block: ") + e.what());
      }
      const std::string name = "kernel[a=" + num(a) + ";r=" + r_label(r) + "]";
      names.push_back(name);
      auto ej = envelope_json(results.back().envelope, "kernel");
      ej["column"] = name;
      ej["fit_slope"] = results.back().fit.slope;
      ej["fit_stderr"] = results.back().fit.std_error;
      ej["slope_within_0.05"] = std::abs(results.back().fit.slope - results.back().predicted_exponent) <= 0.05;
      env.push_back(ej);
    }
  RunArtifacts a{json::object(), json::object(), NormSeries(names)};
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> row;
    for (const auto& r : results) row.push_back(r.series.column("kernel_Lr")[i]);
    a.series.append(times[i], row);
  }
  a.meta = {{"command", "kernel"},
            {"config", {{"n", n}, {"sigma", sigma}, {"a", as}, {"r", json::array()}, {"times", times}}},
            {"params", nullptr},
            {"verdict", nullptr},
            {"versions", versions_json()}};
  for (double r : rs) a.meta["config"]["r"].push_back(r_label(r));
  a.verdicts = {{"command", "kernel"}, {"envelopes", env}, {"scalars", json::object()}};
  return a;
}

inline RunArtifacts cmd_linear(const json& cfg) {
  const json& b = require_block(cfg, "linear");
  LinearSuiteSpec base;
  base.n = get_int(b, "n", "linear", 3);
  base.q = get_number(b, "q", "linear", 2.0);
  base.m = get_number(b, "m", "linear", 1.0);
  base.T = get_number(b, "T", "linear", 100.0);
  base.grid = parse_grid(b, base.n);
  if (find(b, "grid") == nullptr) base.grid = {GridMode::radial, base.n, 1024, 3.0 * base.T};
  base.data = parse_data(b, {DataKind::gaussian, 1.0, 1.0});
  base.schedule = parse_schedule(b, {1.0, 20});
  const auto sigmas = get_list(b, "sigma", "linear", {1.0, 2.0});
  std::vector<DataSlot> slots;
  const json* sj = find(b, "slots");
  if (sj == nullptr) {
    slots = {DataSlot::position, DataSlot::velocity};
  } else {
    if (!sj->is_array()) throw ConfigError("field 'linear.slots': expected an array");
    for (const auto& s : *sj) {
      if (!s.is_string() || (s != "position" && s != "velocity"))
        throw ConfigError("field 'linear.slots': entries must be position or velocity");
      slots.push_back(s == "position" ? DataSlot::position : DataSlot::velocity);
    }
  }
  std::vector<std::string> names;
  std::vector<LinearSuiteResult> results;
  json env = json::array();
  json scalars = json::object();
  for (double sigma : sigmas)
    for (DataSlot slot : slots) {
      LinearSuiteSpec spec = base;
      spec.sigma = sigma;
      spec.slot = slot;
      try {
        results.push_back(linear_rate_suite(spec));
      } catch (const InvalidParameters& e) {
        throw ConfigError(std::string("linear block: ") + e.what());
      }
      const std::string tag = "[sigma=" + num(sigma) + ";" + to_string(slot) + "]";
      for (const auto& c : linear_columns()) names.push_back(c + tag);
      for (const auto& e : results.back().envelopes) {
        auto ej = envelope_json(e, "linear");
        ej["column"] = e.column + tag;
        env.push_back(ej);
      }
      scalars["data_norm" + tag] = results.back().data_norm;
      scalars["boundary_mass" + tag] = results.back().boundary_mass;
    }
  RunArtifacts a{json::object(), json::object(), NormSeries(names)};
  const auto& times = results.front().series.times();
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> row;
    for (const auto& r : results)
      for (const auto& c : linear_columns()) row.push_back(r.series.column(c)[i]);
    a.series.append(times[i], row);
  }
  json slot_names = json::array();
  for (auto s : slots) slot_names.push_back(to_string(s));
  a.meta = {{"command", "linear"},
            {"config",
             {{"n", base.n},
              {"q", base.q},
              {"m", base.m},
              {"T", base.T},
              {"sigma", sigmas},
              {"slots", slot_names},
              {"grid", to_json(base.grid)},
              {"data", to_json(base.data)},
              {"output", to_json(base.schedule)}}},
            {"params", nullptr},
            {"verdict", nullptr},
            {"versions", versions_json()}};
  a.verdicts = {{"command", "linear"}, {"envelopes", env}, {"scalars", scalars}};
  return a;
}

struct SimulationSetup {
  ProblemParams params;
  GridSpec grid;
  StepperConfig stepper;
  DataSpec data;
  OutputSchedule schedule;
  double horizon = 100.0;
};

inline SimulationSetup parse_simulation(const json& cfg, double default_horizon) {
  SimulationSetup s;
  s.params = parse_params(cfg);
  s.grid = parse_grid(cfg, s.params.n);
  if (s.grid.n != s.params.n) throw ConfigError("field 'grid.n': must equal params.n");
  s.stepper = parse_stepper(cfg);
  s.data = parse_data(cfg);
  s.schedule = parse_schedule(cfg);
  s.horizon = parse_horizon(cfg, default_horizon);
  return s;
}

inline json simulation_meta(const std::string& command, const SimulationSetup& s) {
  const auto rec = check_record(s.params);
  return {{"command", command},
          {"config",
           {{"params", to_json(s.params)},
            {"grid", to_json(s.grid)},
            {"stepper", to_json(s.stepper)},
            {"data", to_json(s.data)},
            {"output", to_json(s.schedule)},
            {"horizon", s.horizon}}},
          {"params", to_json(s.params)},
          {"verdict", rec["verdict"]},
          {"constants", rec["constants"]},
          {"rates", rec["rates"]},
          {"versions", versions_json()}};
}

inline RunArtifacts cmd_run(const json& cfg) {
  const auto s = parse_simulation(cfg, 100.0);
  const auto grid = Grid::make(s.grid);
  const auto res = run_coupled(s.params, make_data(grid, s.data), s.horizon, s.stepper, s.schedule);
  RunArtifacts a{simulation_meta("run", s), json::object(), res.series};
  json env = json::array();
  json scalars{{"blew_up", res.blew_up},
               {"blowup_time", res.blowup_time},
               {"boundary_mass", res.boundary_mass},
               {"boundary_mass_warning", res.boundary_mass > boundary_mass_warning}};
  const auto verdict = classify(s.params);
  const double T = res.series.empty() ? 0.0 : res.series.times().back();
  if (verdict.scenario != Scenario::none && !res.blew_up && T > 0.0) {
    const auto c = derived_constants(s.params);
    const auto w = build_weights(s.params, verdict, c);
    const Window win{0.1 * T, T};
    for (const auto& [col, e] : w.exponents) env.push_back(envelope_json(envelope_check(res.series, col, e, win), "weights"));
    for (const auto& r : gn_envelope_check(res.series, s.params, verdict, c, win)) env.push_back(envelope_json(r, "gn"));
    scalars["x_norm_T"] = x_norm(res.series, w);
    scalars["x_norm_T_over_10"] = x_norm(res.series, w, 0.1 * T);
  }
  a.verdicts = {{"command", "run"}, {"envelopes", env}, {"scalars", scalars}};
  return a;
}

inline RunArtifacts cmd_picard(const json& cfg) {
  const auto s = parse_simulation(cfg, 10.0);
  const auto grid = Grid::make(s.grid);
  const auto res = picard_solve(s.params, make_data(grid, s.data), s.horizon, s.stepper);
  RunArtifacts a{simulation_meta("picard", s), json::object(), NormSeries({"d"})};
  for (std::size_t k = 0; k < res.distances.size(); ++k) a.series.append(static_cast<double>(k), {res.distances[k]});
  json ratios = json::array();
  for (std::size_t k = 1; k < res.distances.size(); ++k) ratios.push_back(res.distances[k] / res.distances[k - 1]);
  // d_{k+1} < d_k for every k >= 1
  bool contracting = res.distances.size() >= 3 && !res.diverged;
  for (std::size_t k = 1; k + 1 < res.distances.size(); ++k)
    if (!(res.distances[k + 1] < res.distances[k])) contracting = false;
  a.verdicts = {{"command", "picard"},
                {"envelopes", json::array()},
                {"distances", res.distances},
                {"ratios", ratios},
                {"scalars", {{"iterates", res.distances.size()},
                             {"diverged", res.diverged},
                             {"converged", res.converged},
                             {"contracting", contracting}}}};
  return a;
}

}  // namespace sigmaevo::cli
