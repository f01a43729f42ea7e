#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "sigmaevo/cli.hpp"

namespace {

using namespace sigmaevo;
using namespace sigmaevo::cli;

struct Options {
  std::string config;
  std::string out;
  unsigned jobs = 1;
  bool seedless = false;
};

std::string resolve_out(const Options& o, const json& cfg) {
  if (!o.out.empty()) return o.out;
  if (const json* b = find(cfg, "output"); b != nullptr) return get_string(*b, "dir", "output", "");
  return "";
}

int run_check(const Options& o) {
  const json cfg = load_config(o.config);
  const ProblemParams p = parse_params(cfg);
  std::cout << render_check(p);
  const std::string out = resolve_out(o, cfg);
  if (!out.empty()) {
    const auto dir = make_run_dir(out, "check");
    json rec = check_record(p);
    rec["versions"] = versions_json();
    write_file(dir / "check.json", rec.dump(2) + "\n");
    std::cout << "wrote " << (dir / "check.json").string() << "\n";
  }
  return exit_ok;
}

int run_scan(const Options& o) {
  const json cfg = load_config(o.config);
  const ParamGrid grid = parse_scan(cfg);
  const auto rows = region_scan(grid, o.jobs);
  const auto dir = make_run_dir(resolve_out(o, cfg), "scan");
  write_file(dir / "scan.csv", scan_csv(rows));
  json summary = json::object();
  for (const auto& [k, v] : scan_summary(rows)) summary[k] = v;
  json axes{{"n", grid.n},   {"sigma1", grid.sigma1}, {"sigma2", grid.sigma2}, {"p1", grid.p1},
            {"p2", grid.p2}, {"q", grid.q},           {"m", grid.m}};
  write_file(dir / "meta.json", json{{"command", "scan"},
                                     {"grid", axes},
                                     {"cardinality", grid.cardinality()},
                                     {"summary", summary},
                                     {"versions", versions_json()}}
                                        .dump(2) +
                                    "\n");
  std::cout << "scanned " << rows.size() << " tuples into " << (dir / "scan.csv").string() << "\n";
  for (const auto& [k, v] : summary.items()) std::cout << "  " << k << ": " << v.dump() << "\n";
  return exit_ok;
}

int run_with_dir(const Options& o, const std::string& command, RunArtifacts (*fn)(const json&)) {
  const json cfg = load_config(o.config);
  RunArtifacts a = fn(cfg);
  const auto dir = make_run_dir(resolve_out(o, cfg), command);
  write_run(dir, a);
  std::cout << "wrote " << dir.string() << "\n";
  if (const json* s = find(a.verdicts, "scalars"); s != nullptr && s->value("blew_up", false))
    std::cout << "blow-up observed at t = " << (*s)["blowup_time"].dump() << "\n";
  if (const json* env = find(a.verdicts, "envelopes"); env != nullptr && !env->empty()) {
    std::size_t pass = 0;
    for (const auto& e : *env) pass += e["pass"].get<bool>() ? 1 : 0;
    std::cout << "envelope checks passed: " << pass << "/" << env->size() << "\n";
  }
  return exit_ok;
}

int run_report(const Options& o) {
  std::cout << report_from_dir(o.config);
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sigmaevo: admissibility, simulation and decay verification for weakly coupled "
               "sigma-evolution systems with visco-elastic damping"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--out", opt.out, "run directory (default: $SIGMAEVO_OUT/<command>-<k> or runs/<command>-<k>)");
  app.add_option("--jobs", opt.jobs, "worker threads for scan")->check(CLI::PositiveNumber);
  app.add_flag("--seedless", opt.seedless, "all data are deterministic; accepted for compatibility");

  struct Entry {
    const char* name;
    const char* help;
  };
  const Entry entries[] = {{"check", "classify a parameter tuple"},
                           {"scan", "classify a product grid of parameter tuples"},
                           {"kernel", "low-frequency kernel norm decay"},
                           {"linear", "linear decay envelopes"},
                           {"run", "coupled semilinear simulation"},
                           {"picard", "Picard iteration distances"},
                           {"report", "regenerate report.md and plots.gp of a run directory"}};
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->add_option(std::string(e.name) == "report" ? "run_dir" : "config", opt.config,
                    std::string(e.name) == "report" ? "run directory" : "JSON configuration file")
        ->required();
    sub->add_option("--out", opt.out, "run directory");
    sub->add_option("--jobs", opt.jobs, "worker threads for scan")->check(CLI::PositiveNumber);
    sub->add_flag("--seedless", opt.seedless, "all data are deterministic; accepted for compatibility");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_invalid;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "check") return run_check(opt);
    if (cmd == "scan") return run_scan(opt);
    if (cmd == "kernel") return run_with_dir(opt, cmd, cmd_kernel);
    if (cmd == "linear") return run_with_dir(opt, cmd, cmd_linear);
    if (cmd == "run") return run_with_dir(opt, cmd, cmd_run);
    if (cmd == "picard") return run_with_dir(opt, cmd, cmd_picard);
    if (cmd == "report") return run_report(opt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_invalid;
  } catch (const InvalidParameters& e) {
    std::cerr << "error: invalid parameters: " << e.what() << "\n";
    return exit_invalid;
  } catch (const GridMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_invalid;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_io;
  }
  return exit_invalid;
}
