// muxdt: deadtime-fraction curves, rate solving, figure datasets, and
// distribution self-checks for multiplexed photon-counting detector pools.
//
// Exit status: 0 success, 1 usage error, 2 numerical failure (bracket or
// model), 3 self-check failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "muxdt/analytic.hpp"
#include "muxdt/dist.hpp"
#include "muxdt/figures.hpp"
#include "muxdt/simulate.hpp"
#include "muxdt/solve.hpp"
#include "muxdt/sweep.hpp"

namespace {

using namespace muxdt;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitSelfCheck = 3;

const std::map<std::string, Mode> kModes{{"cw", Mode::Cw}, {"pulsed", Mode::Pulsed}};
const std::map<std::string, Family> kFamilies{{"single", Family::Single},
                                              {"multiplexed", Family::Multiplexed},
                                              {"tree", Family::Tree},
                                              {"reduced", Family::Reduced}};
const std::map<std::string, Engine> kEngines{{"analytic", Engine::Analytic},
                                             {"montecarlo", Engine::MonteCarlo},
                                             {"both", Engine::Both}};

// Output file with optional per-dataset suffix; empty path = stdout.
std::unique_ptr<std::ostream> open_output(const std::string& path,
                                          const std::string& suffix) {
  if (path.empty()) return nullptr;
  std::string target = path;
  if (!suffix.empty()) {
    const auto dot = target.rfind('.');
    if (dot == std::string::npos)
      target += "_" + suffix;
    else
      target.insert(dot, "_" + suffix);
  }
  auto out = std::make_unique<std::ofstream>(target, std::ios::binary);
  if (!*out) throw std::runtime_error("cannot open output file: " + target);
  return out;
}

struct CurveArgs {
  std::string mode = "cw";
  std::string family = "multiplexed";
  std::string engine = "analytic";
  int n_detectors = 1;
  double deadtime = 50e-9;
  std::vector<double> deadtimes;  // optional heterogeneous pool (Monte Carlo)
  double nu = 0.0;
  std::string grid;
  McParams mc;
  int workers = 0;
  bool json = false;
  std::string output;
  std::string config;
};

struct RateArgs {
  std::string mode = "cw";
  std::string family = "multiplexed";
  std::string engine = "analytic";
  int n_detectors = 1;
  double deadtime = 50e-9;
  double nu = 0.0;
  double target = 0.0;
  McParams mc;
  bool json = false;
  std::string output;
  std::string config;
};

struct FigureArgs {
  std::string name;
  std::string engine = "analytic";
  McParams mc;
  int workers = 0;
  bool json = false;
  std::string output;
  std::string config;
};

DetectorPool build_pool(Family family, int n, double deadtime,
                        const std::vector<double>& deadtimes) {
  if (!deadtimes.empty()) return DetectorPool(deadtimes);
  if (family == Family::Single) return DetectorPool::homogeneous(1, deadtime);
  return DetectorPool::homogeneous(n, deadtime);
}

int run_curve(const CurveArgs& args) {
  SweepSpec spec;
  spec.mode = kModes.at(args.mode);
  spec.family = kFamilies.at(args.family);
  spec.engine = kEngines.at(args.engine);
  spec.grid = parse_grid(args.grid);
  spec.pool = build_pool(spec.family, args.n_detectors, args.deadtime, args.deadtimes);
  spec.rep_rate_nu = args.nu;
  spec.mc = args.mc;
  spec.workers = args.workers;
  if (!args.deadtimes.empty() && spec.engine != Engine::MonteCarlo)
    throw std::invalid_argument(
        "--deadtimes (heterogeneous pool) requires --engine montecarlo");

  const auto rows = run_dtf_curve(spec);
  auto file = open_output(args.output, "");
  std::ostream& out = file ? *file : std::cout;
  if (args.json)
    write_curve_json(out, rows);
  else
    write_curve_csv(out, rows);
  return kExitOk;
}

int run_rate(const RateArgs& args) {
  const Mode mode = kModes.at(args.mode);
  const Family family = kFamilies.at(args.family);
  const Engine engine = kEngines.at(args.engine);
  if (!(args.target > 0.0 && args.target < 1.0))
    throw std::invalid_argument("rate-at-dtf: --target must be inside (0, 1)");

  auto analytic_solve = [&](int n) {
    return mode == Mode::Cw
               ? cw_rate_at_dtf(family, args.deadtime, n, args.target)
               : pulsed_rate_at_dtf(family, args.nu, args.deadtime, n, args.target);
  };

  RateAtDtfResult result;
  if (engine == Engine::MonteCarlo) {
    // Bracket around the analytic solution, then bisect against the
    // simulator with one substream per probe.
    const RandomStream root(args.mc.seed, 0);
    const DetectorPool pool =
        build_pool(family, args.n_detectors, args.deadtime, {});
    const Routing routing =
        family == Family::Tree ? Routing::UniformRandom : Routing::FirstLive;
    const DetectorPool sim_pool =
        family == Family::Reduced
            ? DetectorPool::homogeneous(1, args.deadtime / args.n_detectors)
            : pool;
    auto estimate = [&](double x, std::uint64_t probe) {
      SimConfig config{mode == Mode::Cw ? SourceModel(CwSource(x))
                                        : SourceModel(PulsedSource(args.nu, x)),
                       sim_pool, routing, args.mc.n_events, args.mc.batches};
      return estimate_dtf(config, root.substream(probe));
    };
    const RateAtDtfResult guess = analytic_solve(args.n_detectors);
    BisectOptions options;
    options.log_scale = mode == Mode::Cw;
    const double lo = mode == Mode::Cw ? guess.rate / 4.0 : 0.0;
    const double hi = mode == Mode::Cw ? guess.rate * 4.0 : 1.0;
    result = bisect_rate_mc(estimate, args.target, lo, hi, options);
  } else {
    result = analytic_solve(args.n_detectors);
  }

  RateRow row;
  row.mode = mode;
  row.family = family;
  row.n_detectors = family == Family::Single ? 1 : args.n_detectors;
  row.target_dtf = args.target;
  row.rate = mode == Mode::Pulsed ? result.rate * args.nu : result.rate;
  row.iterations = result.iterations;
  row.speedup = result.rate / analytic_solve(1).rate;

  auto file = open_output(args.output, "");
  std::ostream& out = file ? *file : std::cout;
  if (args.json)
    write_rate_json(out, {row});
  else
    write_rate_csv(out, {row});
  return kExitOk;
}

void write_fit_csv(std::ostream& out, const PolyFit2& fit) {
  out << "family,c0,c1,c2,r_squared\n";
  out << "multiplexed," << csv_num(fit.c0) << ',' << csv_num(fit.c1) << ','
      << csv_num(fit.c2) << ',' << csv_num(fit.r_squared) << '\n';
}

void write_fit_json(std::ostream& out, const PolyFit2& fit) {
  nlohmann::ordered_json j;
  j["family"] = "multiplexed";
  j["c0"] = fit.c0;
  j["c1"] = fit.c1;
  j["c2"] = fit.c2;
  j["r_squared"] = fit.r_squared;
  out << nlohmann::ordered_json::array({j}).dump(2) << '\n';
}

int run_figure(const FigureArgs& args) {
  const FigureData fig =
      build_figure(args.name, kEngines.at(args.engine), args.mc, args.workers);
  for (std::size_t i = 0; i < fig.datasets.size(); ++i) {
    const auto& ds = fig.datasets[i];
    auto file = open_output(args.output, i == 0 ? "" : ds.name);
    if (args.output.empty() && i > 0) std::cout << '\n';
    std::ostream& out = file ? *file : std::cout;
    if (!ds.curve_rows.empty()) {
      args.json ? write_curve_json(out, ds.curve_rows)
                : write_curve_csv(out, ds.curve_rows);
    } else if (!ds.rate_rows.empty()) {
      args.json ? write_rate_json(out, ds.rate_rows)
                : write_rate_csv(out, ds.rate_rows);
    } else if (ds.fit) {
      args.json ? write_fit_json(out, *ds.fit) : write_fit_csv(out, *ds.fit);
    }
  }
  return kExitOk;
}

// Flat key=value config support. CLI11's own config reader wants sectioned
// files for subcommand options, so the file is expanded into argv tokens
// here instead; a key is skipped whenever the flag is already on the
// command line, which is exactly the "flags override file values" rule.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream file(path);
  if (!file) throw std::invalid_argument("cannot read config file: " + path);

  auto has_flag = [&](const std::string& name) {
    const std::string plain = "--" + name;
    const std::string assigned = plain + "=";
    for (const auto& a : args)
      if (a == plain || a.rfind(assigned, 0) == 0) return true;
    return false;
  };

  std::vector<std::string> expanded = args;
  std::string line;
  while (std::getline(file, line)) {
    const auto begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got '" + line + "'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key in '" + line + "'");
    if (key == "config" || has_flag(key)) continue;
    if (value == "true") {
      expanded.push_back("--" + key);
    } else if (value == "false") {
      continue;
    } else {
      expanded.push_back("--" + key);
      expanded.push_back(value);
    }
  }
  return expanded;
}

int cmd_dist_check(bool inject_fault) {
  const DistCheckReport report = run_dist_check(inject_fault);
  std::printf("dist-check: %d cases, max |residual| = %.3e\n", report.cases_run,
              report.max_abs_residual);
  for (const auto& f : report.failures) std::printf("FAIL %s\n", f.c_str());
  std::printf("%s\n", report.passed ? "PASS" : "FAIL");
  return report.passed ? kExitOk : kExitSelfCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Deadtime-fraction modeling for a multiplexed photon-counting detector array"};
  app.require_subcommand(1);

  CurveArgs curve;
  RateArgs rate;
  FigureArgs figure;
  bool inject_fault = false;

  auto add_mc_options = [](CLI::App* cmd, McParams& mc) {
    cmd->add_option("--events", mc.n_events,
                    "Monte Carlo photons (cw) or pulses (pulsed) per grid point");
    cmd->add_option("--batches", mc.batches, "Monte Carlo batches for the error bar");
    cmd->add_option("--seed", mc.seed, "Random seed")->envname("MUXDT_SEED");
  };

  CLI::App* c = app.add_subcommand("dtf-curve", "DTF versus rate (cw) or p (pulsed)");
  c->add_option("--mode", curve.mode)->required()->check(CLI::IsMember(kModes));
  c->add_option("--family", curve.family)->check(CLI::IsMember(kFamilies));
  c->add_option("--engine", curve.engine)->check(CLI::IsMember(kEngines));
  c->add_option("--n", curve.n_detectors, "Detector count (or reduction factor)");
  c->add_option("--deadtime", curve.deadtime, "Detector deadtime, seconds");
  c->add_option("--deadtimes", curve.deadtimes,
                "Per-detector deadtimes, seconds (Monte Carlo only)");
  c->add_option("--nu", curve.nu, "Pulse repetition rate, Hz (pulsed mode)");
  c->add_option("--grid", curve.grid, "Sweep axis, e.g. log:1e5:1e9:61 or lin:0:1:51")
      ->required();
  add_mc_options(c, curve.mc);
  c->add_option("--workers", curve.workers, "Worker threads (0 = hardware)");
  c->add_flag("--json", curve.json, "Emit a JSON records array instead of CSV");
  c->add_option("--output,-o", curve.output, "Output file (default stdout)");
  c->add_option("--config", curve.config, "Flat key=value config file; flags override");

  CLI::App* r = app.add_subcommand("rate-at-dtf", "Rate at which the DTF hits a target");
  r->add_option("--mode", rate.mode)->required()->check(CLI::IsMember(kModes));
  r->add_option("--family", rate.family)->check(CLI::IsMember(kFamilies));
  r->add_option("--engine", rate.engine)->check(CLI::IsMember(kEngines));
  r->add_option("--n", rate.n_detectors, "Detector count (or reduction factor)");
  r->add_option("--deadtime", rate.deadtime, "Detector deadtime, seconds");
  r->add_option("--nu", rate.nu, "Pulse repetition rate, Hz (pulsed mode)");
  r->add_option("--target", rate.target, "Target DTF in (0, 1)")->required();
  add_mc_options(r, rate.mc);
  r->add_flag("--json", rate.json, "Emit JSON instead of CSV");
  r->add_option("--output,-o", rate.output, "Output file (default stdout)");
  r->add_option("--config", rate.config, "Flat key=value config file; flags override");

  CLI::App* f = app.add_subcommand("figure", "Reproduce the dataset behind a figure");
  f->add_option("name", figure.name, "One of: fig3a fig3b fig5a fig5b fig6a fig6b")
      ->required()
      ->check(CLI::IsMember(figure_names()));
  f->add_option("--engine", figure.engine)->check(CLI::IsMember(kEngines));
  add_mc_options(f, figure.mc);
  f->add_option("--workers", figure.workers, "Worker threads (0 = hardware)");
  f->add_flag("--json", figure.json, "Emit JSON instead of CSV");
  f->add_option("--output,-o", figure.output,
                "Output file; extra datasets get suffixed names");
  f->add_option("--config", figure.config, "Flat key=value config file; flags override");

  CLI::App* d = app.add_subcommand("dist-check", "Distribution-layer self-check");
  d->add_flag("--inject-fault", inject_fault)->group("");  // hidden negative control

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args);
    std::reverse(args.begin(), args.end());  // CLI11 vector parse order
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "muxdt: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(c)) return run_curve(curve);
    if (app.got_subcommand(r)) return run_rate(rate);
    if (app.got_subcommand(f)) return run_figure(figure);
    if (app.got_subcommand(d)) return cmd_dist_check(inject_fault);
  } catch (const BracketError& e) {
    std::fprintf(stderr,
                 "muxdt: %s (probed rates [%.6e, %.6e] give DTF [%.6e, %.6e])\n",
                 e.what(), e.lo, e.hi, e.dtf_lo, e.dtf_hi);
    return kExitNumerical;
  } catch (const ModelError& e) {
    std::fprintf(stderr, "muxdt: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "muxdt: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "muxdt: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}
