#include "nltraffic/cli.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "nltraffic/characteristics.hpp"
#include "nltraffic/io.hpp"
#include "nltraffic/scenarios.hpp"
#include "nltraffic/threshold.hpp"

namespace nltraffic::cli {

namespace fs = std::filesystem;

std::string to_string(Command c) {
  switch (c) {
    case Command::Classify: return "classify";
    case Command::Evolve: return "evolve";
    case Command::CompareKernels: return "compare-kernels";
    case Command::PhasePortrait: return "phase-portrait";
    case Command::ThresholdCurve: return "threshold-curve";
    case Command::Bounds: return "bounds";
  }
  return {};
}

nlohmann::json RunConfig::to_json() const {
  auto opt = [](const auto& v) -> nlohmann::json {
    if (v) return *v;
    return nullptr;
  };
  return {
      {"command", to_string(command)},
      {"datum", datum},
      {"x_left", opt(x_left)},
      {"x_right", opt(x_right)},
      {"n_cells", n_cells},
      {"seed", seed},
      {"kernel", kernel.to_string()},
      {"cfl", cfl},
      {"t_end", opt(t_end)},
      {"flux", nltraffic::to_string(flux)},
      {"blowup_factor", blowup_factor},
      {"ssp2", ssp2},
      {"stop_on_blowup", stop_on_blowup},
      {"snapshots", snapshots},
      {"d0", opt(d0)},
      {"u0", opt(u0)},
      {"m", m},
      {"u_end", u_end},
      {"factor", factor},
      {"mode", mode},
      {"samples", samples},
      {"out", out.string()},
      {"config", config_file ? nlohmann::json(config_file->string()) : nlohmann::json(nullptr)},
  };
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError(fmt::format("--config: cannot read '{}'", path.string()));
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(fmt::format("--config: line {}: expected 'key = value'", lineno));
    auto key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw UsageError(fmt::format("--config: line {}: empty key or value", lineno));
    kv[key] = value;
  }
  return kv;
}

namespace {

// CLI11 validator wrapping Kernel::parse so messages carry "--kernel".
const CLI::Validator kKernelValidator(
    [](std::string& text) -> std::string {
      try {
        (void)Kernel::parse(text);
        return {};
      } catch (const std::invalid_argument& e) {
        return e.what();
      }
    },
    "KERNEL", "kernel");

struct Options {
  RunConfig cfg;
  std::string kernel_text = "infinite";
  std::string flux_text = "godunov";
  double t_end = 0.0;
  double x_left = 0.0;
  double x_right = 0.0;
  double d0 = 0.0;
  double u0 = 0.0;
  bool no_stop = false;
};

void add_grid(CLI::App* sc, Options& o) {
  sc->add_option("--datum", o.cfg.datum, "Initial datum: bump | subinit | random-bump")
      ->check(CLI::IsMember({"bump", "subinit", "random-bump"}));
  sc->add_option("--n-cells", o.cfg.n_cells, "Number of cells")->check(CLI::Range(4, 100'000'000));
  sc->add_option("--x-left", o.x_left, "Left end of the domain");
  sc->add_option("--x-right", o.x_right, "Right end of the domain");
  sc->add_option("--seed", o.cfg.seed, "Seed for random-bump");
}

void add_solver(CLI::App* sc, Options& o, bool with_kernel) {
  if (with_kernel)
    sc->add_option("--kernel", o.kernel_text,
                   "zero | sk | infinite | uniform | sk:L=<float> | linear")
        ->check(kKernelValidator);
  sc->add_option("--cfl", o.cfg.cfl, "CFL number")->check(CLI::Range(1e-6, 1.0));
  sc->add_option("--t-end", o.t_end, "Final time")->check(CLI::PositiveNumber);
  sc->add_option("--flux", o.flux_text, "godunov | llf")
      ->check(CLI::IsMember({"godunov", "llf"}));
  sc->add_option("--blowup-factor", o.cfg.blowup_factor,
                 "Break-down threshold as a fraction of 1/dx")
      ->check(CLI::PositiveNumber);
  sc->add_option("--snapshots", o.cfg.snapshots, "Number of equally spaced snapshots")
      ->check(CLI::Range(1, 100000));
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Nonlocal traffic-flow laboratory", "nltraffic"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = "out";
  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--out", out_dir, "Output directory");
    sc->add_option("--config", config_path, "key = value configuration file");
  };

  auto* classify = app.add_subcommand("classify", "Sub/supercritical verdict for a datum");
  add_grid(classify, o);
  add_common(classify);

  auto* evolve_cmd = app.add_subcommand("evolve", "Evolve a datum under one kernel");
  add_grid(evolve_cmd, o);
  add_solver(evolve_cmd, o, true);
  evolve_cmd->add_flag("--ssp2", o.cfg.ssp2, "Two-stage SSP time stepping");
  evolve_cmd->add_flag("--continue-after-blowup", o.no_stop,
                       "Keep evolving after break-down is detected");
  add_common(evolve_cmd);

  auto* compare = app.add_subcommand("compare-kernels", "Evolve a datum under the four kernels");
  compare->add_option("--datum", o.cfg.datum, "Initial datum: bump | subinit")
      ->check(CLI::IsMember({"bump", "subinit"}));
  compare->add_option("--n-cells", o.cfg.n_cells, "Number of cells")
      ->check(CLI::Range(4, 100'000'000));
  add_solver(compare, o, false);
  add_common(compare);

  auto* phase = app.add_subcommand("phase-portrait", "Characteristic path from (d0, u0)");
  phase->add_option("--d0", o.d0, "Initial slope")->required();
  phase->add_option("--u0", o.u0, "Initial density")->required()->check(CLI::Range(0.0, 1.0));
  phase->add_option("--mode", o.cfg.mode, "phase (d against u) | time (d, u against t)")
      ->check(CLI::IsMember({"phase", "time"}));
  phase->add_option("--u-end", o.cfg.u_end, "Lowest density in phase mode")
      ->check(CLI::Range(1e-12, 1.0));
  phase->add_option("--t-end", o.t_end, "Final time in time mode")->check(CLI::PositiveNumber);
  phase->add_option("--factor", o.cfg.factor, "Constant slow-down factor in (0, 1]")
      ->check(CLI::Range(1e-300, 1.0));
  add_common(phase);

  auto* curve = app.add_subcommand("threshold-curve", "Tabulate the critical threshold");
  curve->add_option("--samples", o.cfg.samples, "Number of samples")
      ->check(CLI::Range(2, 100'000'000));
  add_common(curve);

  auto* bounds = app.add_subcommand("bounds", "Analytic break-down bounds for (d0, u0)");
  bounds->add_option("--d0", o.d0, "Initial slope")->required();
  bounds->add_option("--u0", o.u0, "Initial density")->required()->check(CLI::Range(0.0, 1.0));
  bounds->add_option("--m", o.cfg.m, "Total mass")->check(CLI::NonNegativeNumber);
  add_common(bounds);

  // Config-file keys are spliced in as flags ahead of the command line so
  // that explicit flags win.
  std::vector<std::string> argv = args;
  for (std::size_t k = 0; k < args.size(); ++k) {
    std::string path;
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].starts_with("--config=")) path = args[k].substr(9);
    if (path.empty()) continue;
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config_file(path)) {
      if (key == "config" || key == "ssp2" || key == "continue-after-blowup") {
        if (key != "config" && value != "false" && value != "0") injected.push_back("--" + key);
        continue;
      }
      injected.push_back("--" + key);
      injected.push_back(value);
    }
    const auto pos = std::find_if(argv.begin(), argv.end(),
                                  [](const std::string& a) { return !a.starts_with("-"); });
    if (pos != argv.end()) argv.insert(std::next(pos), injected.begin(), injected.end());
    o.cfg.config_file = path;
    break;
  }

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig& cfg = o.cfg;
  cfg.out = out_dir;
  const auto* active = app.get_subcommands().front();
  const std::string name = active->get_name();
  for (Command c : {Command::Classify, Command::Evolve, Command::CompareKernels,
                    Command::PhasePortrait, Command::ThresholdCurve, Command::Bounds})
    if (to_string(c) == name) cfg.command = c;

  auto given = [&](const std::string& flag) {
    const auto* opt = active->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--kernel")) cfg.kernel = Kernel::parse(o.kernel_text);
  if (given("--flux")) cfg.flux = parse_flux_scheme(o.flux_text);
  if (given("--t-end")) cfg.t_end = o.t_end;
  if (given("--x-left")) cfg.x_left = o.x_left;
  if (given("--x-right")) cfg.x_right = o.x_right;
  if (given("--d0")) cfg.d0 = o.d0;
  if (given("--u0")) cfg.u0 = o.u0;
  cfg.stop_on_blowup = !o.no_stop;

  if (cfg.x_left && cfg.x_right && !(*cfg.x_left < *cfg.x_right))
    throw UsageError("--x-left: must be smaller than --x-right");
  if (cfg.command == Command::PhasePortrait && cfg.mode == "phase") {
    if (!(*cfg.u0 > 0.0 && *cfg.u0 < 1.0))
      throw UsageError("--u0: phase mode needs 0 < u0 < 1");
    if (cfg.u_end > *cfg.u0) throw UsageError("--u-end: must not exceed --u0");
  }
  return cfg;
}

namespace {

InitialDatum resolve_datum(const RunConfig& cfg) {
  InitialDatum d = cfg.datum == "random-bump"
                       ? InitialDatum{"random-bump", random_compact_bump(cfg.seed), -2.0, 6.0,
                                      Verdict::Supercritical, 0.0}
                       : find_datum(cfg.datum);
  if (cfg.x_left) d.x_left = *cfg.x_left;
  if (cfg.x_right) d.x_right = *cfg.x_right;
  return d;
}

class Bundle {
 public:
  explicit Bundle(fs::path root) : root_(std::move(root)) {}

  void text(const fs::path& rel, const std::string& content) {
    io::write_text(root_ / rel, content);
    files_.push_back(rel.generic_string());
  }
  template <class Writer>
  void csv(const fs::path& rel, Writer&& w) {
    std::ostringstream os;
    w(os);
    text(rel, os.str());
  }
  void add(const std::vector<fs::path>& rels) {
    for (const auto& r : rels) files_.push_back(r.generic_string());
  }
  void manifest(const RunConfig& cfg) {
    const nlohmann::json m = {{"files", files_}, {"config", cfg.to_json()}};
    io::write_text(root_ / "manifest.json", m.dump(2) + "\n");
  }
  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

std::vector<double> evenly_spaced(double t_end, std::size_t count) {
  if (count == 1) return {t_end};
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k)
    t[k] = k + 1 == count ? t_end : t_end * static_cast<double>(k) / static_cast<double>(count - 1);
  return t;
}

void run_classify(const RunConfig& cfg, Bundle& b, std::ostream& log) {
  const auto datum = resolve_datum(cfg);
  const auto u0 = datum.sample(cfg.n_cells);
  const auto c = classify_initial_data(u0);
  const auto d = spatial_derivative(u0);
  b.text("classification.json", io::to_json(c).dump(2) + "\n");
  b.csv("contour.csv", [&](std::ostream& os) {
    os << "x,u0,d0\n";
    for (std::size_t i = 0; i < u0.size(); ++i)
      os << io::format_real(u0.grid.center(i)) << ',' << io::format_real(u0[i]) << ','
         << io::format_real(d[i]) << '\n';
  });
  b.csv("threshold_overlay.csv", [](std::ostream& os) {
    io::write_threshold_curve(os, threshold_curve_export(1001));
  });
  log << cfg.datum << ": " << to_string(c.verdict);
  if (c.witness)
    log << fmt::format(" at x0 = {:.6g} (u0 = {:.6g}, u0' = {:.6g}, margin = {:.6g})",
                       c.witness->x0, c.witness->u0_at_x0, c.witness->d0_at_x0,
                       c.witness->margin);
  log << '\n';
}

void run_evolve(const RunConfig& cfg, Bundle& b, std::ostream& log) {
  const auto datum = resolve_datum(cfg);
  const auto u0 = datum.sample(cfg.n_cells);
  SolverConfig sc{u0.grid};
  sc.kernel = cfg.kernel;
  sc.cfl = cfg.cfl;
  sc.t_end = cfg.t_end.value_or(4.0);
  sc.snapshot_times = evenly_spaced(sc.t_end, cfg.snapshots);
  sc.flux = cfg.flux;
  sc.blowup_gradient_factor = cfg.blowup_factor;
  sc.ssp2 = cfg.ssp2;
  sc.stop_on_blowup = cfg.stop_on_blowup;
  const auto r = evolve(u0, sc);
  const fs::path dir = "kernel_" + cfg.kernel.tag();
  for (const auto& s : r.snapshots)
    b.csv(dir / fmt::format("snap_t{}.csv", s.t),
          [&](std::ostream& os) { io::write_grid_function(os, s.u); });
  b.csv(dir / "diagnostics.csv",
        [&](std::ostream& os) { io::write_diagnostics(os, r.diagnostics); });
  b.text(dir / "blowup.json", io::to_json(r.diagnostics.blowup).dump(2) + "\n");
  const auto& bl = r.diagnostics.blowup;
  log << fmt::format("{} / {}: t = {:.6g} after {} steps, break-down {}", cfg.datum,
                     cfg.kernel.to_string(), r.final_state.t, r.diagnostics.steps,
                     bl.detected ? fmt::format("detected at t = {:.6g}", bl.t_detect)
                                 : std::string("not detected"))
      << '\n';
}

void run_compare(const RunConfig& cfg, Bundle& b, std::ostream& log) {
  Experiment e = find_experiment(cfg.datum == "bump" ? "supercritical-compare"
                                                     : "subcritical-compare");
  e.n_cells = cfg.n_cells;
  e.cfl = cfg.cfl;
  e.flux = cfg.flux;
  e.blowup_gradient_factor = cfg.blowup_factor;
  if (cfg.t_end) e.t_end = *cfg.t_end;
  e.snapshot_times = evenly_spaced(e.t_end, cfg.snapshots);
  const auto r = run_experiment(e);
  b.add(write_bundle(e, r, b.root()));
  for (const auto& run : r.runs) {
    const auto& bl = run.result.diagnostics.blowup;
    log << fmt::format("{:>10}: break-down {}", run.kernel.to_string(),
                       bl.detected ? fmt::format("at t = {:.4g}", bl.t_detect)
                                   : std::string("not detected"))
        << '\n';
  }
}

void run_phase(const RunConfig& cfg, Bundle& b, std::ostream& log) {
  if (cfg.mode == "phase") {
    const auto traj = phase_trajectory(*cfg.d0, *cfg.u0, cfg.u_end);
    b.csv("trajectory.csv", [&](std::ostream& os) { io::write_phase_trajectory(os, traj); });
    if (traj.escape_u) log << fmt::format("slope escaped at u = {:.6g}\n", *traj.escape_u);
  } else {
    const auto traj = integrate_characteristic({*cfg.d0, *cfg.u0, 0.0},
                                               FactorModel::constant(cfg.factor),
                                               cfg.t_end.value_or(10.0));
    b.csv("trajectory.csv", [&](std::ostream& os) { io::write_trajectory(os, traj); });
    if (traj.blowup_time) log << fmt::format("blow-up at t = {:.6g}\n", *traj.blowup_time);
  }
  b.csv("threshold_overlay.csv", [](std::ostream& os) {
    io::write_threshold_curve(os, threshold_curve_export(1001));
  });
}

void run_bounds(const RunConfig& cfg, Bundle& b, std::ostream& log) {
  const auto bounds = supercritical_bounds(*cfg.d0, *cfg.u0, cfg.m);
  const auto j = io::to_json(bounds);
  b.text("bounds.json", j.dump(2) + "\n");
  log << j.dump(2) << '\n';
}

}  // namespace

int dispatch(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  Bundle bundle(cfg.out);
  try {
    switch (cfg.command) {
      case Command::Classify: run_classify(cfg, bundle, log); break;
      case Command::Evolve: run_evolve(cfg, bundle, log); break;
      case Command::CompareKernels: run_compare(cfg, bundle, log); break;
      case Command::PhasePortrait: run_phase(cfg, bundle, log); break;
      case Command::ThresholdCurve:
        bundle.csv("threshold_curve.csv", [&](std::ostream& os) {
          io::write_threshold_curve(os, threshold_curve_export(cfg.samples));
        });
        break;
      case Command::Bounds: run_bounds(cfg, bundle, log); break;
    }
  } catch (const NumericalFailure& e) {
    const fs::path dump = cfg.out / "failure_state.csv";
    std::ostringstream os;
    io::write_grid_function(os, e.state().u);
    io::write_text(dump, os.str());
    err << "numerical failure: " << e.what() << "\nstate dumped to " << dump.string() << '\n';
    return kExitNumerical;
  } catch (const std::system_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::logic_error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::runtime_error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  bundle.manifest(cfg);
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }
  return dispatch(cfg, log, err);
}

}  // namespace nltraffic::cli
