#include "nltraffic/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "nltraffic/io.hpp"

namespace nltraffic {

double bump_init(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}

double subcritical_init(double x) {
  if (x <= -3.0) return 1.0 / (x * x);
  if (x <= 0.0) {
    const double p = ((((3.0 * x + 35.0) * x + 123.0) * x + 81.0) * x - 162.0) * x + 162.0;
    return p / 1458.0;
  }
  return std::exp(-x) / 9.0;
}

const std::vector<InitialDatum>& datum_catalog() {
  static const std::vector<InitialDatum> catalog = {
      {"bump", bump_init, -6.0, 10.0, Verdict::Supercritical, 0.0},
      // ∫_{-∞}^{-200} x^{-2} dx = 1/200
      {"subinit", subcritical_init, -200.0, 40.0, Verdict::Subcritical, 1.0 / 200.0},
  };
  return catalog;
}

const InitialDatum& find_datum(const std::string& name) {
  for (const auto& d : datum_catalog())
    if (d.name == name) return d;
  throw std::invalid_argument(fmt::format("unknown datum '{}' (bump | subinit)", name));
}

std::function<double(double)> random_compact_bump(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(-0.6, 0.6);
  std::uniform_real_distribution<double> width(0.1, 0.4);
  std::uniform_real_distribution<double> weight(0.2, 1.0);
  std::uniform_int_distribution<int> count(1, 3);

  struct Term {
    double c, w, a;
  };
  std::vector<Term> terms(static_cast<std::size_t>(count(rng)));
  for (auto& t : terms) t = {center(rng), width(rng), weight(rng)};

  auto raw = [terms](double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    double s = 0.0;
    for (const auto& t : terms) s += t.a * std::exp(-(x - t.c) * (x - t.c) / (t.w * t.w));
    return s * std::exp(1.0 - 1.0 / (1.0 - x * x));
  };
  double peak = 0.0;
  for (int k = 0; k <= 2000; ++k) peak = std::max(peak, raw(-1.0 + k / 1000.0));
  const double scale = std::uniform_real_distribution<double>(0.1, 0.9)(rng) / peak;
  return [raw, scale](double x) { return scale * raw(x); };
}

std::vector<double> quarter_times(double t_end) {
  return {0.0, 0.25 * t_end, 0.5 * t_end, 0.75 * t_end, t_end};
}

void Experiment::validate() const {
  if (name.empty()) throw std::invalid_argument("experiment: empty name");
  const auto& known = find_datum(datum.name);
  if (known.x_left != datum.x_left || known.x_right != datum.x_right)
    throw std::invalid_argument(
        fmt::format("experiment {}: datum '{}' domain differs from the catalog", name, datum.name));
  if (n_cells < 4) throw std::invalid_argument(fmt::format("experiment {}: n_cells < 4", name));
  if (!kernels.empty()) {
    SolverConfig cfg{datum.grid(n_cells)};
    cfg.t_end = t_end;
    cfg.snapshot_times = snapshot_times;
    cfg.cfl = cfl;
    cfg.blowup_gradient_factor = blowup_gradient_factor;
    cfg.validate();
  }
}

std::vector<Experiment> experiment_catalog() {
  const auto& bump = find_datum("bump");
  const auto& sub = find_datum("subinit");
  return {
      {"supercritical-compare", bump, comparison_kernels(), quarter_times(4.0), 4.0},
      {"subcritical-compare", sub, comparison_kernels(), quarter_times(20.0), 20.0},
      {"threshold-contour", bump, {}, {}, 0.0},
      {"threshold-contour-subinit", sub, {}, {}, 0.0},
  };
}

const Experiment& find_experiment(const std::string& name) {
  static const std::vector<Experiment> catalog = experiment_catalog();
  for (const auto& e : catalog)
    if (e.name == name) return e;
  throw std::invalid_argument(fmt::format("unknown experiment '{}'", name));
}

ExperimentResult run_experiment(const Experiment& e) {
  e.validate();
  const auto u0 = e.datum.sample(e.n_cells);

  ExperimentResult r;
  r.classification = classify_initial_data(u0);
  const auto d0 = spatial_derivative(u0);
  r.contour.reserve(u0.size());
  for (std::size_t i = 0; i < u0.size(); ++i)
    r.contour.push_back({u0.grid.center(i), u0[i], d0[i]});

  for (const auto& kernel : e.kernels) {
    SolverConfig cfg{u0.grid};
    cfg.kernel = kernel;
    cfg.cfl = e.cfl;
    cfg.t_end = e.t_end;
    cfg.snapshot_times = e.snapshot_times;
    cfg.flux = e.flux;
    cfg.blowup_gradient_factor = e.blowup_gradient_factor;
    cfg.stop_on_blowup = false;
    try {
      auto result = evolve(u0, cfg);
      for (auto& rec : result.diagnostics.series) rec.mass += e.datum.left_tail_mass;
      r.runs.push_back({kernel, std::move(result)});
    } catch (const NumericalFailure& err) {
      throw NumericalFailure(
          fmt::format("experiment {}, kernel {}: {}", e.name, kernel.to_string(), err.what()),
          err.state());
    } catch (const std::exception& err) {
      throw std::runtime_error(
          fmt::format("experiment {}, kernel {}: {}", e.name, kernel.to_string(), err.what()));
    }
  }
  return r;
}

namespace {

template <class Writer>
std::string render(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

}  // namespace

std::vector<std::filesystem::path> write_bundle(const Experiment& e, const ExperimentResult& r,
                                                const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  const fs::path base = e.name;
  auto emit = [&](const fs::path& rel, const std::string& text) {
    io::write_text(root / rel, text);
    files.push_back(rel);
  };

  emit(base / "classification.json", io::to_json(r.classification).dump(2) + "\n");
  emit(base / "threshold_overlay.csv", render([](std::ostream& os) {
         io::write_threshold_curve(os, threshold_curve_export(1001));
       }));
  emit(base / "contour.csv", render([&](std::ostream& os) {
         os << "x,u0,d0\n";
         for (const auto& [x, u, d] : r.contour)
           os << io::format_real(x) << ',' << io::format_real(u) << ',' << io::format_real(d)
              << '\n';
       }));

  for (const auto& run : r.runs) {
    const fs::path dir = base / ("kernel_" + run.kernel.tag());
    for (const auto& snap : run.result.snapshots)
      emit(dir / fmt::format("snap_t{}.csv", snap.t),
           render([&](std::ostream& os) { io::write_grid_function(os, snap.u); }));
    emit(dir / "diagnostics.csv",
         render([&](std::ostream& os) { io::write_diagnostics(os, run.result.diagnostics); }));
    emit(dir / "blowup.json", io::to_json(run.result.diagnostics.blowup).dump(2) + "\n");
  }

  nlohmann::json meta = {
      {"experiment", e.name},
      {"datum", e.datum.name},
      {"x_left", e.datum.x_left},
      {"x_right", e.datum.x_right},
      {"n_cells", e.n_cells},
      {"t_end", e.t_end},
      {"cfl", e.cfl},
      {"flux", to_string(e.flux)},
      {"blowup_gradient_factor", e.blowup_gradient_factor},
      {"snapshot_times", e.snapshot_times},
      {"left_tail_mass", e.datum.left_tail_mass},
      {"expected_verdict", to_string(e.datum.expected)},
  };
  nlohmann::json kernels = nlohmann::json::array();
  for (const auto& k : e.kernels) kernels.push_back(k.to_string());
  meta["kernels"] = kernels;
  emit(base / "metadata.json", meta.dump(2) + "\n");
  return files;
}

}  // namespace nltraffic
