#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nltraffic/fv_solver.hpp"
#include "nltraffic/nonlocal_core.hpp"
#include "nltraffic/threshold.hpp"

namespace nltraffic {

/// Smooth compactly supported bump exp(−1/(1 − x²)) on |x| < 1.
double bump_init(double x);

/// C² profile with algebraic decay 1/x² on the left, a quintic bridge on
/// (−3, 0] and e^{−x}/9 on the right.
double subcritical_init(double x);

struct InitialDatum {
  std::string name;
  std::function<double(double)> profile;
  double x_left;
  double x_right;
  Verdict expected;
  /// Exact mass of the profile left of x_left (added to the mass diagnostic).
  double left_tail_mass = 0.0;

  GridSpec grid(std::size_t n_cells) const { return {x_left, x_right, n_cells}; }
  GridFunction sample(std::size_t n_cells) const {
    return GridFunction::sample(grid(n_cells), profile);
  }
};

/// Catalog entries: "bump" and "subinit".
const std::vector<InitialDatum>& datum_catalog();
/// Throws std::invalid_argument for an unknown name.
const InitialDatum& find_datum(const std::string& name);

/// Random smooth nonnegative compactly supported profile on [−1, 1]: a sum
/// of Gaussians times a C^∞ cutoff, peak scaled into (0, 0.9]. Deterministic
/// in `seed`.
std::function<double(double)> random_compact_bump(std::uint64_t seed);

struct Experiment {
  std::string name;
  InitialDatum datum;
  std::vector<Kernel> kernels;  // empty: classification only
  std::vector<double> snapshot_times;
  double t_end = 0.0;
  std::size_t n_cells = 4000;
  FluxScheme flux = FluxScheme::Godunov;
  double cfl = 0.45;
  double blowup_gradient_factor = 0.05;

  /// Throws std::invalid_argument if the recipe is inconsistent.
  void validate() const;
};

/// supercritical-compare, subcritical-compare, threshold-contour,
/// threshold-contour-subinit.
std::vector<Experiment> experiment_catalog();
const Experiment& find_experiment(const std::string& name);

/// Snapshots at 0, t_end/4, ..., t_end.
std::vector<double> quarter_times(double t_end);

struct KernelRun {
  Kernel kernel;
  EvolveResult result;
};

struct ExperimentResult {
  Classification classification;
  /// (x, u0(x), u0'(x)) on the experiment grid.
  std::vector<std::array<double, 3>> contour;
  std::vector<KernelRun> runs;
};

/// Classifies the datum and evolves it under every kernel (runs continue
/// past break-down so all snapshots exist). Solver failures are rethrown
/// with the experiment and kernel named.
ExperimentResult run_experiment(const Experiment& e);

/// Writes the bundle under `root / e.name` and returns the files written,
/// relative to `root`.
std::vector<std::filesystem::path> write_bundle(const Experiment& e, const ExperimentResult& r,
                                                const std::filesystem::path& root);

}  // namespace nltraffic
