#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nltraffic/nonlocal_core.hpp"

namespace nltraffic {

enum class FluxScheme { LocalLaxFriedrichs, Godunov };

FluxScheme parse_flux_scheme(const std::string& text);
std::string to_string(FluxScheme scheme);

/// Interface flux for F(u) = u(1 − u) · factor, factor frozen at the
/// interface.
double numerical_flux(double u_left, double u_right, double factor, FluxScheme scheme);

struct SolverConfig {
  explicit SolverConfig(GridSpec g) : grid(g) {}

  GridSpec grid;
  Kernel kernel = Kernel::infinite();
  double cfl = 0.45;
  double t_end = 1.0;
  std::vector<double> snapshot_times;
  FluxScheme flux = FluxScheme::Godunov;
  /// Break-down is declared once gradient_indicator reaches this fraction of
  /// 1/dx. A captured shock of jump Δu reads about Δu / (2 dx max|u|), so
  /// the factor has to sit well below 1/2 for shocks weaker than the peak.
  double blowup_gradient_factor = 0.05;
  /// Heun (SSP-RK2) instead of forward Euler.
  bool ssp2 = false;
  bool stop_on_blowup = true;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct SolverState {
  double t = 0.0;
  GridFunction u;
  NonlocalField nonlocal;

  static SolverState initial(GridFunction u0, const Kernel& kernel, double t0 = 0.0);
};

/// Raised when the state stops being a valid density. Carries the last
/// state so callers can dump it.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, SolverState state)
      : std::runtime_error(what), state_(std::move(state)) {}
  const SolverState& state() const { return state_; }

 private:
  SolverState state_;
};

struct StepResult {
  SolverState state;
  double dt = 0.0;
  /// dt times (flux in at the left boundary − flux out at the right).
  double boundary_inflow = 0.0;
};

/// Largest stable step cfl · dx / max|(1 − 2u) e^{−ū}|.
double stable_dt(const SolverState& state, const SolverConfig& config);

/// One conservative update with outflow (zero-gradient) boundaries and ū
/// recomputed from the current stage. The step is min(stable_dt, dt_max).
StepResult advance(const SolverState& state, const SolverConfig& config,
                   double dt_max = INFINITY);

/// advance() without the bookkeeping.
SolverState step(const SolverState& state, const SolverConfig& config);

/// max |∂x u| / max |u| with central differences; throws std::domain_error
/// on a vacuum state.
double gradient_indicator(const GridFunction& u);

/// Largest x where u crosses `level` downward, linearly interpolated
/// between cell centers. Throws std::domain_error if u never reaches it.
double front_position(const GridFunction& u, double level);

struct DiagnosticRecord {
  double t;
  double mass;
  double min_u;
  double max_u;
  double grad_indicator;
  double factor_min;
  double factor_max;
};

struct BlowupReport {
  bool detected = false;
  double t_detect = 0.0;
  /// Largest gradient indicator seen during the run.
  double max_gradient = 0.0;
  /// The indicator reached blowup_gradient_factor / dx at some step.
  bool grid_resolved = false;
};

struct Diagnostics {
  std::vector<DiagnosticRecord> series;
  BlowupReport blowup;
  /// max over steps of |Δmass − boundary inflow|.
  double max_step_mass_drift = 0.0;
  /// Cumulative boundary inflow over the run.
  double boundary_inflow = 0.0;
  std::size_t steps = 0;
};

struct Snapshot {
  double t;
  GridFunction u;
};

struct EvolveResult {
  std::vector<Snapshot> snapshots;
  Diagnostics diagnostics;
  SolverState final_state;
};

/// Mass within the last few cells before the right boundary.
double right_tail_mass(const GridFunction& u);

inline constexpr double kTailMassLimit = 1e-8;

/// Runs to t_end (or the first break-down detection when stop_on_blowup),
/// landing exactly on every snapshot time.
EvolveResult evolve(const GridFunction& u0, const SolverConfig& config);

}  // namespace nltraffic
