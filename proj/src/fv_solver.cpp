#include "nltraffic/fv_solver.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace nltraffic {

FluxScheme parse_flux_scheme(const std::string& text) {
  if (text == "godunov") return FluxScheme::Godunov;
  if (text == "llf") return FluxScheme::LocalLaxFriedrichs;
  throw std::invalid_argument(fmt::format("unknown flux scheme '{}' (godunov | llf)", text));
}

std::string to_string(FluxScheme scheme) {
  return scheme == FluxScheme::Godunov ? "godunov" : "llf";
}

namespace {

double lwr_flux(double u) { return u * (1.0 - u); }

}  // namespace

double numerical_flux(double u_left, double u_right, double factor, FluxScheme scheme) {
  if (scheme == FluxScheme::LocalLaxFriedrichs) {
    const double alpha =
        std::max(std::abs(1.0 - 2.0 * u_left), std::abs(1.0 - 2.0 * u_right)) * factor;
    return 0.5 * factor * (lwr_flux(u_left) + lwr_flux(u_right)) -
           0.5 * alpha * (u_right - u_left);
  }
  // Concave flux: min over [uL, uR] if uL <= uR, else max over [uR, uL],
  // which is the sonic value when 1/2 lies inside.
  if (u_left <= u_right) return factor * std::min(lwr_flux(u_left), lwr_flux(u_right));
  if (u_right <= 0.5 && 0.5 <= u_left) return factor * 0.25;
  return factor * std::max(lwr_flux(u_left), lwr_flux(u_right));
}

void SolverConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0))
    throw std::invalid_argument(fmt::format("solver: cfl = {} outside (0, 1]", cfl));
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument(fmt::format("solver: t_end = {} must be positive", t_end));
  if (!(blowup_gradient_factor > 0.0))
    throw std::invalid_argument("solver: blowup_gradient_factor must be positive");
  for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
    const double ts = snapshot_times[k];
    if (!(ts >= 0.0 && ts <= t_end))
      throw std::invalid_argument(
          fmt::format("solver: snapshot time {} outside [0, t_end = {}]", ts, t_end));
    if (k > 0 && !(ts > snapshot_times[k - 1]))
      throw std::invalid_argument("solver: snapshot times must increase strictly");
  }
}

SolverState SolverState::initial(GridFunction u0, const Kernel& kernel, double t0) {
  auto field = compute_ubar(u0, kernel);
  return {t0, std::move(u0), std::move(field)};
}

double stable_dt(const SolverState& state, const SolverConfig& config) {
  double speed = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i)
    speed = std::max(speed, std::abs((1.0 - 2.0 * state.u[i]) * state.nonlocal.factor[i]));
  return config.cfl * state.u.grid.dx() / std::max(speed, 1e-12);
}

namespace {

struct Update {
  std::vector<double> rate;  // −(F_{i+1/2} − F_{i−1/2}) / dx
  double boundary_flux;      // F_{−1/2} − F_{n−1/2}
};

Update flux_divergence(const GridFunction& u, const GridFunction& factor,
                       FluxScheme scheme) {
  const std::size_t n = u.size();
  const double dx = u.grid.dx();
  // Zero-gradient ghosts: the boundary interfaces see the edge cell on both
  // sides.
  std::vector<double> flux(n + 1);
  flux[0] = numerical_flux(u[0], u[0], factor[0], scheme);
  flux[n] = numerical_flux(u[n - 1], u[n - 1], factor[n - 1], scheme);
  for (std::size_t i = 1; i < n; ++i) {
    const double f_face = 0.5 * (factor[i - 1] + factor[i]);
    flux[i] = numerical_flux(u[i - 1], u[i], f_face, scheme);
  }
  Update up{std::vector<double>(n), flux[0] - flux[n]};
  for (std::size_t i = 0; i < n; ++i) up.rate[i] = -(flux[i + 1] - flux[i]) / dx;
  return up;
}

void check_state(const SolverState& s) {
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const double v = s.u[i];
    if (!std::isfinite(v))
      throw NumericalFailure(
          fmt::format("non-finite density at cell {} (t = {})", i, s.t), s);
    if (v < -kDensityTol || v > 1.0 + kDensityTol)
      throw NumericalFailure(
          fmt::format("maximum principle violated at cell {} (t = {}): u = {}", i, s.t, v), s);
  }
}

}  // namespace

StepResult advance(const SolverState& state, const SolverConfig& config, double dt_max) {
  const double dt = std::min(stable_dt(state, config), dt_max);
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw NumericalFailure(fmt::format("invalid time step {} at t = {}", dt, state.t), state);

  const auto& kernel = config.kernel;
  const auto first = flux_divergence(state.u, state.nonlocal.factor, config.flux);
  std::vector<double> next(state.u.values);
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += dt * first.rate[i];
  double inflow = dt * first.boundary_flux;

  if (config.ssp2) {
    GridFunction stage(state.u.grid, next);
    const auto stage_field = compute_ubar(stage, kernel);
    const auto second = flux_divergence(stage, stage_field.factor, config.flux);
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = 0.5 * state.u[i] + 0.5 * (next[i] + dt * second.rate[i]);
    inflow = 0.5 * dt * (first.boundary_flux + second.boundary_flux);
  }

  GridFunction u(state.u.grid, std::move(next));
  for (double v : u.values) {
    if (!std::isfinite(v))
      throw NumericalFailure(fmt::format("non-finite density after step at t = {}", state.t),
                             state);
  }
  StepResult out{SolverState::initial(std::move(u), kernel, state.t + dt), dt, inflow};
  check_state(out.state);
  return out;
}

SolverState step(const SolverState& state, const SolverConfig& config) {
  return advance(state, config).state;
}

double gradient_indicator(const GridFunction& u) {
  double peak = 0.0;
  for (double v : u.values) peak = std::max(peak, std::abs(v));
  if (!(peak > 1e-14)) throw std::domain_error("gradient_indicator: vacuum state");
  const auto d = spatial_derivative(u);
  double slope = 0.0;
  for (double v : d.values) slope = std::max(slope, std::abs(v));
  return slope / peak;
}

double front_position(const GridFunction& u, double level) {
  const auto& g = u.grid;
  for (std::size_t i = u.size(); i-- > 1;) {
    if (u[i - 1] >= level && u[i] < level) {
      const double s = (u[i - 1] - level) / (u[i - 1] - u[i]);
      return g.center(i - 1) + s * g.dx();
    }
  }
  if (u[u.size() - 1] >= level) return g.center(u.size() - 1);
  throw std::domain_error(fmt::format("front_position: level {} never attained", level));
}

double right_tail_mass(const GridFunction& u) {
  constexpr std::size_t kTailCells = 5;
  double sum = 0.0;
  for (std::size_t i = u.size() - kTailCells; i < u.size(); ++i) sum += std::abs(u[i]);
  return sum * u.grid.dx();
}

namespace {

DiagnosticRecord record(const SolverState& s) {
  const auto [lo, hi] = std::minmax_element(s.u.values.begin(), s.u.values.end());
  const auto [flo, fhi] =
      std::minmax_element(s.nonlocal.factor.values.begin(), s.nonlocal.factor.values.end());
  const double peak = std::max(std::abs(*lo), std::abs(*hi));
  return {s.t,  total_mass(s.u), *lo, *hi, peak > 1e-14 ? gradient_indicator(s.u) : 0.0,
          *flo, *fhi};
}

}  // namespace

EvolveResult evolve(const GridFunction& u0, const SolverConfig& config) {
  config.validate();
  if (!(u0.grid == config.grid))
    throw std::invalid_argument("evolve: initial data grid differs from the config grid");
  require_density(u0);
  if (config.kernel.kind() == Kernel::Kind::Infinite && right_tail_mass(u0) > kTailMassLimit)
    throw std::invalid_argument(fmt::format(
        "evolve: right-tail mass {} exceeds {}; the look-ahead integral would be truncated",
        right_tail_mass(u0), kTailMassLimit));

  const double threshold = config.blowup_gradient_factor / config.grid.dx();
  auto state = SolverState::initial(u0, config.kernel);
  EvolveResult out{{}, {}, state};
  auto& diag = out.diagnostics;

  std::size_t next_snap = 0;
  auto take_snapshots = [&](const SolverState& s) {
    while (next_snap < config.snapshot_times.size() &&
           config.snapshot_times[next_snap] <= s.t + 1e-12) {
      out.snapshots.push_back({config.snapshot_times[next_snap], s.u});
      ++next_snap;
    }
  };
  auto observe = [&](const SolverState& s) {
    diag.series.push_back(record(s));
    const double steep = diag.series.back().grad_indicator;
    diag.blowup.max_gradient = std::max(diag.blowup.max_gradient, steep);
    if (!diag.blowup.detected && steep >= threshold) {
      diag.blowup.detected = true;
      diag.blowup.grid_resolved = true;
      diag.blowup.t_detect = s.t;
    }
  };

  observe(state);
  take_snapshots(state);
  constexpr std::size_t kMaxSteps = 50'000'000;
  while (state.t < config.t_end - 1e-12) {
    if (config.stop_on_blowup && diag.blowup.detected) break;
    if (diag.steps >= kMaxSteps) throw NumericalFailure("evolve: step limit exceeded", state);
    double target = config.t_end;
    if (next_snap < config.snapshot_times.size())
      target = std::min(target, config.snapshot_times[next_snap]);
    const double mass_before = total_mass(state.u);
    auto res = advance(state, config, target - state.t);
    if (target - res.state.t < 1e-12 * std::max(1.0, target)) res.state.t = target;
    const double drift = std::abs(total_mass(res.state.u) - mass_before - res.boundary_inflow);
    diag.max_step_mass_drift = std::max(diag.max_step_mass_drift, drift);
    diag.boundary_inflow += res.boundary_inflow;
    ++diag.steps;
    state = std::move(res.state);
    observe(state);
    take_snapshots(state);
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace nltraffic
