#include "nltraffic/characteristics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "nltraffic/threshold.hpp"

namespace nltraffic {

namespace odeint = boost::numeric::odeint;

namespace {

using State2 = std::array<double, 2>;

constexpr double kAbsTol = 1e-12;
constexpr double kRelTol = 1e-10;
constexpr std::size_t kMaxSteps = 20'000'000;
constexpr double kRangeTol = 1e-9;

double clamp_density(double u) {
  if (u < -kRangeTol || u > 1.0 + kRangeTol)
    throw std::logic_error(fmt::format("characteristic left the density range: u = {}", u));
  return std::clamp(u, 0.0, 1.0);
}

// Time at which 1/d, interpolated linearly between two accepted steps,
// reaches 1/cap. Near a Riccati escape 1/d is close to linear in t.
double escape_crossing(double t0, double d0, double t1, double d1, double cap) {
  if (!std::isfinite(d1) || d0 >= cap) return t1;
  const double w0 = 1.0 / d0;
  const double w1 = std::isfinite(d1) ? 1.0 / d1 : 0.0;
  const double target = 1.0 / cap;
  if (w0 == w1) return t1;
  const double s = std::clamp((w0 - target) / (w0 - w1), 0.0, 1.0);
  return t0 + s * (t1 - t0);
}

}  // namespace

FactorModel FactorModel::constant(double c) {
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument(fmt::format("factor: constant {} outside (0, 1]", c));
  FactorModel f;
  f.constant_ = c;
  return f;
}

FactorModel FactorModel::sampled(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("factor: sampled series needs >= 2 matching points");
  if (times.front() != 0.0)
    throw std::invalid_argument("factor: sampled series must start at t = 0");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0 && !(times[k] > times[k - 1]))
      throw std::invalid_argument("factor: sample times must increase strictly");
    if (!(values[k] > 0.0 && values[k] <= 1.0))
      throw std::invalid_argument(
          fmt::format("factor: sample {} = {} outside (0, 1]", k, values[k]));
  }
  FactorModel f;
  f.times_ = std::move(times);
  f.values_ = std::move(values);
  return f;
}

double FactorModel::at(double t) const {
  if (is_constant()) return constant_;
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double s = (t - times_[k]) / (times_[k + 1] - times_[k]);
  return values_[k] + s * (values_[k + 1] - values_[k]);
}

double FactorModel::integral(double t) const {
  if (is_constant()) return constant_ * t;
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < times_.size() && times_[k] < t; ++k) {
    const double b = std::min(t, times_[k + 1]);
    acc += 0.5 * (values_[k] + at(b)) * (b - times_[k]);
  }
  return acc;
}

double FactorModel::horizon() const {
  return is_constant() ? std::numeric_limits<double>::infinity() : times_.back();
}

double FactorModel::min_value() const {
  return is_constant() ? constant_ : *std::min_element(values_.begin(), values_.end());
}

double FactorModel::max_value() const {
  return is_constant() ? constant_ : *std::max_element(values_.begin(), values_.end());
}

std::pair<double, double> rhs_dynamics(const CharState& s, double factor) {
  const double d = s.d;
  const double u = s.u;
  const double d_dot =
      (2.0 * d * d - (3.0 * u - 5.0 * u * u) * d - u * u * u * (1.0 - u)) * factor;
  const double u_dot = -u * u * (1.0 - u) * factor;
  return {d_dot, u_dot};
}

namespace {

// u stays at 0 or 1; d follows a Riccati equation in the rescaled time
// τ = ∫ factor dt:
//   u = 0: d' = 2d²       →  d = d0 / (1 − 2 d0 τ)
//   u = 1: d' = 2d(d + 1) →  d/(d + 1) = d0/(d0 + 1) e^{2τ}
CharTrajectory integrate_degenerate(const CharState& s0, const FactorModel& factor,
                                    double t_end, double cap) {
  const double d0 = s0.d;
  const bool at_zero = s0.u == 0.0;
  auto d_of_tau = [&](double tau) {
    if (at_zero) return d0 / (1.0 - 2.0 * d0 * tau);
    if (d0 == -1.0) return -1.0;
    const double r = d0 / (d0 + 1.0) * std::exp(2.0 * tau);
    return r / (1.0 - r);
  };

  std::optional<double> tau_cap;
  if (d0 > 0.0 && d0 < cap) {
    tau_cap = at_zero ? (1.0 - d0 / cap) / (2.0 * d0)
                      : 0.5 * std::log(cap / (1.0 + cap) * (d0 + 1.0) / d0);
  }

  double t_stop = t_end;
  std::optional<double> blowup;
  if (d0 >= cap) {
    blowup = 0.0;
    t_stop = 0.0;
  } else if (tau_cap && factor.integral(t_end) >= *tau_cap) {
    // invert the monotone τ(t) by bisection
    double lo = 0.0;
    double hi = t_end;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (factor.integral(mid) < *tau_cap ? lo : hi) = mid;
    }
    blowup = hi;
    t_stop = hi;
  }

  CharTrajectory out;
  constexpr int kSamples = 400;
  for (int k = 0; k <= kSamples; ++k) {
    const double t = t_stop * k / kSamples;
    const double d = (blowup && k == kSamples) ? cap : d_of_tau(factor.integral(t));
    out.samples.push_back({d, s0.u, s0.t + t});
  }
  if (blowup) out.blowup_time = s0.t + *blowup;
  return out;
}

}  // namespace

CharTrajectory integrate_characteristic(const CharState& s0, const FactorModel& factor,
                                        double t_end, double blowup_cap) {
  if (!(t_end > 0.0)) throw std::invalid_argument("integrate_characteristic: t_end must be > 0");
  if (!(blowup_cap >= 1e6))
    throw std::invalid_argument("integrate_characteristic: blowup_cap must be >= 1e6");
  if (!(s0.u >= 0.0 && s0.u <= 1.0) || !std::isfinite(s0.d))
    throw std::invalid_argument(
        fmt::format("integrate_characteristic: invalid seed (d, u) = ({}, {})", s0.d, s0.u));
  if (factor.horizon() < t_end)
    throw std::invalid_argument(fmt::format(
        "integrate_characteristic: factor series covers t <= {} but t_end = {}",
        factor.horizon(), t_end));

  if (s0.u == 0.0 || s0.u == 1.0) return integrate_degenerate(s0, factor, t_end, blowup_cap);

  // Time is measured from the seed; the factor series starts at 0.
  auto system = [&factor](const State2& x, State2& dxdt, double t) {
    const auto [dd, du] = rhs_dynamics({x[0], x[1], t}, factor.at(t));
    dxdt = {dd, du};
  };

  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State2>>(kAbsTol, kRelTol);
  State2 x{s0.d, s0.u};
  double t = 0.0;
  double dt = std::min(1e-3, t_end);

  CharTrajectory out;
  out.samples.push_back(s0);
  std::size_t steps = 0;
  while (t < t_end) {
    if (++steps > kMaxSteps)
      throw std::runtime_error("integrate_characteristic: step limit exceeded");
    dt = std::min(dt, t_end - t);
    const State2 before = x;
    const double t_before = t;
    if (stepper.try_step(system, x, t, dt) == odeint::fail) {
      if (dt < 1e-300) throw std::runtime_error("integrate_characteristic: step size underflow");
      continue;
    }
    if (!std::isfinite(x[0]) || x[0] > blowup_cap) {
      const double tc = escape_crossing(t_before, before[0], t, x[0], blowup_cap);
      out.samples.push_back({blowup_cap, clamp_density(std::isfinite(x[1]) ? x[1] : before[1]),
                             s0.t + tc});
      out.blowup_time = s0.t + tc;
      return out;
    }
    x[1] = clamp_density(x[1]);
    out.samples.push_back({x[0], x[1], s0.t + t});
  }
  return out;
}

PhaseTrajectory phase_trajectory(double d0, double u0, double u_end, double blowup_cap) {
  if (!(u0 > 0.0 && u0 < 1.0))
    throw std::invalid_argument(
        fmt::format("phase_trajectory: u0 = {} must lie in (0, 1)", u0));
  if (!(u_end > 0.0 && u_end <= u0))
    throw std::invalid_argument(
        fmt::format("phase_trajectory: u_end = {} must lie in (0, u0]", u_end));

  PhaseTrajectory out{d0, u0, {{u0, d0}}, std::nullopt};
  if (u_end == u0) return out;

  // Independent variable u runs downward; integrate in s = u0 − u.
  auto system = [u0](const std::array<double, 1>& x, std::array<double, 1>& dxds, double s) {
    dxds[0] = -sigma_ode_rhs(u0 - s, x[0]);
  };
  auto stepper =
      odeint::make_controlled<odeint::runge_kutta_dopri5<std::array<double, 1>>>(kAbsTol, kRelTol);
  std::array<double, 1> x{d0};
  const double s_end = u0 - u_end;
  double s = 0.0;
  double ds = std::min(1e-4, s_end);
  std::size_t steps = 0;
  while (s < s_end) {
    if (++steps > kMaxSteps) throw std::runtime_error("phase_trajectory: step limit exceeded");
    ds = std::min(ds, s_end - s);
    const double before = x[0];
    const double s_before = s;
    if (stepper.try_step(system, x, s, ds) == odeint::fail) {
      if (ds < 1e-300) throw std::runtime_error("phase_trajectory: step size underflow");
      continue;
    }
    if (!std::isfinite(x[0]) || x[0] > blowup_cap) {
      out.escape_u = u0 - escape_crossing(s_before, before, s, x[0], blowup_cap);
      return out;
    }
    out.samples.emplace_back(s >= s_end ? u_end : u0 - s, x[0]);
  }
  return out;
}

std::pair<double, double> d_roots(double u) {
  const double b = 3.0 * u - 5.0 * u * u;
  const double disc = b * b + 8.0 * u * u * u * (1.0 - u);
  if (disc < -1e-15)
    throw std::logic_error(fmt::format("d_roots: negative discriminant {} at u = {}", disc, u));
  const double root = std::sqrt(std::max(disc, 0.0));
  return {(b - root) / 4.0, (b + root) / 4.0};
}

namespace {

void check_levels(double u0, double u1, const char* who) {
  if (!(u0 > 0.0 && u0 < 1.0 && u1 > 0.0 && u1 < u0))
    throw std::invalid_argument(
        fmt::format("{}: need 0 < u1 < u0 < 1, got u0 = {}, u1 = {}", who, u0, u1));
}

double eta_primitive(double u) { return 1.0 / u + std::log((1.0 - u) / u); }

}  // namespace

double time_to_level(double u0, double u1, double m) {
  check_levels(u0, u1, "time_to_level");
  if (!(m >= 0.0)) throw std::invalid_argument("time_to_level: m must be >= 0");
  return std::exp(m) * (eta_primitive(u1) - eta_primitive(u0));
}

namespace {

auto eta_system(double m) {
  const double c = std::exp(-m);
  return [c](const std::array<double, 1>& x, std::array<double, 1>& dxdt, double) {
    dxdt[0] = -c * x[0] * x[0] * (1.0 - x[0]);
  };
}

}  // namespace

double eta_at(double u0, double m, double t) {
  std::array<double, 1> x{u0};
  odeint::integrate_adaptive(
      odeint::make_controlled<odeint::runge_kutta_dopri5<std::array<double, 1>>>(1e-14, 1e-12),
      eta_system(m), x, 0.0, t, std::min(1e-3, t));
  return x[0];
}

double eta_hitting_time(double u0, double u1, double m) {
  check_levels(u0, u1, "eta_hitting_time");
  using S = std::array<double, 1>;
  auto stepper =
      odeint::make_dense_output<odeint::runge_kutta_dopri5<S>>(1e-14, 1e-12);
  const auto sys = eta_system(m);
  stepper.initialize(S{u0}, 0.0, 1e-3);
  std::size_t steps = 0;
  while (stepper.current_state()[0] > u1) {
    if (++steps > kMaxSteps) throw std::runtime_error("eta_hitting_time: step limit exceeded");
    stepper.do_step(sys);
  }
  double lo = stepper.previous_time();
  double hi = stepper.current_time();
  S tmp{};
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    stepper.calc_state(mid, tmp);
    (tmp[0] > u1 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

BlowupBound blowup_time_bound(double d_at_t1, double u1, double m, double t1) {
  if (!(u1 > 0.0 && u1 < 1.0) || !(m >= 0.0) || !(t1 >= 0.0))
    throw std::invalid_argument(fmt::format(
        "blowup_time_bound: invalid arguments u1 = {}, m = {}, t1 = {}", u1, m, t1));
  BlowupBound b;
  const double root = std::sqrt(9.0 + 8.0 * u1);
  b.d_minus = (3.0 - root) / 4.0 * u1;
  b.d_plus = (3.0 + root) / 4.0 * u1;
  if (!(d_at_t1 > 2.0 * b.d_plus))
    throw std::invalid_argument(fmt::format(
        "blowup_time_bound: need d(t1) > 2 d+ = {}, got {}", 2.0 * b.d_plus, d_at_t1));
  const double rate = 2.0 * std::exp(-m) * (b.d_plus - b.d_minus);
  b.sharp = std::isinf(d_at_t1)
                ? t1
                : t1 + std::log((d_at_t1 - b.d_minus) / (d_at_t1 - b.d_plus)) / rate;
  const double c_star = 4.0 * u1;
  b.coarse = t1 + 2.0 * std::exp(m) / c_star;
  if (b.sharp > b.coarse)
    throw std::logic_error(fmt::format(
        "blowup_time_bound: sharp bound {} exceeds coarse bound {}", b.sharp, b.coarse));
  return b;
}

double slope_floor(double d0, double u0) {
  if (!(u0 > 0.0 && u0 < 1.0))
    throw std::invalid_argument(fmt::format("slope_floor: u0 = {} must lie in (0, 1)", u0));
  const auto& sigma = ThresholdCurve::standard();
  const double margin = d0 - sigma(u0);
  if (!(margin > 0.0))
    throw std::domain_error(fmt::format(
        "slope_floor: (d0, u0) = ({}, {}) is not supercritical", d0, u0));
  // Below u₂ the path already sits in the boost region and d never drops
  // under the margin; (u₂/u0)³ > 1 would overstate the floor there.
  const double r = std::min(u0, sigma.boost_limit()) / u0;
  return margin * r * r * r;
}

AnalyticBounds supercritical_bounds(double d0, double u0, double m) {
  AnalyticBounds a;
  a.C_star = slope_floor(d0, u0);
  // A seed already below C*/4 starts the Riccati phase at once.
  a.u1 = std::min(a.C_star / 4.0, u0);
  a.t1 = a.u1 < u0 ? time_to_level(u0, a.u1, m) : 0.0;
  const auto b = blowup_time_bound(a.C_star, a.u1, m, a.t1);
  a.d_minus = b.d_minus;
  a.d_plus = b.d_plus;
  a.T_star_sharp = b.sharp;
  a.T_star_coarse = b.coarse;
  return a;
}

}  // namespace nltraffic
