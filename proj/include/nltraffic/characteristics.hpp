#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace nltraffic {

/// A point (d, u) of the characteristic dynamics at time t, d = ∂x u.
struct CharState {
  double d = 0.0;
  double u = 0.0;
  double t = 0.0;
};

/// The slow-down factor exp(-ū) seen along a characteristic path.
class FactorModel {
 public:
  /// Throws std::invalid_argument unless c ∈ (0, 1].
  static FactorModel constant(double c);
  /// Piecewise-linear series; times strictly increasing starting at 0,
  /// values in (0, 1].
  static FactorModel sampled(std::vector<double> times, std::vector<double> values);

  double at(double t) const;
  /// ∫_0^t factor.
  double integral(double t) const;
  /// Last time covered; +inf for a constant factor.
  double horizon() const;
  bool is_constant() const { return times_.empty(); }
  double min_value() const;
  double max_value() const;

 private:
  FactorModel() = default;
  double constant_ = 1.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// (ḋ, u̇) with exp(-ū) replaced by `factor`:
///   ḋ = (2d² − (3u − 5u²)d − u³(1 − u)) factor,  u̇ = −u²(1 − u) factor.
std::pair<double, double> rhs_dynamics(const CharState& s, double factor);

inline constexpr double kDefaultBlowupCap = 1e8;

struct CharTrajectory {
  std::vector<CharState> samples;
  /// Time at which d crossed the cap, if it did before t_end.
  std::optional<double> blowup_time;
};

/// Integrates the (d, u) dynamics from s0 over [s0.t, s0.t + t_end] with an
/// adaptive Dormand–Prince 5(4) pair, recording every accepted step.
/// Seeds on u ∈ {0, 1} use the exact Riccati solutions.
/// Throws std::invalid_argument for t_end ≤ 0, blowup_cap < 1e6, u outside
/// [0, 1], or a sampled factor shorter than t_end.
CharTrajectory integrate_characteristic(const CharState& s0, const FactorModel& factor,
                                        double t_end,
                                        double blowup_cap = kDefaultBlowupCap);

/// d as a function of u along a phase-plane path.
struct PhaseTrajectory {
  double d0 = 0.0;
  double u0 = 0.0;
  /// (u, d) with u strictly decreasing from u0.
  std::vector<std::pair<double, double>> samples;
  /// u at which d escaped past the cap, if it did above u_end.
  std::optional<double> escape_u;
};

/// Integrates d'(u) = (2d² − (3u − 5u²)d − u³(1 − u)) / (−u²(1 − u)) from u0
/// down to u_end (relative tolerance 1e-10). Throws std::invalid_argument
/// unless 0 < u_end ≤ u0 < 1.
PhaseTrajectory phase_trajectory(double d0, double u0, double u_end,
                                 double blowup_cap = kDefaultBlowupCap);

/// Roots d₋ ≤ d₊ of 2d² − (3u − 5u²)d − u³(1 − u).
std::pair<double, double> d_roots(double u);

/// Closed-form time for η' = −e^{−m}η²(1 − η) to fall from u0 to u1.
double time_to_level(double u0, double u1, double m);

/// Time for η' = −e^{−m}η²(1 − η), η(0) = u0, to reach u1, by direct
/// numerical integration and event location.
double eta_hitting_time(double u0, double u1, double m);

/// η(t) for η' = −e^{−m}η²(1 − η), η(0) = u0.
double eta_at(double u0, double m, double t);

struct BlowupBound {
  double d_minus = 0.0;  // roots for the frozen level u1
  double d_plus = 0.0;
  double sharp = 0.0;   // T* from the logarithmic formula
  double coarse = 0.0;  // t1 + 2e^m / C*, C* = 4 u1
};

/// Upper bound for the blow-up time once u ≤ u1 from time t1 onward,
/// d± = (3 ± √(9 + 8u1)) u1 / 4. Requires d_at_t1 > 2 d₊.
BlowupBound blowup_time_bound(double d_at_t1, double u1, double m, double t1);

/// Uniform floor C* = (d0 − σ(u0)) u₂³ / u0³ on the slope of a
/// supercritical path once u ≤ u₂; for u0 < u₂ the floor is the margin
/// d0 − σ(u0) itself. Throws std::domain_error unless d0 > σ(u0).
double slope_floor(double d0, double u0);

struct AnalyticBounds {
  double t1 = 0.0;
  double u1 = 0.0;
  double d_minus = 0.0;
  double d_plus = 0.0;
  double T_star_sharp = 0.0;
  double T_star_coarse = 0.0;
  double C_star = 0.0;
};

/// Two-phase break-down bound for a supercritical seed under a factor
/// ≥ e^{−m}: u first falls to u1 = C*/4 (skipped if u0 ≤ u1), then the
/// Riccati phase blows up no later than T*. u1 is capped at u0.
AnalyticBounds supercritical_bounds(double d0, double u0, double m);

}  // namespace nltraffic
