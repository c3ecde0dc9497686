#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "nltraffic/nonlocal_core.hpp"

namespace nltraffic {

/// Right side of the threshold ODE
///   σ'(x) = (2σ² − (3x − 5x²)σ − x³(1 − x)) / (−x²(1 − x)),
/// singular at x = 0 and x = 1.
double sigma_ode_rhs(double x, double sigma);

/// Critical threshold σ : [0, 1] → R separating subcritical from
/// supercritical slopes d = ∂x u.
///
/// The table is built by classical RK4 on a uniform node set, seeded from
/// the series σ = x − x² + O(x⁴) at x₀ = 1e-3 to step over the 0/0 at the
/// origin. σ(1) = 0 is imposed at the last node. After construction the
/// candidate closed form u(1 − u) is checked against the ODE residual and
/// against the table; evaluation uses it only if both checks pass.
class ThresholdCurve {
 public:
  static constexpr std::size_t kDefaultNodes = 10000;
  static constexpr double kSeedPoint = 1e-3;

  explicit ThresholdCurve(std::size_t n_intervals = kDefaultNodes);

  /// Shared instance with the default table.
  static const ThresholdCurve& standard();

  /// σ(u); throws std::domain_error outside [0, 1].
  double operator()(double u) const;
  /// Cubic (four-point Lagrange) interpolation of the integrated table.
  double interpolate(double u) const;

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  bool closed_form_verified() const { return closed_form_verified_; }
  /// Largest u₂ with σ(u) ≥ (3/4) u on [0, u₂], floored at 0.2.
  double boost_limit() const { return boost_limit_; }

  static double closed_form(double u) { return u * (1.0 - u); }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  bool closed_form_verified_ = false;
  double boost_limit_ = 0.2;
};

/// σ(u) from the shared curve.
double sigma_eval(double u);

/// Residual of a candidate σ̂ in the threshold ODE at u:
/// σ̂'(u) − rhs(u, σ̂(u)). Without `derivative`, σ̂' is a central difference
/// with h = 1e-6. Throws std::domain_error unless u ∈ [1e-6, 1 − 1e-6].
double sigma_residual(const std::function<double(double)>& candidate, double u,
                      const std::function<double(double)>& derivative = {});

/// Uniform samples (u, σ(u)) on [0, 1] including both endpoints.
std::vector<std::pair<double, double>> threshold_curve_export(std::size_t n_samples);

enum class Verdict { Subcritical, Supercritical };

const char* to_string(Verdict v);

struct Witness {
  double x0;
  double u0_at_x0;
  double d0_at_x0;
  double margin;  // d0 − σ(u0) > 0
};

struct Classification {
  Verdict verdict = Verdict::Subcritical;
  std::optional<Witness> witness;  // set iff supercritical
  /// max over x of u0'(x) − σ(u0(x)); ≤ kClassifierDeadBand when subcritical.
  double max_margin = 0.0;
  /// min over x of σ(u0(x)) − u0'(x).
  double min_margin = 0.0;
  /// Largest margin lies in (0, dead band]: reported subcritical but only
  /// just.
  bool in_dead_band = false;
};

inline constexpr double kClassifierDeadBand = 1e-10;

/// Applies the sharp threshold condition u0' ≤ σ(u0) pointwise.
/// Throws std::domain_error if u0 leaves [0, 1] or has an adjacent jump
/// above 0.5 (not resolved by the grid).
Classification classify_initial_data(const GridFunction& u0);

}  // namespace nltraffic
