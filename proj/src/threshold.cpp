#include "nltraffic/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace nltraffic {

double sigma_ode_rhs(double x, double sigma) {
  const double num = 2.0 * sigma * sigma - (3.0 * x - 5.0 * x * x) * sigma -
                     x * x * x * (1.0 - x);
  return num / (-x * x * (1.0 - x));
}

namespace {

// Two-term series about the singular origin. Matching powers in the ODE
// gives σ'(0) = 1, then a = −1 and b = 0 for σ = x + a x² + b x³.
double sigma_series(double x) { return x - x * x; }

constexpr double kResidualTol = 1e-6;
constexpr double kResidualStep = 1e-6;
constexpr double kResidualEdge = 1e-6;

}  // namespace

double sigma_residual(const std::function<double(double)>& candidate, double u,
                      const std::function<double(double)>& derivative) {
  if (!(u >= kResidualEdge && u <= 1.0 - kResidualEdge))
    throw std::domain_error(
        fmt::format("sigma_residual: u = {} too close to the singular endpoints", u));
  const double s = candidate(u);
  const double ds =
      derivative ? derivative(u)
                 : (candidate(u + kResidualStep) - candidate(u - kResidualStep)) /
                       (2.0 * kResidualStep);
  return ds - sigma_ode_rhs(u, s);
}

ThresholdCurve::ThresholdCurve(std::size_t n_intervals) {
  const double h = 1.0 / static_cast<double>(n_intervals);
  const auto seed_index = static_cast<std::size_t>(std::llround(kSeedPoint / h));
  if (n_intervals < 100 || seed_index < 1 || seed_index + 2 > n_intervals)
    throw std::invalid_argument("threshold curve: too few nodes");

  nodes_.resize(n_intervals + 1);
  values_.resize(n_intervals + 1);
  for (std::size_t k = 0; k <= n_intervals; ++k) nodes_[k] = static_cast<double>(k) * h;

  for (std::size_t k = 0; k <= seed_index; ++k) values_[k] = sigma_series(nodes_[k]);

  // RK4 up to the last node short of x = 1; the ODE is stable forward
  // (perturbations decay like exp(∫A) with A < 0).
  for (std::size_t k = seed_index; k + 1 < n_intervals; ++k) {
    const double x = nodes_[k];
    const double s = values_[k];
    const double k1 = sigma_ode_rhs(x, s);
    const double k2 = sigma_ode_rhs(x + 0.5 * h, s + 0.5 * h * k1);
    const double k3 = sigma_ode_rhs(x + 0.5 * h, s + 0.5 * h * k2);
    const double k4 = sigma_ode_rhs(x + h, s + h * k3);
    values_[k + 1] = s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  values_[n_intervals] = 0.0;

  bool residual_ok = true;
  bool table_ok = true;
  for (double u = 0.01; u <= 0.99 + 1e-12; u += 0.001) {
    if (std::abs(sigma_residual(closed_form, u)) > kResidualTol) residual_ok = false;
    if (std::abs(closed_form(u) - interpolate(u)) > kResidualTol) table_ok = false;
  }
  closed_form_verified_ = residual_ok && table_ok;

  // Boost region scanned on the table; 1e-10 absorbs integration roundoff
  // at the tangency.
  std::size_t last = 0;
  while (last + 1 < nodes_.size() &&
         values_[last + 1] >= 0.75 * nodes_[last + 1] - 1e-10)
    ++last;
  boost_limit_ = std::max(0.2, nodes_[last]);
}

const ThresholdCurve& ThresholdCurve::standard() {
  static const ThresholdCurve curve;
  return curve;
}

double ThresholdCurve::interpolate(double u) const {
  const std::size_t n = nodes_.size() - 1;
  const double h = nodes_[1];
  const double s = u / h;
  auto k = static_cast<std::ptrdiff_t>(std::floor(s));
  k = std::clamp<std::ptrdiff_t>(k - 1, 0, static_cast<std::ptrdiff_t>(n) - 3);
  double result = 0.0;
  for (std::ptrdiff_t a = k; a < k + 4; ++a) {
    double w = 1.0;
    for (std::ptrdiff_t b = k; b < k + 4; ++b)
      if (b != a) w *= (s - static_cast<double>(b)) / static_cast<double>(a - b);
    result += w * values_[static_cast<std::size_t>(a)];
  }
  return result;
}

double ThresholdCurve::operator()(double u) const {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::domain_error(fmt::format("sigma: u = {} outside [0, 1]", u));
  return closed_form_verified_ ? closed_form(u) : interpolate(u);
}

double sigma_eval(double u) { return ThresholdCurve::standard()(u); }

std::vector<std::pair<double, double>> threshold_curve_export(std::size_t n_samples) {
  if (n_samples < 2) throw std::invalid_argument("threshold curve export: need n_samples >= 2");
  std::vector<std::pair<double, double>> out(n_samples);
  const auto last = static_cast<double>(n_samples - 1);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double u = k + 1 == n_samples ? 1.0 : static_cast<double>(k) / last;
    out[k] = {u, sigma_eval(u)};
  }
  return out;
}

const char* to_string(Verdict v) {
  return v == Verdict::Supercritical ? "SUPERCRITICAL" : "SUBCRITICAL";
}

Classification classify_initial_data(const GridFunction& u0) {
  require_density(u0);
  for (std::size_t i = 0; i + 1 < u0.size(); ++i) {
    if (std::abs(u0[i + 1] - u0[i]) > 0.5)
      throw std::domain_error(fmt::format(
          "classify: jump of {} between cells {} and {} is not resolved",
          u0[i + 1] - u0[i], i, i + 1));
  }
  const auto d = spatial_derivative(u0);
  const auto& sigma = ThresholdCurve::standard();

  Classification c;
  c.max_margin = -INFINITY;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    const double ui = std::clamp(u0[i], 0.0, 1.0);
    const double margin = d[i] - sigma(ui);
    if (margin > c.max_margin) {
      c.max_margin = margin;
      argmax = i;
    }
  }
  c.min_margin = -c.max_margin;
  if (c.max_margin > kClassifierDeadBand) {
    c.verdict = Verdict::Supercritical;
    c.witness = Witness{u0.grid.center(argmax), u0[argmax], d[argmax], c.max_margin};
  } else {
    c.verdict = Verdict::Subcritical;
    c.in_dead_band = c.max_margin > 0.0;
  }
  return c;
}

}  // namespace nltraffic
