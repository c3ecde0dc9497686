#include "nltraffic/nonlocal_core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace nltraffic {

GridSpec::GridSpec(double x_left, double x_right, std::size_t n_cells)
    : x_left_(x_left), x_right_(x_right), n_cells_(n_cells) {
  if (!(x_left < x_right) || !std::isfinite(x_left) || !std::isfinite(x_right))
    throw std::invalid_argument(
        fmt::format("grid: need x_left < x_right, got [{}, {}]", x_left, x_right));
  if (n_cells < 4)
    throw std::invalid_argument(fmt::format("grid: need n_cells >= 4, got {}", n_cells));
  dx_ = (x_right - x_left) / static_cast<double>(n_cells);
}

GridSpec GridSpec::refined(std::size_t factor) const {
  return GridSpec(x_left_, x_right_, n_cells_ * factor);
}

GridFunction::GridFunction(GridSpec g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
  if (values.size() != grid.n_cells())
    throw std::invalid_argument(fmt::format(
        "grid function: {} values for {} cells", values.size(), grid.n_cells()));
}

GridFunction::GridFunction(GridSpec g, double fill)
    : grid(g), values(g.n_cells(), fill) {}

GridFunction GridFunction::sample(const GridSpec& g,
                                  const std::function<double(double)>& f) {
  std::vector<double> v(g.n_cells());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.center(i));
  return {g, std::move(v)};
}

void require_density(const GridFunction& u, double tol) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = u[i];
    if (!std::isfinite(v) || v < -tol || v > 1.0 + tol)
      throw std::domain_error(fmt::format(
          "density out of range at cell {} (x = {}): u = {}", i, u.grid.center(i), v));
  }
}

Kernel Kernel::sk_scaled(double length) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument(
        fmt::format("kernel: look-ahead distance must be positive, got {}", length));
  return Kernel(Kind::SkScaled, length);
}

Kernel Kernel::parse(std::string_view text) {
  if (text == "zero") return zero();
  if (text == "sk") return sk_unit();
  if (text == "infinite") return infinite();
  if (text == "uniform") return uniform();
  if (text == "linear") return linear();
  constexpr std::string_view prefix = "sk:L=";
  if (text.starts_with(prefix)) {
    const auto num = text.substr(prefix.size());
    double length = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), length);
    if (ec != std::errc{} || ptr != num.data() + num.size() || num.empty())
      throw std::invalid_argument(fmt::format("kernel: malformed length in '{}'", text));
    return sk_scaled(length);
  }
  throw std::invalid_argument(fmt::format("kernel: unknown kernel '{}'", text));
}

std::string Kernel::to_string() const {
  switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::SkUnit: return "sk";
    case Kind::Infinite: return "infinite";
    case Kind::Uniform: return "uniform";
    case Kind::Linear: return "linear";
    case Kind::SkScaled: return fmt::format("sk:L={}", length_);
  }
  return {};
}

std::string Kernel::tag() const {
  if (kind_ == Kind::SkScaled) return fmt::format("sk_L{}", length_);
  return to_string();
}

std::vector<Kernel> comparison_kernels() {
  return {Kernel::zero(), Kernel::sk_unit(), Kernel::infinite(), Kernel::uniform()};
}

double total_mass(const GridFunction& u) {
  double sum = 0.0;
  for (double v : u.values) sum += v;
  return u.grid.dx() * sum;
}

namespace {

// Exact antiderivatives of the piecewise-constant reconstruction, measured
// from the left boundary: C(x) = int u dy and M(x) = int y u dy.
class CellIntegrals {
 public:
  explicit CellIntegrals(const GridFunction& u) : u_(u) {
    const auto& g = u.grid;
    const std::size_t n = g.n_cells();
    c_.assign(n + 1, 0.0);
    m_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = g.face(i);
      const double b = g.face(i + 1);
      c_[i + 1] = c_[i] + u[i] * g.dx();
      m_[i + 1] = m_[i] + u[i] * 0.5 * (b * b - a * a);
    }
  }

  double zeroth(double x) const {
    const auto [i, a] = locate(x);
    if (i >= u_.size()) return c_.back();
    return c_[i] + u_[i] * (x - a);
  }

  double first(double x) const {
    const auto [i, a] = locate(x);
    if (i >= u_.size()) return m_.back();
    return m_[i] + u_[i] * 0.5 * (x * x - a * a);
  }

  double total() const { return c_.back(); }

 private:
  // Cell containing x and its left face; index n_cells past the right end.
  std::pair<std::size_t, double> locate(double x) const {
    const auto& g = u_.grid;
    if (x >= g.x_right()) return {g.n_cells(), g.x_right()};
    const double s = std::max(0.0, (x - g.x_left()) / g.dx());
    const auto i = std::min(static_cast<std::size_t>(s), g.n_cells() - 1);
    return {i, g.face(i)};
  }

  const GridFunction& u_;
  std::vector<double> c_;
  std::vector<double> m_;
};

}  // namespace

NonlocalField compute_ubar(const GridFunction& u, const Kernel& kernel) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || u[i] < -kNegativeDensityReject)
      throw std::domain_error(fmt::format(
          "compute_ubar: corrupted density at cell {}: u = {}", i, u[i]));
  }
  const auto& g = u.grid;
  const std::size_t n = g.n_cells();
  std::vector<double> ubar(n, 0.0);

  switch (kernel.kind()) {
    case Kernel::Kind::Zero:
      break;
    case Kernel::Kind::Uniform:
      std::fill(ubar.begin(), ubar.end(), total_mass(u));
      break;
    case Kernel::Kind::Infinite: {
      // Suffix sum from the right, half of the own cell.
      double ahead = 0.0;
      for (std::size_t k = n; k-- > 0;) {
        ubar[k] = g.dx() * (ahead + 0.5 * u[k]);
        ahead += u[k];
      }
      break;
    }
    case Kernel::Kind::SkUnit:
    case Kernel::Kind::SkScaled: {
      const CellIntegrals integ(u);
      const double c_end = integ.total();
      for (std::size_t i = 0; i < n; ++i) {
        const double x = g.center(i);
        // C(x_i) is exact at centers: faces plus half a cell.
        const double c_here = integ.zeroth(x);
        const double c_edge = x + kernel.length() >= g.x_right()
                                  ? c_end
                                  : integ.zeroth(x + kernel.length());
        ubar[i] = c_edge - c_here;
      }
      break;
    }
    case Kernel::Kind::Linear: {
      // K(x - y) = 2 (1 - (y - x)) on y - x in (0, 1).
      const CellIntegrals integ(u);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = g.center(i);
        const double b = x + 1.0;
        const double dc = integ.zeroth(b) - integ.zeroth(x);
        const double dm = integ.first(b) - integ.first(x);
        ubar[i] = 2.0 * ((1.0 + x) * dc - dm);
      }
      break;
    }
  }

  std::vector<double> factor(n);
  for (std::size_t i = 0; i < n; ++i) factor[i] = std::exp(-ubar[i]);
  return {GridFunction(g, std::move(ubar)), GridFunction(g, std::move(factor))};
}

GridFunction spatial_derivative(const GridFunction& u) {
  const std::size_t n = u.size();
  const double dx = u.grid.dx();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
  d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
  d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dx);
  return {u.grid, std::move(d)};
}

}  // namespace nltraffic
