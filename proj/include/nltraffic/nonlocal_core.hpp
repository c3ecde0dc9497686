#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nltraffic {

/// Tolerance on the density range [0, 1] for discrete profiles.
inline constexpr double kDensityTol = 1e-8;

/// Values below this are treated as a corrupted density by compute_ubar.
inline constexpr double kNegativeDensityReject = 1e-6;

/// Uniform 1-D grid of `n_cells` cells on [x_left, x_right].
class GridSpec {
 public:
  GridSpec(double x_left, double x_right, std::size_t n_cells);

  double x_left() const { return x_left_; }
  double x_right() const { return x_right_; }
  std::size_t n_cells() const { return n_cells_; }
  double dx() const { return dx_; }

  /// Cell center x_i = x_left + (i + 1/2) dx.
  double center(std::size_t i) const {
    return x_left_ + (static_cast<double>(i) + 0.5) * dx_;
  }
  /// Left face of cell i (face n_cells is the right boundary).
  double face(std::size_t i) const {
    return x_left_ + static_cast<double>(i) * dx_;
  }

  /// Same interval, `factor` times as many cells.
  GridSpec refined(std::size_t factor) const;

  bool operator==(const GridSpec&) const = default;

 private:
  double x_left_;
  double x_right_;
  std::size_t n_cells_;
  double dx_;
};

/// Cell values of a real profile on a uniform grid.
struct GridFunction {
  GridSpec grid;
  std::vector<double> values;

  GridFunction(GridSpec g, std::vector<double> v);
  explicit GridFunction(GridSpec g, double fill = 0.0);

  /// Point-samples `f` at cell centers.
  static GridFunction sample(const GridSpec& g,
                             const std::function<double(double)>& f);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::span<const double> view() const { return values; }
};

/// Throws std::domain_error unless every value is finite and in
/// [-tol, 1 + tol].
void require_density(const GridFunction& u, double tol = kDensityTol);

/// Look-ahead interaction kernel K with support in (-inf, 0].
class Kernel {
 public:
  enum class Kind { Zero, SkUnit, Infinite, Uniform, SkScaled, Linear };

  static Kernel zero() { return Kernel(Kind::Zero, 0.0); }
  static Kernel sk_unit() { return Kernel(Kind::SkUnit, 1.0); }
  static Kernel infinite() { return Kernel(Kind::Infinite, 0.0); }
  static Kernel uniform() { return Kernel(Kind::Uniform, 0.0); }
  static Kernel linear() { return Kernel(Kind::Linear, 1.0); }
  /// Window [x, x + L]; throws std::invalid_argument unless L > 0.
  static Kernel sk_scaled(double length);

  /// Parses `zero | sk | infinite | uniform | sk:L=<float> | linear`.
  static Kernel parse(std::string_view text);

  Kind kind() const { return kind_; }
  /// Look-ahead distance for windowed kernels; 0 otherwise.
  double length() const { return length_; }

  std::string to_string() const;
  /// Filesystem-safe tag (no ':' or '=').
  std::string tag() const;

  bool operator==(const Kernel&) const = default;

 private:
  Kernel(Kind k, double length) : kind_(k), length_(length) {}
  Kind kind_;
  double length_;
};

/// The four kernels compared in the experiments, fastest to slowest.
std::vector<Kernel> comparison_kernels();

/// Mass ahead ū = K * u and the slow-down factor exp(-ū).
struct NonlocalField {
  GridFunction ubar;
  GridFunction factor;
};

/// Midpoint quadrature dx * sum(u).
double total_mass(const GridFunction& u);

/// ū on cell centers for the piecewise-constant reconstruction of u,
/// assuming u = 0 beyond the right boundary. Windows cut by a cell face are
/// weighted by the covered fraction of the cell.
NonlocalField compute_ubar(const GridFunction& u, const Kernel& kernel);

/// Central differences inside, second-order one-sided at the two ends.
GridFunction spatial_derivative(const GridFunction& u);

}  // namespace nltraffic
