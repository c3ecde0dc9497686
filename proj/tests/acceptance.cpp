// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "nltraffic/characteristics.hpp"
#include "nltraffic/fv_solver.hpp"
#include "nltraffic/scenarios.hpp"
#include "nltraffic/threshold.hpp"

using namespace nltraffic;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds; 0 for none
  std::function<Outcome()> check;
};

double l1_distance(const GridFunction& a, const GridFunction& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * a.grid.dx();
}

GridFunction restrict_to(const GridFunction& fine, std::size_t ratio) {
  const auto& g = fine.grid;
  GridFunction coarse(GridSpec(g.x_left(), g.x_right(), g.n_cells() / ratio));
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < ratio; ++k) s += fine[i * ratio + k];
    coarse[i] = s / static_cast<double>(ratio);
  }
  return coarse;
}

GridFunction evolve_to(const GridFunction& u0, const Kernel& k, double t_end) {
  SolverConfig cfg(u0.grid);
  cfg.kernel = k;
  cfg.t_end = t_end;
  cfg.stop_on_blowup = false;
  return evolve(u0, cfg).final_state.u;
}

Outcome sigma_consistency() {
  Outcome o;
  const auto& curve = ThresholdCurve::standard();
  double worst = 0.0;
  for (int k = 0; k <= 98000; ++k) {
    const double u = 0.01 + 0.98 * k / 98000.0;
    worst = std::max(worst, std::abs(curve.interpolate(u) - ThresholdCurve::closed_form(u)));
  }
  o.require(worst <= 1e-6, fmt::format("|table - u(1-u)| = {:.3g}", worst));
  double residual = 0.0;
  for (int k = 0; k <= 980; ++k) {
    const double u = 0.01 + 0.98 * k / 980.0;
    residual = std::max(residual, std::abs(sigma_residual(ThresholdCurve::closed_form, u)));
  }
  o.require(residual <= 1e-6, fmt::format("closed-form residual {:.3g}", residual));
  o.require(curve.interpolate(0.0) == 0.0 && curve.interpolate(1.0) == 0.0, "endpoints");
  const double slope = (curve.interpolate(1e-4) - curve.interpolate(0.0)) / 1e-4;
  o.require(std::abs(slope - 1.0) <= 2e-4, fmt::format("sigma'(0) = {:.8g}", slope));
  o.detail += fmt::format("{}max gap {:.2e}, sigma'(0) ~ {:.6f}", o.detail.empty() ? "" : "; ",
                          worst, slope);
  return o;
}

Outcome classifier_verdicts() {
  Outcome o;
  const std::pair<const char*, Verdict> expected[] = {{"bump", Verdict::Supercritical},
                                                      {"subinit", Verdict::Subcritical}};
  for (const auto& [name, verdict] : expected) {
    for (std::size_t n : {1000, 2000, 4000}) {
      const auto c = classify_initial_data(find_datum(name).sample(n));
      o.require(c.verdict == verdict,
                fmt::format("{} at n = {}: {}", name, n, to_string(c.verdict)));
    }
  }
  if (o.pass) o.detail = "bump SUPERCRITICAL, subinit SUBCRITICAL at n = 1000, 2000, 4000";
  return o;
}

Outcome invariant_region() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int escaped = 0;
  double worst_excess = -1.0;
  for (int k = 0; k < 100; ++k) {
    const double u0 = 0.01 + 0.98 * unit(rng);
    const double top = sigma_eval(u0);
    const double d0 = -1.0 + unit(rng) * (top + 1.0);
    const auto tr = integrate_characteristic({d0, u0, 0.0}, FactorModel::constant(1.0), 50.0);
    for (const auto& s : tr.samples)
      worst_excess = std::max(worst_excess, s.d - ThresholdCurve::closed_form(s.u));
    if (tr.blowup_time) ++escaped;
  }
  o.require(escaped == 0 && worst_excess <= 1e-6,
            fmt::format("subcritical: {} escaped, max d - sigma = {:.3g}", escaped,
                        worst_excess));
  int late = 0;
  double worst_ratio = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double u0 = 0.02 + 0.96 * unit(rng);
    const double d0 = sigma_eval(u0) + 0.01 + 2.0 * unit(rng);
    const auto b = supercritical_bounds(d0, u0, 0.0);
    const auto tr = integrate_characteristic({d0, u0, 0.0}, FactorModel::constant(1.0),
                                             1.5 * b.T_star_sharp + 1.0);
    if (!tr.blowup_time || *tr.blowup_time > b.T_star_sharp) {
      ++late;
      continue;
    }
    worst_ratio = std::max(worst_ratio, *tr.blowup_time / b.T_star_sharp);
  }
  o.require(late == 0, fmt::format("supercritical: {} of 50 seeds missed t1 + T*", late));
  o.detail += fmt::format("{}max excess over sigma {:.2e}; blow-up by {:.2f} of the bound",
                          o.detail.empty() ? "" : "; ", worst_excess, worst_ratio);
  return o;
}

Outcome analytic_oracles() {
  Outcome o;
  double worst_t1 = 0.0;
  for (const auto& [u0, u1, m] :
       {std::tuple{0.5, 0.25, 0.0}, std::tuple{0.9, 0.05, 0.5}, std::tuple{0.3, 0.01, 1.5},
        std::tuple{0.7, 0.6, 0.0}}) {
    worst_t1 = std::max(worst_t1,
                        std::abs(time_to_level(u0, u1, m) - eta_hitting_time(u0, u1, m)));
  }
  o.require(worst_t1 <= 1e-6, fmt::format("t1 mismatch {:.3g}", worst_t1));

  // ḋ = 2(d − d₋)(d − d₊) with u frozen at u1, classical RK4 until d > 1e8.
  const double u1 = 0.1, d_start = 0.4;
  const auto b = blowup_time_bound(d_start, u1, 0.0, 0.0);
  auto f = [&](double x) { return 2.0 * (x - b.d_minus) * (x - b.d_plus); };
  double d = d_start, t = 0.0;
  const double h = 1e-5;
  while (d < 1e8 && std::isfinite(d)) {
    const double k1 = f(d), k2 = f(d + 0.5 * h * k1), k3 = f(d + 0.5 * h * k2),
                 k4 = f(d + h * k3);
    d += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  const double rel = std::abs(t - b.sharp) / b.sharp;
  o.require(rel <= 0.01, fmt::format("Riccati {:.6g} vs T* {:.6g}", t, b.sharp));

  const auto r1 = d_roots(1.0);
  const auto r0 = d_roots(0.0);
  o.require(r1.first == -1.0 && r0.first == 0.0 && r0.second == 0.0, "d roots at 0 and 1");
  o.detail += fmt::format("{}t1 err {:.1e}, Riccati vs T* rel {:.1e}",
                          o.detail.empty() ? "" : "; ", worst_t1, rel);
  return o;
}

Outcome conservation() {
  Outcome o;
  for (const auto& e : experiment_catalog()) {
    if (e.kernels.empty()) continue;
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_experiment(e);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double limit = 1e-12 * static_cast<double>(e.n_cells);
    for (const auto& run : r.runs) {
      const auto& dg = run.result.diagnostics;
      double lo = 1.0, hi = 0.0;
      for (const auto& rec : dg.series) {
        lo = std::min(lo, rec.min_u);
        hi = std::max(hi, rec.max_u);
      }
      o.require(dg.max_step_mass_drift <= limit,
                fmt::format("{}/{} drift {:.3g}", e.name, run.kernel.to_string(),
                            dg.max_step_mass_drift));
      o.require(lo >= -1e-8 && hi <= 1.0 + 1e-8,
                fmt::format("{}/{} range [{}, {}]", e.name, run.kernel.to_string(), lo, hi));
    }
    o.require(secs < 60.0, fmt::format("{} took {:.1f} s", e.name, secs));
    if (o.pass) o.detail += fmt::format("{}{} {:.1f} s", o.detail.empty() ? "" : ", ", e.name, secs);
  }
  return o;
}

Outcome sub_blowup() {
  Outcome o;
  const auto& e = find_experiment("subcritical-compare");
  const auto r = run_experiment(e);
  const double initial = gradient_indicator(e.datum.sample(e.n_cells));
  std::string summary;
  for (const auto& run : r.runs) {
    const auto& bl = run.result.diagnostics.blowup;
    const bool infinite = run.kernel == Kernel::infinite();
    if (infinite) {
      o.require(!bl.detected, "kernel infinite triggered the detector");
      o.require(bl.max_gradient < 10.0 * initial,
                fmt::format("kernel infinite indicator {:.3g} vs initial {:.3g}",
                            bl.max_gradient, initial));
    } else {
      o.require(bl.detected, fmt::format("kernel {} not detected", run.kernel.to_string()));
    }
    summary += fmt::format("{}{}: {}", summary.empty() ? "" : ", ", run.kernel.to_string(),
                           bl.detected ? fmt::format("t = {:.2f}", bl.t_detect)
                                       : fmt::format("none (max {:.2f}x initial)",
                                                     bl.max_gradient / initial));
  }
  o.detail = o.pass ? summary : o.detail + " [" + summary + "]";
  return o;
}

Outcome sup_compare() {
  Outcome o;
  const auto& e = find_experiment("supercritical-compare");
  const auto r = run_experiment(e);
  const double dx = e.datum.grid(e.n_cells).dx();
  std::string summary;
  for (const auto& run : r.runs) {
    const auto& bl = run.result.diagnostics.blowup;
    o.require(bl.detected && bl.t_detect <= 4.0,
              fmt::format("kernel {} not detected by t = 4", run.kernel.to_string()));
  }
  for (double level : {0.05, 0.1, 0.2}) {
    std::vector<double> x;
    for (const auto& run : r.runs) {
      const auto& snaps = run.result.snapshots;
      const auto it = std::find_if(snaps.begin(), snaps.end(),
                                   [](const Snapshot& s) { return s.t == 2.0; });
      x.push_back(front_position(it->u, level));
    }
    // kernels are ordered ① zero, ② sk, ③ infinite, ④ uniform
    o.require(x[0] >= x[1] && x[1] >= x[2] && x[2] >= x[3] - dx,
              fmt::format("front ordering at level {}: {:.4f} {:.4f} {:.4f} {:.4f}", level,
                          x[0], x[1], x[2], x[3]));
    summary += fmt::format("{}u={}: {:.3f} >= {:.3f} >= {:.3f} >= {:.3f}",
                           summary.empty() ? "" : "; ", level, x[0], x[1], x[2], x[3]);
  }
  o.detail = o.pass ? summary : o.detail;
  return o;
}

Outcome reductions() {
  Outcome o;
  const auto& datum = find_datum("bump");
  const std::size_t n = 2000;
  const auto u0 = datum.sample(n);
  const double scale = std::exp(-total_mass(u0));
  const double t = 1.0;
  const auto uniform = evolve_to(u0, Kernel::uniform(), t);
  const auto lwr = evolve_to(u0, Kernel::zero(), t * scale);
  const auto lwr_fine = evolve_to(datum.sample(2 * n), Kernel::zero(), t * scale);
  const double scheme_error = l1_distance(lwr, restrict_to(lwr_fine, 2));
  const double gap = l1_distance(uniform, lwr);
  o.require(gap <= 2.0 * scheme_error,
            fmt::format("uniform vs LWR {:.3g} > 2 x scheme error {:.3g}", gap, scheme_error));

  const double L = 1e-3;
  const auto big = datum.sample(4000);
  const auto sk = evolve_to(big, Kernel::sk_scaled(L), 1.0);
  const auto zero = evolve_to(big, Kernel::zero(), 1.0);
  const double d_sk = l1_distance(sk, zero);
  o.require(d_sk <= 10.0 * L, fmt::format("sk:L=1e-3 vs zero {:.3g}", d_sk));
  if (o.pass)
    o.detail = fmt::format("uniform vs LWR {:.2e} (scheme error {:.2e}); sk:L=1e-3 vs zero {:.2e}",
                           gap, scheme_error, d_sk);
  return o;
}

// d at u along a sampled trajectory, four-point Lagrange in u.
double d_at_u(const std::vector<CharState>& s, double u) {
  // u decreases along the samples
  std::size_t k = 1;
  while (k + 1 < s.size() && s[k].u > u) ++k;
  const std::size_t lo = std::min(k >= 2 ? k - 2 : 0, s.size() - 4);
  double acc = 0.0;
  for (std::size_t i = lo; i < lo + 4; ++i) {
    double w = 1.0;
    for (std::size_t j = lo; j < lo + 4; ++j)
      if (j != i) w *= (u - s[j].u) / (s[i].u - s[j].u);
    acc += w * s[i].d;
  }
  return acc;
}

Outcome factor_independence() {
  Outcome o;
  const std::pair<double, double> seeds[] = {
      {0.1, 0.6}, {-0.5, 0.8}, {0.0, 0.3}, {0.2, 0.5}, {-0.9, 0.95}};
  double worst = 0.0;
  for (const auto& [d0, u0] : seeds) {
    const auto fast = integrate_characteristic({d0, u0, 0.0}, FactorModel::constant(1.0), 10.0);
    const auto slow =
        integrate_characteristic({d0, u0, 0.0}, FactorModel::constant(0.3), 10.0 / 0.3);
    const double u_min = std::max(fast.samples.back().u, slow.samples.back().u);
    for (const auto& s : fast.samples) {
      if (s.u <= u_min || s.u >= u0) continue;
      worst = std::max(worst, std::abs(d_at_u(slow.samples, s.u) - s.d));
    }
  }
  o.require(worst <= 1e-6, fmt::format("max |d_0.3(u) - d_1(u)| = {:.3g}", worst));
  if (o.pass) o.detail = fmt::format("max |d_0.3(u) - d_1(u)| = {:.2e}", worst);
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "sigma consistency", 1.0, sigma_consistency},
      {2, "classifier verdicts", 5.0, classifier_verdicts},
      {3, "invariant region and supercritical blow-up", 30.0, invariant_region},
      {4, "analytic oracle cross-checks", 0.0, analytic_oracles},
      {5, "conservation and maximum principle", 0.0, conservation},
      {6, "subinit break-down pattern", 0.0, sub_blowup},
      {7, "bump kernel comparison", 0.0, sup_compare},
      {8, "reduction checks", 0.0, reductions},
      {9, "phase-path factor independence", 0.0, factor_independence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("exception: {}", e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && secs >= c.time_limit) {
      o.pass = false;
      o.detail += fmt::format("; runtime {:.2f} s over {:.0f} s", secs, c.time_limit);
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %d (%s) [%.2f s]: %s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.title.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
