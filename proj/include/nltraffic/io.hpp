#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nltraffic/characteristics.hpp"
#include "nltraffic/fv_solver.hpp"
#include "nltraffic/nonlocal_core.hpp"
#include "nltraffic/threshold.hpp"

namespace nltraffic::io {

/// 17 significant digits (%.17g).
std::string format_real(double v);

/// `x,u` rows.
void write_grid_function(std::ostream& os, const GridFunction& u);
/// Inverse of write_grid_function; the grid is rebuilt from the centers.
GridFunction read_grid_function(std::istream& is);

/// `u,sigma` rows.
void write_threshold_curve(std::ostream& os,
                           const std::vector<std::pair<double, double>>& curve);
/// `t,mass,min_u,max_u,grad_indicator,factor_min,factor_max` rows.
void write_diagnostics(std::ostream& os, const Diagnostics& diag);
/// `t,d,u` rows.
void write_trajectory(std::ostream& os, const CharTrajectory& traj);
/// `u,d` rows.
void write_phase_trajectory(std::ostream& os, const PhaseTrajectory& traj);

nlohmann::json to_json(const Classification& c);
nlohmann::json to_json(const BlowupReport& b);
nlohmann::json to_json(const AnalyticBounds& b);

/// Creates parent directories as needed; throws std::ios_base::failure on I/O
/// failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace nltraffic::io
