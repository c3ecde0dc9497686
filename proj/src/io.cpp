#include "nltraffic/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace nltraffic::io {

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

void write_grid_function(std::ostream& os, const GridFunction& u) {
  os << "x,u\n";
  for (std::size_t i = 0; i < u.size(); ++i)
    os << format_real(u.grid.center(i)) << ',' << format_real(u[i]) << '\n';
}

GridFunction read_grid_function(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "x,u")
    throw std::runtime_error("grid function CSV: expected header 'x,u'");
  std::vector<double> xs;
  std::vector<double> us;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(fmt::format("grid function CSV: malformed row '{}'", line));
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      us.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw std::runtime_error(fmt::format("grid function CSV: malformed row '{}'", line));
    }
  }
  if (xs.size() < 4) throw std::runtime_error("grid function CSV: need at least 4 rows");
  const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  GridSpec grid(xs.front() - 0.5 * dx, xs.back() + 0.5 * dx, xs.size());
  return {grid, std::move(us)};
}

void write_threshold_curve(std::ostream& os,
                           const std::vector<std::pair<double, double>>& curve) {
  os << "u,sigma\n";
  for (const auto& [u, s] : curve) os << format_real(u) << ',' << format_real(s) << '\n';
}

void write_diagnostics(std::ostream& os, const Diagnostics& diag) {
  os << "t,mass,min_u,max_u,grad_indicator,factor_min,factor_max\n";
  for (const auto& r : diag.series) {
    os << format_real(r.t) << ',' << format_real(r.mass) << ',' << format_real(r.min_u) << ','
       << format_real(r.max_u) << ',' << format_real(r.grad_indicator) << ','
       << format_real(r.factor_min) << ',' << format_real(r.factor_max) << '\n';
  }
}

void write_trajectory(std::ostream& os, const CharTrajectory& traj) {
  os << "t,d,u\n";
  for (const auto& s : traj.samples)
    os << format_real(s.t) << ',' << format_real(s.d) << ',' << format_real(s.u) << '\n';
}

void write_phase_trajectory(std::ostream& os, const PhaseTrajectory& traj) {
  os << "u,d\n";
  for (const auto& [u, d] : traj.samples) os << format_real(u) << ',' << format_real(d) << '\n';
}

nlohmann::json to_json(const Classification& c) {
  nlohmann::json j;
  j["verdict"] = to_string(c.verdict);
  if (c.witness) {
    j["x0"] = c.witness->x0;
    j["u0_at_x0"] = c.witness->u0_at_x0;
    j["d0_at_x0"] = c.witness->d0_at_x0;
    j["margin"] = c.witness->margin;
  } else {
    j["x0"] = nullptr;
    j["u0_at_x0"] = nullptr;
    j["d0_at_x0"] = nullptr;
    j["margin"] = c.min_margin;
    j["in_dead_band"] = c.in_dead_band;
  }
  return j;
}

nlohmann::json to_json(const BlowupReport& b) {
  return {{"detected", b.detected},
          {"t_detect", b.t_detect},
          {"max_gradient", b.max_gradient},
          {"grid_resolved", b.grid_resolved}};
}

nlohmann::json to_json(const AnalyticBounds& b) {
  return {{"t1", b.t1},
          {"u1", b.u1},
          {"d_minus", b.d_minus},
          {"d_plus", b.d_plus},
          {"T_star_sharp", b.T_star_sharp},
          {"T_star_coarse", b.T_star_coarse},
          {"C_star", b.C_star}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::ios_base::failure(fmt::format("cannot open '{}' for writing", path.string()));
  os << text;
  if (!os) throw std::ios_base::failure(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace nltraffic::io
