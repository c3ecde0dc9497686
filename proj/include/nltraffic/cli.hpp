#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "nltraffic/fv_solver.hpp"
#include "nltraffic/nonlocal_core.hpp"

namespace nltraffic::cli {

enum class Command { Classify, Evolve, CompareKernels, PhasePortrait, ThresholdCurve, Bounds };

std::string to_string(Command c);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Bad flags, missing options or values out of range.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::Classify;

  // data and grid
  std::string datum = "bump";
  std::optional<double> x_left;
  std::optional<double> x_right;
  std::size_t n_cells = 4000;
  std::uint64_t seed = 0;

  // solver
  Kernel kernel = Kernel::infinite();
  double cfl = 0.45;
  std::optional<double> t_end;
  FluxScheme flux = FluxScheme::Godunov;
  double blowup_factor = 0.05;
  bool ssp2 = false;
  bool stop_on_blowup = true;
  std::size_t snapshots = 5;

  // phase plane and bounds
  std::optional<double> d0;
  std::optional<double> u0;
  double m = 0.0;
  double u_end = 0.01;
  double factor = 1.0;
  std::string mode = "phase";

  std::size_t samples = 1001;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> config_file;

  /// Effective configuration, echoed into every manifest.
  nlohmann::json to_json() const;
};

/// Reads `key = value` lines (`#` starts a comment). Keys are long flag
/// names without the leading dashes.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Flags override config-file keys, which override defaults. Throws
/// UsageError naming the offending flag.
RunConfig parse_args(const std::vector<std::string>& args);

/// Runs the command and writes its bundle under config.out with a
/// manifest.json. Returns the process exit status.
int dispatch(const RunConfig& config, std::ostream& log, std::ostream& err);

/// parse_args + dispatch with usage errors mapped to exit status 2.
int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

}  // namespace nltraffic::cli
