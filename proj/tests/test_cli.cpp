#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

#include "json.hpp"

#include "nltraffic/cli.hpp"

namespace nltraffic::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nltraffic_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

TEST(ParseArgs, Evolve) {
  const auto cfg = parse_args({"evolve", "--datum", "subinit", "--kernel", "sk:L=2.5",
                               "--n-cells", "800", "--t-end", "3", "--flux", "llf", "--ssp2"});
  EXPECT_EQ(cfg.command, Command::Evolve);
  EXPECT_EQ(cfg.datum, "subinit");
  EXPECT_EQ(cfg.kernel, Kernel::sk_scaled(2.5));
  EXPECT_EQ(cfg.n_cells, 800u);
  EXPECT_EQ(cfg.t_end, 3.0);
  EXPECT_EQ(cfg.flux, FluxScheme::LocalLaxFriedrichs);
  EXPECT_TRUE(cfg.ssp2);
  EXPECT_TRUE(cfg.stop_on_blowup);
}

TEST(ParseArgs, Defaults) {
  const auto cfg = parse_args({"classify"});
  EXPECT_EQ(cfg.command, Command::Classify);
  EXPECT_EQ(cfg.datum, "bump");
  EXPECT_EQ(cfg.kernel, Kernel::infinite());
  EXPECT_EQ(cfg.cfl, 0.45);
  EXPECT_EQ(cfg.out, fs::path("out"));
}

TEST(ParseArgs, ErrorsNameTheFlag) {
  try {
    parse_args({"evolve", "--kernel", "sk:L=-1"});
    FAIL() << "no error";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("--kernel"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_args({"evolve", "--cfl", "2"}), UsageError);
  EXPECT_THROW(parse_args({"evolve", "--bogus"}), UsageError);
  EXPECT_THROW(parse_args({"bounds", "--u0", "0.5"}), UsageError);
  EXPECT_THROW(parse_args({}), UsageError);
  EXPECT_THROW(parse_args({"classify", "--x-left", "3", "--x-right", "1"}), UsageError);
}

TEST(ParseArgs, CommandLineBeatsConfigFile) {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  const auto file = dir / "run.cfg";
  std::ofstream(file) << "# comment\nkernel = zero\nn_cells = 512\ncfl = 0.3  # trailing\n";
  const auto cfg =
      parse_args({"evolve", "--config", file.string(), "--n-cells", "256"});
  EXPECT_EQ(cfg.kernel, Kernel::zero());
  EXPECT_EQ(cfg.n_cells, 256u);
  EXPECT_EQ(cfg.cfl, 0.3);
  fs::remove_all(dir);
}

TEST(Run, ThresholdCurve) {
  const auto out = scratch("curve");
  std::ostringstream log, err;
  ASSERT_EQ(run({"threshold-curve", "--out", out.string()}, log, err), kExitOk) << err.str();
  const auto rows = lines(out / "threshold_curve.csv");
  ASSERT_EQ(rows.size(), 1002u);
  EXPECT_EQ(rows[0], "u,sigma");
  EXPECT_EQ(rows[1], "0,0");
  EXPECT_EQ(rows[1001], "1,0");
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["files"][0], "threshold_curve.csv");
  EXPECT_EQ(manifest["config"]["command"], "threshold-curve");
  fs::remove_all(out);
}

TEST(Run, Bounds) {
  const auto out = scratch("bounds");
  std::ostringstream log, err;
  ASSERT_EQ(run({"bounds", "--d0", "1", "--u0", "0.5", "--m", "0.4", "--out", out.string()},
                log, err),
            kExitOk)
      << err.str();
  const auto j = nlohmann::json::parse(slurp(out / "bounds.json"));
  for (const char* key :
       {"t1", "u1", "d_minus", "d_plus", "T_star_sharp", "T_star_coarse", "C_star"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_LE(j["T_star_sharp"].get<double>(), j["T_star_coarse"].get<double>());
  fs::remove_all(out);
}

TEST(Run, BoundsRejectsSubcriticalSeed) {
  const auto out = scratch("bounds_sub");
  std::ostringstream log, err;
  EXPECT_EQ(run({"bounds", "--d0", "0", "--u0", "0.5", "--out", out.string()}, log, err),
            kExitUsage);
  EXPECT_NE(err.str().find("supercritical"), std::string::npos);
  fs::remove_all(out);
}

TEST(Run, CompareKernelsBundle) {
  const auto out = scratch("compare");
  std::ostringstream log, err;
  ASSERT_EQ(run({"compare-kernels", "--datum", "bump", "--n-cells", "400", "--out",
                 out.string()},
                log, err),
            kExitOk)
      << err.str();
  const fs::path base = out / "supercritical-compare";
  std::size_t kernels = 0;
  for (const auto& entry : fs::directory_iterator(base)) {
    if (!entry.is_directory()) continue;
    ++kernels;
    for (int t = 0; t <= 4; ++t)
      EXPECT_TRUE(fs::exists(entry.path() / ("snap_t" + std::to_string(t) + ".csv")))
          << entry.path();
  }
  EXPECT_EQ(kernels, 4u);
  fs::remove_all(out);
}

TEST(Run, DeterministicOutput) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  std::ostringstream log, err;
  for (const auto& out : {a, b})
    ASSERT_EQ(run({"evolve", "--n-cells", "300", "--t-end", "0.5", "--kernel", "sk", "--out",
                   out.string()},
                  log, err),
              kExitOk)
        << err.str();
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
    const auto rel = fs::relative(entry.path(), a);
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, ClassifyAndPhasePortrait) {
  const auto out = scratch("classify");
  std::ostringstream log, err;
  ASSERT_EQ(run({"classify", "--datum", "subinit", "--n-cells", "2000", "--out", out.string()},
                log, err),
            kExitOk);
  const auto c = nlohmann::json::parse(slurp(out / "classification.json"));
  EXPECT_EQ(c["verdict"], "SUBCRITICAL");
  ASSERT_EQ(run({"phase-portrait", "--d0", "0.5", "--u0", "0.5", "--out", out.string()}, log,
                err),
            kExitOk);
  EXPECT_EQ(lines(out / "trajectory.csv").at(0), "u,d");
  ASSERT_EQ(run({"phase-portrait", "--d0", "0.5", "--u0", "0.5", "--mode", "time", "--t-end",
                 "5", "--out", out.string()},
                log, err),
            kExitOk);
  EXPECT_EQ(lines(out / "trajectory.csv").at(0), "t,d,u");
  fs::remove_all(out);
}

TEST(Run, ExitCodes) {
  std::ostringstream log, err;
  EXPECT_EQ(run({"evolve", "--kernel", "nope"}, log, err), kExitUsage);
  // A look-ahead window cut by the right boundary is a usage error.
  const auto out = scratch("exit");
  EXPECT_EQ(run({"evolve", "--x-right", "0.5", "--n-cells", "100", "--out", out.string()}, log,
                err),
            kExitUsage);
  fs::remove_all(out);
}

}  // namespace
}  // namespace nltraffic::cli
