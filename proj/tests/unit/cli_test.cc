// Copyright 2026 The Kinonav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kinonav/cli.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "kinonav/dynamics.h"
#include "kinonav/scanfuse.h"
#include "kinonav/textio.h"
#include "json.hpp"

namespace kinonav::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kinonav");
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Fixture(const std::string& name) {
  return std::string(KINONAV_TEST_DATA) + "/" + name;
}

// Fresh scratch directory per test.
fs::path Scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / "kinonav_cli_test" /
                       (std::string(info->test_suite_name()) + "." + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& p) { return textio::ReadFile(p); }

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"replay", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"--config", "/nonexistent/kinonav.conf", "report", "a=b"}).code, kExitUsage);
}

TEST(CliTest, BinaryExitCodes) {
  const std::string cli = KINONAV_CLI_PATH;
  const int usage = std::system((cli + " > /dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(usage));
  EXPECT_EQ(WEXITSTATUS(usage), kExitUsage);
  const int help = std::system((cli + " --help > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(help), kExitOk);
}

TEST(IdentifyCliTest, FixtureWithinTolerance) {
  const fs::path dir = Scratch();
  const Outcome r = Invoke({"identify", Fixture("sysid_log.csv"), "-o", (dir / "m.txt").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("residual"), std::string::npos);
  const auto got = dynamics::LoadParams(dir / "m.txt");
  const auto want = dynamics::LoadParams(Fixture("sysid_model.txt"));
  const dynamics::AxisParams* g[] = {&got.linear, &got.angular};
  const dynamics::AxisParams* w[] = {&want.linear, &want.angular};
  for (int a = 0; a < 2; ++a) {
    EXPECT_NEAR(g[a]->f_up, w[a]->f_up, 0.05 * w[a]->f_up);
    EXPECT_NEAR(g[a]->f_down, w[a]->f_down, 0.05 * w[a]->f_down);
    EXPECT_NEAR(g[a]->zeta_up, w[a]->zeta_up, 0.05 * w[a]->zeta_up);
    EXPECT_NEAR(g[a]->zeta_down, w[a]->zeta_down, 0.05 * w[a]->zeta_down);
    EXPECT_NEAR(g[a]->vel_max, w[a]->vel_max, 0.02 * w[a]->vel_max);
  }
  const std::string text = Slurp(dir / "m.txt");
  EXPECT_NE(text.find("meta.residual_lin_up"), std::string::npos);
  EXPECT_NE(text.find("meta.count_ang_down"), std::string::npos);
}

TEST(IdentifyCliTest, AdjustDampingSetsTarget) {
  const fs::path dir = Scratch();
  ASSERT_EQ(Invoke({"identify", Fixture("sysid_log.csv"), "--adjust-damping", "-o",
                 (dir / "m.txt").string()})
                .code,
            kExitOk);
  const auto p = dynamics::LoadParams(dir / "m.txt");
  for (const auto* a : {&p.linear, &p.angular}) {
    EXPECT_NEAR(a->zeta_up, 0.7, 1e-12);
    EXPECT_NEAR(a->zeta_down, 0.7, 1e-12);
  }
}

TEST(IdentifyCliTest, BadLogsAreDataErrors) {
  const fs::path dir = Scratch();
  textio::WriteFile(dir / "empty.csv", "");
  const Outcome empty = Invoke({"identify", (dir / "empty.csv").string(), "-o",
                             (dir / "m.txt").string()});
  EXPECT_EQ(empty.code, kExitData);
  EXPECT_FALSE(empty.err.empty());
  textio::WriteFile(dir / "bad.csv", "t,v_cmd,w_cmd,v_meas,w_meas\n0,0,0,0,0\n0.01,x,0,0,0\n");
  const Outcome bad =
      Invoke({"identify", (dir / "bad.csv").string(), "-o", (dir / "m.txt").string()});
  EXPECT_EQ(bad.code, kExitData);
  EXPECT_NE(bad.err.find(":3"), std::string::npos) << bad.err;
  EXPECT_FALSE(fs::exists(dir / "m.txt"));
}

TEST(IdentifyCliTest, UnexcitedRegimeIsInfeasible) {
  const fs::path dir = Scratch();
  std::string log = "t,v_cmd,w_cmd,v_meas,w_meas\n";
  for (int i = 0; i < 600; ++i) log += fmt::format("{},0,0,0,0\n", i / 100.0);
  textio::WriteFile(dir / "still.csv", log);
  const Outcome r =
      Invoke({"identify", (dir / "still.csv").string(), "-o", (dir / "m.txt").string()});
  EXPECT_EQ(r.code, kExitInfeasible);
  EXPECT_NE(r.err.find("unidentifiable"), std::string::npos) << r.err;
}

TEST(ReplayCliTest, HeldStopStaysAtOrigin) {
  const fs::path dir = Scratch();
  textio::WriteFile(dir / "c.csv", "t,v_cmd,w_cmd\n0,0,0\n1,0,0\n");
  ASSERT_EQ(Invoke({"replay", "--commands", (dir / "c.csv").string(), "--initial", "1,2,0.5", "-o",
                 (dir / "out.csv").string()})
                .code,
            kExitOk);
  const auto t = textio::ParseCsv(Slurp(dir / "out.csv"), "out");
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "x", "y", "theta", "v", "w"}));
  ASSERT_EQ(t.rows.size(), 41u);
  for (const auto& row : t.rows) {
    EXPECT_EQ(row[1], 1.0);
    EXPECT_EQ(row[2], 2.0);
    EXPECT_EQ(row[3], 0.5);
    EXPECT_EQ(row[4], 0.0);
  }
  EXPECT_NEAR(t.rows.back()[0], 4.0 / 3.0, 1e-12);
}

TEST(ReplayCliTest, SquareDriveMatchesGolden) {
  const fs::path dir = Scratch();
  ASSERT_EQ(Invoke({"replay", "--commands", Fixture("square_commands.csv"), "-o",
                 (dir / "out.csv").string()})
                .code,
            kExitOk);
  const auto got = textio::ParseCsv(Slurp(dir / "out.csv"), "out");
  const auto want = textio::ParseCsv(Slurp(Fixture("square_golden.csv")), "golden");
  ASSERT_EQ(got.rows.size(), want.rows.size());
  for (std::size_t i = 0; i < got.rows.size(); ++i) {
    for (std::size_t c = 0; c < 6; ++c) {
      ASSERT_NEAR(got.rows[i][c], want.rows[i][c], 1e-9) << "row " << i << " col " << c;
    }
  }
  const auto& last = got.rows.back();
  EXPECT_LT(std::hypot(last[1], last[2]), 0.2);
}

TEST(ReplayCliTest, RejectsMalformedInput) {
  const fs::path dir = Scratch();
  textio::WriteFile(dir / "c.csv", "t,v_cmd\n0,0\n");
  EXPECT_EQ(Invoke({"replay", "--commands", (dir / "c.csv").string(), "-o",
                 (dir / "o.csv").string()})
                .code,
            kExitData);
  textio::WriteFile(dir / "c.csv", "t,v_cmd,w_cmd\n0,0,0\n");
  EXPECT_EQ(Invoke({"replay", "--commands", (dir / "c.csv").string(), "--initial", "1,2", "-o",
                 (dir / "o.csv").string()})
                .code,
            kExitUsage);
}

TEST(MakeWorldsCliTest, DeterministicForSeed) {
  const fs::path dir = Scratch();
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(Invoke({"--seed", "7", "make-worlds", "--count", "3", "--episodes-per-world", "2",
                   "-o", (dir / sub).string()})
                  .code,
              kExitOk);
  }
  EXPECT_EQ(Slurp(dir / "a" / "episodes.jsonl"), Slurp(dir / "b" / "episodes.jsonl"));
  EXPECT_EQ(Slurp(dir / "a" / "world_002.grid"), Slurp(dir / "b" / "world_002.grid"));
  ASSERT_EQ(Invoke({"--seed", "8", "make-worlds", "--count", "3", "-o", (dir / "c").string()}).code,
            kExitOk);
  EXPECT_NE(Slurp(dir / "a" / "world_000.grid"), Slurp(dir / "c" / "world_000.grid"));
  const auto eps = world::LoadEpisodes(dir / "a" / "episodes.jsonl");
  ASSERT_EQ(eps.size(), 6u);
  for (const auto& ep : eps) {
    EXPECT_GE(ep.geodesic, 3.0 - 0.05);
    EXPECT_LE(ep.geodesic, 12.0 + 0.05);
  }
}

TEST(EvaluateCliTest, DeterministicAcrossJobCounts) {
  const fs::path dir = Scratch();
  ASSERT_EQ(Invoke({"--seed", "3", "make-worlds", "--count", "3", "-o", (dir / "w").string()}).code,
            kExitOk);
  const std::string episodes = (dir / "w" / "episodes.jsonl").string();
  for (const auto& [sub, jobs] : {std::pair{"one", "1"}, std::pair{"two", "2"}}) {
    const Outcome r = Invoke({"--seed", "5", "evaluate", "--episodes", episodes, "--noisy-pose",
                           "--jobs", jobs, "-o", (dir / sub).string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("mpc+noisy"), std::string::npos);
  }
  EXPECT_EQ(Slurp(dir / "one" / "results.jsonl"), Slurp(dir / "two" / "results.jsonl"));
  EXPECT_EQ(Slurp(dir / "one" / "report.json"), Slurp(dir / "two" / "report.json"));
  for (const auto& ep : world::LoadEpisodes(episodes)) {
    const fs::path trace = fs::path("traces") / (ep.id + ".csv");
    EXPECT_EQ(Slurp(dir / "one" / trace), Slurp(dir / "two" / trace));
    EXPECT_TRUE(fs::exists(dir / "one" / "traces" / (ep.id + ".commands.csv")));
  }
  const auto report = nlohmann::json::parse(Slurp(dir / "one" / "report.json"));
  EXPECT_EQ(report.at("episodes"), 3);
}

TEST(EvaluateCliTest, ConfigOverridesApply) {
  const fs::path dir = Scratch();
  ASSERT_EQ(Invoke({"make-worlds", "--count", "1", "-o", (dir / "w").string()}).code, kExitOk);
  textio::WriteFile(dir / "run.conf", "# short episodes\nsim.max_steps = 5\nmpc.horizon = 1\n");
  const std::string episodes = (dir / "w" / "episodes.jsonl").string();
  ASSERT_EQ(Invoke({"--config", (dir / "run.conf").string(), "evaluate", "--episodes", episodes,
                 "-o", (dir / "out").string()})
                .code,
            kExitOk);
  const auto ep = world::LoadEpisodes(episodes).front();
  const auto trace =
      textio::ParseCsv(Slurp(dir / "out" / "traces" / (ep.id + ".csv")), "trace");
  EXPECT_EQ(trace.rows.size(), 6u);

  textio::WriteFile(dir / "bad.conf", "sim.warp_speed = 9\n");
  const Outcome bad = Invoke({"--config", (dir / "bad.conf").string(), "evaluate", "--episodes",
                           episodes, "-o", (dir / "out2").string()});
  EXPECT_EQ(bad.code, kExitData);
  EXPECT_NE(bad.err.find("sim.warp_speed"), std::string::npos) << bad.err;
  EXPECT_EQ(Invoke({"evaluate", "--episodes", episodes, "--policy", "greedy", "-o",
                 (dir / "out3").string()})
                .code,
            kExitUsage);
}

TEST(ApplyOverridesTest, SetsFieldsAndValidates) {
  RunConfig c;
  ApplyOverrides({{"sim.success_radius", "0.3"}, {"mpc.w_heading", "0.5"},
                  {"noise.absloc_period_lo", "4"}},
                 c);
  EXPECT_EQ(c.sim.success_radius, 0.3);
  EXPECT_EQ(c.mpc.w_heading, 0.5);
  EXPECT_EQ(c.sim.absloc_noise.period_lo, 4);
  EXPECT_THROW(ApplyOverrides({{"sim.max_steps", "ten"}}, c), DataError);
  EXPECT_ANY_THROW(ApplyOverrides({{"mpc.horizon", "5"}}, c));
}

// Four 90-degree cameras inside a square room whose walls are 2 m away.
TEST(ScanProjectCliTest, WallSceneAtTwoMetres) {
  const fs::path dir = Scratch();
  world::OccupancyGrid room(120, 120, 0.05, {-3.0, -3.0});
  room.FillRect({2.0, -3.0}, {3.0, 3.0});
  room.FillRect({-3.0, -3.0}, {-2.0, 3.0});
  room.FillRect({-3.0, 2.0}, {3.0, 3.0});
  room.FillRect({-3.0, -3.0}, {3.0, -2.0});
  nlohmann::json cams;
  std::vector<std::string> args = {"scan-project"};
  for (int k = 0; k < 4; ++k) {
    scanfuse::CameraModel cam;
    cam.extrinsic = scanfuse::LevelMount(k * kPi / 2, 0.25);
    scanfuse::DepthRaster raster{scanfuse::RenderDepth(room, {0, 0, 0}, cam),
                                 cam.fx, cam.fy, cam.cx, cam.cy, false, k};
    const fs::path path = dir / fmt::format("cam{}.depth", k);
    scanfuse::WriteDepthRaster(raster, path);
    args.insert(args.end(), {"--depth", path.string()});
    cams["cameras"].push_back({{"yaw_deg", 90 * k}, {"height", 0.25}});
  }
  textio::WriteFile(dir / "cams.json", cams.dump());
  args.insert(args.end(), {"--cams", (dir / "cams.json").string(), "-o",
                           (dir / "scan.csv").string()});
  const Outcome r = Invoke(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto scan = textio::ParseCsv(Slurp(dir / "scan.csv"), "scan");
  EXPECT_EQ(scan.header, (std::vector<std::string>{"bin", "azimuth", "range"}));
  ASSERT_EQ(scan.rows.size(), 180u);
  const double w = 2 * kPi / 180;
  for (int i = 0; i < 180; ++i) {
    // Ground range to the square walls over the bin's azimuths.
    double lo = 1e9, hi = 0.0;
    for (int k = 0; k <= 50; ++k) {
      const double az = -kPi + (i + k / 50.0) * w;
      const double range = 2.0 / std::max(std::abs(std::cos(az)), std::abs(std::sin(az)));
      lo = std::min(lo, range);
      hi = std::max(hi, range);
    }
    EXPECT_GE(scan.rows[i][2], lo - 0.01) << "bin " << i;
    EXPECT_LE(scan.rows[i][2], hi + 0.01) << "bin " << i;
  }
  // A wall straight ahead reads 2 m.
  EXPECT_NEAR(scan.rows[90][2], 2.0, 0.01);

  args.resize(args.size() - 4);
  EXPECT_EQ(Invoke(args).code, kExitUsage);  // --cams missing
  cams["cameras"].erase(0);
  textio::WriteFile(dir / "cams3.json", cams.dump());
  args.insert(args.end(), {"--cams", (dir / "cams3.json").string(), "-o",
                           (dir / "scan.csv").string()});
  EXPECT_EQ(Invoke(args).code, kExitUsage);  // count mismatch
}

TEST(ReportCliTest, TabulatesRuns) {
  const fs::path dir = Scratch();
  metrics::EpisodeResult ok{"a", true, 5.0, 4.0, 10.0, 5.0, 0, ""};
  metrics::EpisodeResult fail{"b", false, 1.0, 4.0, 20.0, 5.0, 2, ""};
  const std::vector<metrics::EpisodeResult> one = {ok, fail}, two = {ok, ok};
  metrics::SaveResults(one, dir / "one.jsonl");
  metrics::SaveResults(two, dir / "two.jsonl");
  const Outcome r = Invoke({"report", "base=" + (dir / "one.jsonl").string(),
                         "mpc=" + (dir / "two.jsonl").string(), "-o",
                         (dir / "table.txt").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string table = Slurp(dir / "table.txt");
  EXPECT_NE(table.find("base"), std::string::npos);
  EXPECT_NE(table.find("50.0"), std::string::npos);
  EXPECT_NE(table.find("100.0"), std::string::npos);
  EXPECT_EQ(Invoke({"report", "nolabel"}).code, kExitUsage);
}

TEST(SynthLogsCliTest, WritesParseableLogs) {
  const fs::path dir = Scratch();
  ASSERT_EQ(Invoke({"synth-logs", "--count", "2", "-o", dir.string()}).code, kExitOk);
  for (const char* name : {"log_00.csv", "log_01.csv"}) {
    const auto t = textio::ParseCsv(Slurp(dir / name), name);
    EXPECT_EQ(t.header.size(), 5u);
    EXPECT_GT(t.rows.size(), 1000u);
  }
  EXPECT_NE(Slurp(dir / "log_00.csv"), Slurp(dir / "log_01.csv"));
}

}  // namespace
}  // namespace kinonav::cli
