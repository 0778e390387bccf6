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

#include "kinonav/sysid.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kinonav/textio.h"

namespace kinonav::sysid {
namespace {

std::string Fixture(const std::string& name) {
  return std::string(KINONAV_TEST_DATA) + "/" + name;
}

std::vector<double> Uniform(int n, double hz = 100.0) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = i / hz;
  return t;
}

// Closed-form unit-step response of x'' = f^2 (1 - x) - 2 zeta f x'.
double StepResponse(double f, double zeta, double t) {
  if (zeta < 1.0) {
    const double wd = f * std::sqrt(1 - zeta * zeta);
    return 1 - std::exp(-zeta * f * t) *
                   (std::cos(wd * t) + zeta / std::sqrt(1 - zeta * zeta) * std::sin(wd * t));
  }
  if (zeta == 1.0) return 1 - (1 + f * t) * std::exp(-f * t);
  const double s = std::sqrt(zeta * zeta - 1);
  const double r1 = -f * (zeta - s), r2 = -f * (zeta + s);
  return 1 + (r2 * std::exp(r1 * t) - r1 * std::exp(r2 * t)) / (r1 - r2);
}

// First crossing of `level`, by scanning then bisecting.
double Crossing(double f, double zeta, double level) {
  double hi = 0.0;
  while (StepResponse(f, zeta, hi) < level) hi += 1e-3 / f;
  double lo = hi - 1e-3 / f;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (StepResponse(f, zeta, mid) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double AnalyticRise(double f, double zeta) {
  return Crossing(f, zeta, 0.9) - Crossing(f, zeta, 0.1);
}

TEST(SmoothTest, ConstantSignalUnchanged) {
  const std::vector<double> c(50, 3.25);
  for (double v : Smooth(c, 21)) EXPECT_NEAR(v, 3.25, 1e-14);
}

TEST(SmoothTest, ImpulseGivesNormalizedHannWeights) {
  std::vector<double> x(41, 0.0);
  x[20] = 1.0;
  const std::vector<double> y = Smooth(x, 21);
  double norm = 0.0;
  std::vector<double> w(21);
  for (int j = 0; j < 21; ++j) {
    w[j] = 0.5 * (1 - std::cos(2 * kPi * j / 20.0));
    norm += w[j];
  }
  for (int i = 0; i < 41; ++i) {
    const double expected = (i >= 10 && i <= 30) ? w[i - 10] / norm : 0.0;
    EXPECT_NEAR(y[i], expected, 1e-15) << i;
  }
}

TEST(SmoothTest, IsLinear) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> a(80), b(80), mix(80);
  for (int i = 0; i < 80; ++i) {
    a[i] = n(rng);
    b[i] = n(rng);
    mix[i] = 2.5 * a[i] - 0.75 * b[i];
  }
  const auto sa = Smooth(a, 21), sb = Smooth(b, 21), sm = Smooth(mix, 21);
  for (int i = 0; i < 80; ++i) EXPECT_NEAR(sm[i], 2.5 * sa[i] - 0.75 * sb[i], 1e-12);
}

TEST(SmoothTest, RejectsBadWindows) {
  const std::vector<double> x(30, 1.0);
  EXPECT_THROW(Smooth(x, 20), InvalidArgument);
  EXPECT_THROW(Smooth(x, 1), InvalidArgument);
  EXPECT_THROW(Smooth(x, 31), InvalidArgument);
  // 21 samples at 100 Hz span 200 ms between the outer taps.
  EXPECT_NEAR((21 - 1) / 100.0, 0.2, 1e-12);
}

TEST(CentralDiffTest, ExactOnLinearAndConstant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> gap(0.005, 0.02);
  std::vector<double> t{0.0};
  for (int i = 1; i < 40; ++i) t.push_back(t.back() + gap(rng));
  std::vector<double> ramp(t.size()), flat(t.size(), 4.0);
  for (std::size_t i = 0; i < t.size(); ++i) ramp[i] = 2 * t[i];
  const auto d = CentralDiff(ramp, t);
  ASSERT_EQ(d.size(), t.size() - 2);
  for (double v : d) EXPECT_NEAR(v, 2.0, 1e-12);
  for (double v : CentralDiff(flat, t)) EXPECT_EQ(v, 0.0);
}

TEST(CentralDiffTest, SineMatchesCosine) {
  const auto t = Uniform(500);
  std::vector<double> s(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) s[i] = std::sin(t[i]);
  const auto d = CentralDiff(s, t);
  for (std::size_t k = 0; k < d.size(); ++k) EXPECT_NEAR(d[k], std::cos(t[k + 1]), 1e-4);
}

TEST(CentralDiffTest, SecondDifferenceOfQuadratic) {
  const auto t = Uniform(100);
  std::vector<double> q(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) q[i] = t[i] * t[i];
  const auto d1 = CentralDiff(q, t);
  const auto d2 = CentralDiff(d1, std::span<const double>(t).subspan(1, t.size() - 2));
  for (double v : d2) EXPECT_NEAR(v, 2.0, 1e-6);
}

TEST(CentralDiffTest, RejectsNonMonotoneTime) {
  EXPECT_THROW(CentralDiff(std::vector<double>{1, 2, 3}, std::vector<double>{0, 0.2, 0.1}),
               InvalidArgument);
  EXPECT_THROW(CentralDiff(std::vector<double>{1, 2}, std::vector<double>{0, 1}),
               InvalidArgument);
}

TEST(PartitionTest, SplitsBySignAndDropsZeros) {
  auto p = PartitionRegimes(std::vector<double>{1, -1}, std::vector<double>{1, 1});
  EXPECT_EQ(p.up, std::vector<std::size_t>{0});
  EXPECT_EQ(p.down, std::vector<std::size_t>{1});
  p = PartitionRegimes(std::vector<double>{0.5}, std::vector<double>{0});
  EXPECT_TRUE(p.up.empty());
  EXPECT_TRUE(p.down.empty());
}

struct Rows {
  std::vector<double> delta, vd, vdd;
};

Rows Consistent(double f, double zeta, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Rows r;
  for (int i = 0; i < n; ++i) {
    r.delta.push_back(u(rng));
    r.vd.push_back(2 * u(rng));
    r.vdd.push_back(f * f * r.delta.back() - 2 * zeta * f * r.vd.back());
  }
  return r;
}

TEST(FitRegimeTest, RecoversExactParameters) {
  const Rows r = Consistent(3.0, 0.7, 200, 2);
  const RegimeFit fit = FitRegime(r.delta, r.vd, r.vdd);
  EXPECT_NEAR(fit.f, 3.0, 1e-6);
  EXPECT_NEAR(fit.zeta, 0.7, 1e-6);
  EXPECT_LE(fit.rms, 1e-9);
  EXPECT_EQ(fit.count, 200);
}

// Rows consistent with an (f, zeta) pair taken from an actual rollout.
TEST(FitRegimeTest, RecoversFromForwardRollout) {
  dynamics::SecondOrderParams p = dynamics::DefaultParams();
  p.linear.acc_up_max = p.linear.acc_down_max = 100.0;
  dynamics::MotionState s;
  Rows r;
  const double dt = 1e-3;
  for (int i = 0; i < 800; ++i) {
    const double delta = 0.8 - s.v;
    const dynamics::MotionState next = dynamics::Substep(s, {0.8, 0.0}, p, dt);
    if (delta * s.v > 0) {
      r.delta.push_back(delta);
      r.vd.push_back(s.v_dot);
      r.vdd.push_back((next.v_dot - s.v_dot) / dt);
    }
    s = next;
  }
  const RegimeFit fit = FitRegime(r.delta, r.vd, r.vdd);
  EXPECT_NEAR(fit.f, 3.0, 1e-6);
  EXPECT_NEAR(fit.zeta, 0.7, 1e-6);
}

TEST(FitRegimeTest, NoisyRecoveryWithinFivePercent) {
  Rows r = Consistent(3.0, 0.7, 5000, 3);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 0.01);
  for (double& v : r.vdd) v += n(rng);
  const RegimeFit fit = FitRegime(r.delta, r.vd, r.vdd);
  EXPECT_NEAR(fit.f, 3.0, 0.05 * 3.0);
  EXPECT_NEAR(fit.zeta, 0.7, 0.05 * 0.7);
}

TEST(FitRegimeTest, RankDeficientAndUnstable) {
  Rows r = Consistent(3.0, 0.7, 50, 5);
  std::fill(r.delta.begin(), r.delta.end(), 0.0);
  EXPECT_THROW(FitRegime(r.delta, r.vd, r.vdd), Infeasible);
  Rows neg = Consistent(3.0, 0.7, 50, 6);
  for (std::size_t i = 0; i < neg.vdd.size(); ++i) neg.vdd[i] = -9.0 * neg.delta[i];
  EXPECT_THROW(FitRegime(neg.delta, neg.vd, neg.vdd), Infeasible);
  EXPECT_THROW(FitRegime(std::vector<double>{1.0}, std::vector<double>{1.0},
                         std::vector<double>{1.0}),
               Infeasible);
}

TrajectoryLog PlateauLog(double v_peak, double w_peak) {
  TrajectoryLog log;
  for (int i = 0; i < 300; ++i) {
    const double ramp = std::min(1.0, i / 100.0);
    log.samples.push_back({i / 100.0, v_peak, w_peak, v_peak * ramp, w_peak * ramp});
  }
  return log;
}

TEST(SaturationTest, PeakAndPureRotation) {
  const TrajectoryLog log = PlateauLog(0.98, 0.0);
  const AxisSeries s = PrepareAxis(log, Axis::kLinear);
  const Saturations sat = ExtractSaturations(std::span<const AxisSeries>(&s, 1));
  EXPECT_NEAR(sat.vel_max, 0.98, 1e-12);
  const TrajectoryLog spin = PlateauLog(0.0, 2.0);
  const AxisSeries lin = PrepareAxis(spin, Axis::kLinear);
  const Saturations none = ExtractSaturations(std::span<const AxisSeries>(&lin, 1));
  EXPECT_EQ(none.vel_max, 0.0);
  EXPECT_EQ(none.vel_min, 0.0);
  EXPECT_THROW(ExtractSaturations({}), InvalidArgument);
}

TEST(LogIoTest, RoundTripAndErrors) {
  TrajectoryLog log = PlateauLog(0.5, -1.0 / 3.0);
  const TrajectoryLog back = ParseLog(FormatLog(log));
  ASSERT_EQ(back.samples.size(), log.samples.size());
  EXPECT_EQ(back.samples[123].w_meas, log.samples[123].w_meas);
  EXPECT_NEAR(back.nominal_rate, 100.0, 1e-9);
  EXPECT_THROW(ParseLog(""), DataError);
  EXPECT_THROW(ParseLog("t,v_cmd,w_cmd,v_meas,w_meas\n"), DataError);
  EXPECT_THROW(ParseLog("t,v,w\n0,0,0\n"), DataError);
  try {
    ParseLog("t,v_cmd,w_cmd,v_meas,w_meas\n0,0,0,0,0\n0.01,0,0,zz,0\n", "x.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("x.csv:3"), std::string::npos);
  }
  EXPECT_THROW(ParseLog("t,v_cmd,w_cmd,v_meas,w_meas\n0,0,0,0,0\n0,0,0,0,0\n"), DataError);
}

TEST(IdentifyTest, FixtureRoundTripWithinFivePercent) {
  const TrajectoryLog log = LoadLog(Fixture("sysid_log.csv"));
  const dynamics::SecondOrderParams truth =
      dynamics::LoadParams(Fixture("sysid_model.txt"));
  const IdentifiedModel model = Identify(std::span<const TrajectoryLog>(&log, 1));
  const dynamics::AxisParams* got[] = {&model.params.linear, &model.params.angular};
  const dynamics::AxisParams* want[] = {&truth.linear, &truth.angular};
  for (int a = 0; a < 2; ++a) {
    EXPECT_NEAR(got[a]->f_up, want[a]->f_up, 0.05 * want[a]->f_up);
    EXPECT_NEAR(got[a]->zeta_up, want[a]->zeta_up, 0.05 * want[a]->zeta_up);
    EXPECT_NEAR(got[a]->f_down, want[a]->f_down, 0.05 * want[a]->f_down);
    EXPECT_NEAR(got[a]->zeta_down, want[a]->zeta_down, 0.05 * want[a]->zeta_down);
    EXPECT_NEAR(got[a]->vel_max, want[a]->vel_max, 0.02 * want[a]->vel_max);
    EXPECT_NEAR(got[a]->acc_up_max, want[a]->acc_up_max, 0.02 * want[a]->acc_up_max);
    EXPECT_NEAR(got[a]->acc_down_max, want[a]->acc_down_max, 0.02 * want[a]->acc_down_max);
  }
  for (int r = 0; r < kNumRegimes; ++r) {
    EXPECT_GE(model.residuals[r], 0.0);
    EXPECT_GT(model.counts[r], 100);
  }
}

TEST(IdentifyTest, PermutationInvariant) {
  const dynamics::SecondOrderParams p = dynamics::LoadParams(Fixture("sysid_model.txt"));
  std::vector<TrajectoryLog> logs;
  for (int i = 0; i < 3; ++i) logs.push_back(SynthesizeLog(p, StepScript(10 + i)));
  const IdentifiedModel a = Identify(logs);
  std::reverse(logs.begin(), logs.end());
  const IdentifiedModel b = Identify(logs);
  const double pa[] = {a.params.linear.f_up, a.params.linear.zeta_down,
                       a.params.angular.f_down, a.params.angular.acc_up_max};
  const double pb[] = {b.params.linear.f_up, b.params.linear.zeta_down,
                       b.params.angular.f_down, b.params.angular.acc_up_max};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(pa[i], pb[i], 1e-9 * std::abs(pa[i]));
  EXPECT_EQ(a.counts, b.counts);
}

TEST(IdentifyTest, UnexcitedLogsNameTheRegime) {
  TrajectoryLog still;
  for (int i = 0; i < 500; ++i) still.samples.push_back({i / 100.0, 0.0, 0.0, 0.0, 0.0});
  try {
    Identify(std::span<const TrajectoryLog>(&still, 1));
    FAIL();
  } catch (const Infeasible& e) {
    EXPECT_NE(std::string(e.what()).find("linear/acceleration"), std::string::npos);
  }
  TrajectoryLog steady;
  for (int i = 0; i < 500; ++i) steady.samples.push_back({i / 100.0, 0.5, 1.0, 0.5, 1.0});
  EXPECT_THROW(Identify(std::span<const TrajectoryLog>(&steady, 1)), Infeasible);
  EXPECT_THROW(Identify({}), InvalidArgument);
}

TEST(IdentifyTest, TooShortLogRejected) {
  TrajectoryLog log;
  for (int i = 0; i < 20; ++i) log.samples.push_back({i / 100.0, 1.0, 0.0, 0.0, 0.0});
  EXPECT_THROW(Identify(std::span<const TrajectoryLog>(&log, 1)), DataError);
}

TEST(RiseTimeTest, MatchesClosedForm) {
  for (double zeta : {0.3, 0.7, 1.0, 1.2, 2.0}) {
    for (double f : {1.0, 3.0, 8.0}) {
      EXPECT_NEAR(RiseTime(f, zeta), AnalyticRise(f, zeta), 1e-4 * AnalyticRise(f, zeta))
          << "f=" << f << " zeta=" << zeta;
    }
  }
}

IdentifiedModel WithLinearUp(double f, double zeta) {
  IdentifiedModel m;
  m.params = dynamics::DefaultParams();
  m.params.linear.f_up = f;
  m.params.linear.zeta_up = zeta;
  return m;
}

TEST(AdjustDampingTest, PreservesRiseTimes) {
  const IdentifiedModel fixed = AdjustDamping(WithLinearUp(3.0, 0.7));
  EXPECT_NEAR(fixed.params.linear.f_up, 3.0, 0.01 * 3.0);

  const IdentifiedModel under = AdjustDamping(WithLinearUp(3.0, 0.3));
  EXPECT_EQ(under.params.linear.zeta_up, 0.7);
  EXPECT_GT(under.params.linear.f_up, 3.0);
  EXPECT_NEAR(AnalyticRise(under.params.linear.f_up, 0.7), AnalyticRise(3.0, 0.3),
              0.01 * AnalyticRise(3.0, 0.3));

  const IdentifiedModel over = AdjustDamping(WithLinearUp(3.0, 1.2));
  EXPECT_LT(over.params.linear.f_up, 3.0);
  EXPECT_NEAR(AnalyticRise(over.params.linear.f_up, 0.7), AnalyticRise(3.0, 1.2),
              0.01 * AnalyticRise(3.0, 1.2));

  for (const dynamics::AxisParams* a : {&over.params.linear, &over.params.angular}) {
    EXPECT_EQ(a->zeta_up, 0.7);
    EXPECT_EQ(a->zeta_down, 0.7);
  }
  EXPECT_THROW(AdjustDamping(fixed, 0.0), InvalidArgument);
}

TEST(StepScriptTest, CoversEveryActionOnce) {
  const auto script = StepScript(5);
  ASSERT_EQ(script.size(), 30u);
  EXPECT_EQ(script.front(), (dynamics::VelocityCommand{0, 0}));
  EXPECT_EQ(script.back(), (dynamics::VelocityCommand{0, 0}));
  EXPECT_NE(StepScript(5)[1], StepScript(6)[1]);
}

TEST(ModelFileTest, ContainsParamsAndMeta) {
  IdentifiedModel m = WithLinearUp(3.0, 0.7);
  m.residuals = {0.1, 0.2, 0.3, 0.4};
  m.counts = {10, 20, 30, 40};
  const std::string text = FormatModel(m);
  EXPECT_EQ(dynamics::ParseParams(text), m.params);
  const auto kv = textio::ParseKeyValues(text);
  EXPECT_EQ(kv.at("meta.residual_ang_down"), "0.4");
  EXPECT_EQ(kv.at("meta.count_lin_down"), "20");
}

}  // namespace
}  // namespace kinonav::sysid
