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

// Identification of the asymmetric second-order model from recorded
// command/odometry trajectories.
//
// Pipeline per axis: Hann smoothing, two central-difference passes, regime
// split on sign(delta * vel), then one 2-parameter least-squares fit per
// regime on [delta, vel_dot] * [f^2, -2 zeta f]^T = vel_ddot. Saturation
// limits are the empirical extrema of the smoothed signals.

#ifndef KINONAV_SYSID_H_
#define KINONAV_SYSID_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kinonav/dynamics.h"

namespace kinonav::sysid {

struct LogSample {
  double t = 0.0;       // s
  double v_cmd = 0.0;   // m/s, zero-order hold
  double w_cmd = 0.0;   // rad/s, zero-order hold
  double v_meas = 0.0;  // m/s
  double w_meas = 0.0;  // rad/s
};

struct TrajectoryLog {
  std::vector<LogSample> samples;
  double nominal_rate = 100.0;  // Hz

  // Strictly increasing time and enough samples for two derivative passes.
  void Validate(int window) const;
};

enum class Axis { kLinear, kAngular };

enum RegimeId : int {
  kLinearUp = 0,
  kLinearDown = 1,
  kAngularUp = 2,
  kAngularDown = 3,
};
inline constexpr int kNumRegimes = 4;
std::string_view RegimeName(RegimeId id);

struct IdentifiedModel {
  dynamics::SecondOrderParams params;
  std::array<double, kNumRegimes> residuals{};       // LS residual RMS
  std::array<std::int64_t, kNumRegimes> counts{};    // samples per fit
};

// Symmetric Hann-weighted moving average. Near the ends the window is
// truncated and its weights renormalised, so the output has the input length.
std::vector<double> Smooth(std::span<const double> signal, int window = 21);

// (x[k+1] - x[k-1]) / (t[k+1] - t[k-1]) for interior k; length n - 2.
std::vector<double> CentralDiff(std::span<const double> signal,
                                std::span<const double> timestamps);

struct RegimePartition {
  std::vector<std::size_t> up;
  std::vector<std::size_t> down;
};

// Products exactly equal to zero go to neither set.
RegimePartition PartitionRegimes(std::span<const double> delta,
                                 std::span<const double> vel);

struct RegimeFit {
  double f = 0.0;
  double zeta = 0.0;
  double rms = 0.0;
  std::int64_t count = 0;
};

// Least squares via the 2x2 normal equations. Throws Infeasible on a
// rank-deficient design or a fit with f^2 <= 0 or zeta <= 0.
RegimeFit FitRegime(std::span<const double> delta,
                    std::span<const double> vel_dot,
                    std::span<const double> vel_ddot);

// Smoothed signals and derivatives of one axis of one log. `vel`, `cmd` and
// `delta` cover every sample; `vel_dot[i]` belongs to sample i + 1 and
// `vel_ddot[i]` to sample i + 2.
struct AxisSeries {
  std::vector<double> vel;
  std::vector<double> cmd;
  std::vector<double> delta;
  std::vector<double> vel_dot;
  std::vector<double> vel_ddot;
};

AxisSeries PrepareAxis(const TrajectoryLog& log, Axis axis, int window = 21);

struct Saturations {
  double vel_max = 0.0;
  double vel_min = 0.0;
  double acc_up_max = 0.0;
  double acc_down_max = 0.0;
};

// Empirical extrema over all logs; acceleration maxima are taken per regime
// over the samples where the first derivative exists.
Saturations ExtractSaturations(std::span<const AxisSeries> series);

struct IdentifyOptions {
  int window = 21;
  // Drop samples near acceleration or velocity clipping from the fits.
  bool mask_saturated = true;
  double acc_mask_fraction = 0.95;
  double vel_mask_fraction = 0.01;
};

// Full pipeline over all logs. Throws Infeasible naming the regime when one
// of the four fits has no usable samples.
IdentifiedModel Identify(std::span<const TrajectoryLog> logs,
                         const IdentifyOptions& options = {});

// 10%-90% rise time of the unit step response of
// x'' = f^2 (1 - x) - 2 zeta f x' from rest, by fine-step RK4.
double RiseTime(double f, double zeta);

// Sets every damping ratio to `zeta_target` and rescales each natural
// frequency so the step-response rise time is preserved.
IdentifiedModel AdjustDamping(const IdentifiedModel& model,
                              double zeta_target = 0.7);

// Forward-model log synthesis for identification round trips. The model is
// integrated at `integrate_hz` and sampled at `sample_hz`; each command is
// held for `hold_s`. Gaussian noise of `noise_sigma` is added to the
// measurements.
struct SynthesisOptions {
  double hold_s = 3.0;
  double sample_hz = 100.0;
  double integrate_hz = 1000.0;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

TrajectoryLog SynthesizeLog(const dynamics::SecondOrderParams& params,
                            std::span<const dynamics::VelocityCommand> script,
                            const SynthesisOptions& options = {});

// Rest, then all 28 discrete actions in a seed-dependent order, then rest.
std::vector<dynamics::VelocityCommand> StepScript(std::uint64_t seed);

// CSV with header t,v_cmd,w_cmd,v_meas,w_meas. Parsing checks the header,
// field counts and time ordering and reports line numbers.
std::string FormatLog(const TrajectoryLog& log);
TrajectoryLog ParseLog(std::string_view text, std::string_view source = "log");
TrajectoryLog LoadLog(const std::filesystem::path& path);

// Parameter document followed by meta.residual_<regime> and
// meta.count_<regime> lines.
std::string FormatModel(const IdentifiedModel& model);

}  // namespace kinonav::sysid

#endif  // KINONAV_SYSID_H_
