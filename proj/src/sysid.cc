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
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "kinonav/action_space.h"
#include "kinonav/textio.h"

namespace kinonav::sysid {
namespace {

// Fit rows of one regime, pooled over logs.
struct FitRows {
  std::vector<double> delta;
  std::vector<double> vel_dot;
  std::vector<double> vel_ddot;
};

// Samples within `radius` of any flagged sample.
std::vector<bool> Dilate(const std::vector<bool>& flags, int radius) {
  const int n = static_cast<int>(flags.size());
  std::vector<bool> out(flags.size(), false);
  int last_flag = std::numeric_limits<int>::min() / 2;
  for (int i = 0; i < n; ++i) {
    if (flags[i]) last_flag = i;
    if (i - last_flag <= radius) out[i] = true;
  }
  last_flag = std::numeric_limits<int>::max() / 2;
  for (int i = n - 1; i >= 0; --i) {
    if (flags[i]) last_flag = i;
    if (last_flag - i <= radius) out[i] = true;
  }
  return out;
}

RegimeFit FitOrThrow(const FitRows& rows, RegimeId id) {
  if (rows.delta.size() < 2) {
    throw Infeasible("regime " + std::string(RegimeName(id)) +
                     " is unidentifiable: " + std::to_string(rows.delta.size()) +
                     " usable samples");
  }
  try {
    return FitRegime(rows.delta, rows.vel_dot, rows.vel_ddot);
  } catch (const Infeasible& e) {
    throw Infeasible("regime " + std::string(RegimeName(id)) + ": " + e.what());
  }
}

// Unit-step response state of x'' = f^2 (1 - x) - 2 zeta f x'.
struct StepState {
  double x;
  double xd;
};

StepState Rk4(const StepState& s, double f, double zeta, double h) {
  auto deriv = [&](const StepState& q) {
    return StepState{q.xd, f * f * (1.0 - q.x) - 2.0 * zeta * f * q.xd};
  };
  const StepState k1 = deriv(s);
  const StepState k2 = deriv({s.x + 0.5 * h * k1.x, s.xd + 0.5 * h * k1.xd});
  const StepState k3 = deriv({s.x + 0.5 * h * k2.x, s.xd + 0.5 * h * k2.xd});
  const StepState k4 = deriv({s.x + h * k3.x, s.xd + h * k3.xd});
  return {s.x + h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
          s.xd + h / 6.0 * (k1.xd + 2 * k2.xd + 2 * k3.xd + k4.xd)};
}

double MatchRiseTime(double target_rise, double zeta_target, double f_hint) {
  // Rise time is strictly decreasing in f at fixed zeta.
  double lo = f_hint * 1e-2;
  double hi = f_hint * 1e2;
  for (int i = 0; i < 60; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (RiseTime(mid, zeta_target) > target_rise) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi / lo < 1.0 + 1e-10) break;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

std::string_view RegimeName(RegimeId id) {
  switch (id) {
    case kLinearUp:
      return "linear/acceleration";
    case kLinearDown:
      return "linear/deceleration";
    case kAngularUp:
      return "angular/acceleration";
    case kAngularDown:
      return "angular/deceleration";
  }
  return "unknown";
}

void TrajectoryLog::Validate(int window) const {
  const std::size_t needed = 2 * static_cast<std::size_t>(window) + 5;
  if (samples.size() < needed) {
    throw DataError("trajectory log has " + std::to_string(samples.size()) +
                    " samples, need at least " + std::to_string(needed));
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw DataError("trajectory log timestamps not strictly increasing at sample " +
                      std::to_string(i));
    }
  }
}

std::vector<double> Smooth(std::span<const double> signal, int window) {
  if (window < 3 || window % 2 == 0) {
    throw InvalidArgument("smoothing window must be odd and >= 3");
  }
  if (signal.size() < static_cast<std::size_t>(window)) {
    throw InvalidArgument("signal shorter than smoothing window");
  }
  std::vector<double> weights(window);
  for (int j = 0; j < window; ++j) {
    weights[j] = 0.5 * (1.0 - std::cos(2.0 * kPi * j / (window - 1)));
  }
  const int half = window / 2;
  const int n = static_cast<int>(signal.size());
  std::vector<double> out(signal.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    double norm = 0.0;
    for (int k = lo; k <= hi; ++k) {
      const double wk = weights[k - i + half];
      acc += wk * signal[k];
      norm += wk;
    }
    out[i] = acc / norm;
  }
  return out;
}

std::vector<double> CentralDiff(std::span<const double> signal,
                                std::span<const double> timestamps) {
  if (signal.size() != timestamps.size()) {
    throw InvalidArgument("signal and timestamps differ in length");
  }
  if (signal.size() < 3) throw InvalidArgument("need at least 3 samples");
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw InvalidArgument("timestamps not strictly increasing");
    }
  }
  std::vector<double> out(signal.size() - 2);
  for (std::size_t k = 1; k + 1 < signal.size(); ++k) {
    out[k - 1] = (signal[k + 1] - signal[k - 1]) /
                 (timestamps[k + 1] - timestamps[k - 1]);
  }
  return out;
}

RegimePartition PartitionRegimes(std::span<const double> delta,
                                 std::span<const double> vel) {
  if (delta.size() != vel.size()) {
    throw InvalidArgument("delta and vel differ in length");
  }
  RegimePartition parts;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const double p = delta[k] * vel[k];
    if (p > 0.0) {
      parts.up.push_back(k);
    } else if (p < 0.0) {
      parts.down.push_back(k);
    }
  }
  return parts;
}

RegimeFit FitRegime(std::span<const double> delta,
                    std::span<const double> vel_dot,
                    std::span<const double> vel_ddot) {
  if (delta.size() != vel_dot.size() || delta.size() != vel_ddot.size()) {
    throw InvalidArgument("fit columns differ in length");
  }
  if (delta.size() < 2) throw Infeasible("fewer than 2 samples");

  double s_dd = 0.0, s_dv = 0.0, s_vv = 0.0, r_d = 0.0, r_v = 0.0;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    s_dd += delta[k] * delta[k];
    s_dv += delta[k] * vel_dot[k];
    s_vv += vel_dot[k] * vel_dot[k];
    r_d += delta[k] * vel_ddot[k];
    r_v += vel_dot[k] * vel_ddot[k];
  }
  const double det = s_dd * s_vv - s_dv * s_dv;
  if (s_dd <= 0.0 || s_vv <= 0.0 || det <= 1e-12 * s_dd * s_vv) {
    throw Infeasible("rank-deficient design matrix");
  }
  const double a = (s_vv * r_d - s_dv * r_v) / det;   // f^2
  const double b = (s_dd * r_v - s_dv * r_d) / det;   // -2 zeta f
  if (!(a > 0.0)) throw Infeasible("unstable fit: f^2 <= 0");

  RegimeFit fit;
  fit.f = std::sqrt(a);
  fit.zeta = -b / (2.0 * fit.f);
  if (!(fit.zeta > 0.0)) throw Infeasible("unstable fit: zeta <= 0");
  double ss = 0.0;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const double r = a * delta[k] + b * vel_dot[k] - vel_ddot[k];
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / static_cast<double>(delta.size()));
  fit.count = static_cast<std::int64_t>(delta.size());
  return fit;
}

AxisSeries PrepareAxis(const TrajectoryLog& log, Axis axis, int window) {
  log.Validate(window);
  const std::size_t n = log.samples.size();
  std::vector<double> t(n), meas(n), cmd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LogSample& s = log.samples[i];
    t[i] = s.t;
    meas[i] = axis == Axis::kLinear ? s.v_meas : s.w_meas;
    cmd[i] = axis == Axis::kLinear ? s.v_cmd : s.w_cmd;
  }
  AxisSeries series;
  series.vel = Smooth(meas, window);
  series.cmd = Smooth(cmd, window);
  series.delta.resize(n);
  for (std::size_t i = 0; i < n; ++i) series.delta[i] = series.cmd[i] - series.vel[i];
  series.vel_dot = CentralDiff(series.vel, t);
  series.vel_ddot =
      CentralDiff(series.vel_dot, std::span<const double>(t).subspan(1, n - 2));
  return series;
}

Saturations ExtractSaturations(std::span<const AxisSeries> series) {
  if (series.empty()) throw InvalidArgument("no logs to extract saturations from");
  Saturations sat;
  sat.vel_max = -std::numeric_limits<double>::infinity();
  sat.vel_min = std::numeric_limits<double>::infinity();
  for (const AxisSeries& s : series) {
    for (double v : s.vel) {
      sat.vel_max = std::max(sat.vel_max, v);
      sat.vel_min = std::min(sat.vel_min, v);
    }
    for (std::size_t i = 0; i < s.vel_dot.size(); ++i) {
      const double p = s.delta[i + 1] * s.vel[i + 1];
      const double a = std::abs(s.vel_dot[i]);
      if (p > 0.0) sat.acc_up_max = std::max(sat.acc_up_max, a);
      if (p < 0.0) sat.acc_down_max = std::max(sat.acc_down_max, a);
    }
  }
  return sat;
}

IdentifiedModel Identify(std::span<const TrajectoryLog> logs,
                         const IdentifyOptions& options) {
  if (logs.empty()) throw InvalidArgument("no trajectory logs given");

  IdentifiedModel model;
  for (Axis axis : {Axis::kLinear, Axis::kAngular}) {
    std::vector<AxisSeries> series;
    series.reserve(logs.size());
    for (const TrajectoryLog& log : logs) {
      series.push_back(PrepareAxis(log, axis, options.window));
    }
    const Saturations sat = ExtractSaturations(series);
    const double vel_band = options.vel_mask_fraction * (sat.vel_max - sat.vel_min);

    FitRows up, down;
    for (const AxisSeries& s : series) {
      // Fit rows live at samples k = 2 .. n-3.
      const std::size_t rows = s.vel_ddot.size();
      std::vector<bool> saturated(rows, false);
      for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t k = i + 2;
        const double p = s.delta[k] * s.vel[k];
        const double acc = std::abs(s.vel_dot[i + 1]);
        const double acc_limit = p > 0.0 ? sat.acc_up_max : sat.acc_down_max;
        saturated[i] = (p != 0.0 && acc >= options.acc_mask_fraction * acc_limit) ||
                       s.vel[k] >= sat.vel_max - vel_band ||
                       s.vel[k] <= sat.vel_min + vel_band;
      }
      const std::vector<bool> masked =
          options.mask_saturated ? Dilate(saturated, options.window / 2 + 1)
                                 : std::vector<bool>(rows, false);

      std::vector<double> delta(s.delta.begin() + 2, s.delta.begin() + 2 + rows);
      std::vector<double> vel(s.vel.begin() + 2, s.vel.begin() + 2 + rows);
      const RegimePartition parts = PartitionRegimes(delta, vel);
      auto append = [&](const std::vector<std::size_t>& idx, FitRows& out) {
        for (std::size_t i : idx) {
          if (masked[i]) continue;
          out.delta.push_back(delta[i]);
          out.vel_dot.push_back(s.vel_dot[i + 1]);
          out.vel_ddot.push_back(s.vel_ddot[i]);
        }
      };
      append(parts.up, up);
      append(parts.down, down);
    }

    const RegimeId up_id = axis == Axis::kLinear ? kLinearUp : kAngularUp;
    const RegimeId down_id = axis == Axis::kLinear ? kLinearDown : kAngularDown;
    const RegimeFit fit_up = FitOrThrow(up, up_id);
    const RegimeFit fit_down = FitOrThrow(down, down_id);

    dynamics::AxisParams& p =
        axis == Axis::kLinear ? model.params.linear : model.params.angular;
    p = {.f_up = fit_up.f,
         .zeta_up = fit_up.zeta,
         .f_down = fit_down.f,
         .zeta_down = fit_down.zeta,
         .vel_max = sat.vel_max,
         .vel_min = sat.vel_min,
         .acc_up_max = sat.acc_up_max,
         .acc_down_max = sat.acc_down_max};
    model.residuals[up_id] = fit_up.rms;
    model.residuals[down_id] = fit_down.rms;
    model.counts[up_id] = fit_up.count;
    model.counts[down_id] = fit_down.count;
  }
  return model;
}

double RiseTime(double f, double zeta) {
  if (!(f > 0.0) || !(zeta > 0.0)) {
    throw InvalidArgument("rise time needs f > 0 and zeta > 0");
  }
  // Integrate in units of 1/f so accuracy does not depend on f.
  const double h = 1e-3 / f;
  StepState s{0.0, 0.0};
  double t = 0.0;
  double t10 = -1.0;
  const double t_limit = 200.0 * (1.0 + zeta * zeta) / f;
  while (t < t_limit) {
    const StepState next = Rk4(s, f, zeta, h);
    if (t10 < 0.0 && next.x >= 0.1) {
      t10 = t + h * (0.1 - s.x) / (next.x - s.x);
    }
    if (next.x >= 0.9) {
      return t + h * (0.9 - s.x) / (next.x - s.x) - t10;
    }
    s = next;
    t += h;
  }
  throw Infeasible("step response never reached 90%");
}

IdentifiedModel AdjustDamping(const IdentifiedModel& model, double zeta_target) {
  if (!(zeta_target > 0.0)) throw InvalidArgument("zeta_target must be positive");
  IdentifiedModel out = model;
  for (dynamics::AxisParams* p : {&out.params.linear, &out.params.angular}) {
    p->f_up = MatchRiseTime(RiseTime(p->f_up, p->zeta_up), zeta_target, p->f_up);
    p->zeta_up = zeta_target;
    p->f_down =
        MatchRiseTime(RiseTime(p->f_down, p->zeta_down), zeta_target, p->f_down);
    p->zeta_down = zeta_target;
  }
  return out;
}

TrajectoryLog SynthesizeLog(const dynamics::SecondOrderParams& params,
                            std::span<const dynamics::VelocityCommand> script,
                            const SynthesisOptions& options) {
  params.Validate();
  const long per_sample = std::lround(options.integrate_hz / options.sample_hz);
  if (per_sample < 1) throw InvalidArgument("integrate_hz must be >= sample_hz");
  const long hold_samples = std::lround(options.hold_s * options.sample_hz);
  const double dt = 1.0 / options.integrate_hz;

  std::mt19937_64 rng(options.noise_seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  TrajectoryLog log;
  log.nominal_rate = options.sample_hz;
  log.samples.reserve(script.size() * hold_samples);
  dynamics::MotionState state;
  long sample_index = 0;
  for (const dynamics::VelocityCommand& cmd : script) {
    for (long i = 0; i < hold_samples; ++i) {
      LogSample s;
      s.t = static_cast<double>(sample_index) / options.sample_hz;
      s.v_cmd = cmd.v_star;
      s.w_cmd = cmd.w_star;
      s.v_meas = state.v;
      s.w_meas = state.w;
      if (options.noise_sigma > 0.0) {
        s.v_meas += options.noise_sigma * noise(rng);
        s.w_meas += options.noise_sigma * noise(rng);
      }
      log.samples.push_back(s);
      ++sample_index;
      for (long k = 0; k < per_sample; ++k) {
        state = dynamics::Substep(state, cmd, params, dt);
      }
    }
  }
  return log;
}

std::vector<dynamics::VelocityCommand> StepScript(std::uint64_t seed) {
  std::vector<int> order(sim::kNumActions);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (int i = sim::kNumActions - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<dynamics::VelocityCommand> script;
  script.push_back({0.0, 0.0});
  for (int a : order) script.push_back(sim::ActionToCommand(a));
  script.push_back({0.0, 0.0});
  return script;
}

std::string FormatLog(const TrajectoryLog& log) {
  std::string out = "t,v_cmd,w_cmd,v_meas,w_meas\n";
  for (const LogSample& s : log.samples) {
    out += textio::FormatDouble(s.t) + "," + textio::FormatDouble(s.v_cmd) + "," +
           textio::FormatDouble(s.w_cmd) + "," + textio::FormatDouble(s.v_meas) + "," +
           textio::FormatDouble(s.w_meas) + "\n";
  }
  return out;
}

TrajectoryLog ParseLog(std::string_view text, std::string_view source) {
  const textio::CsvTable table = textio::ParseCsv(text, source);
  const std::vector<std::string> expected = {"t", "v_cmd", "w_cmd", "v_meas", "w_meas"};
  if (table.header != expected) {
    throw DataError(std::string(source) + ":1: header must be t,v_cmd,w_cmd,v_meas,w_meas");
  }
  if (table.rows.empty()) throw DataError(std::string(source) + ": log has no samples");
  TrajectoryLog log;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::vector<double>& r = table.rows[i];
    if (i > 0 && !(r[0] > table.rows[i - 1][0])) {
      throw DataError(std::string(source) + ": time not increasing at sample " +
                      std::to_string(i + 1));
    }
    log.samples.push_back({r[0], r[1], r[2], r[3], r[4]});
  }
  if (log.samples.size() >= 2) {
    const double span = log.samples.back().t - log.samples.front().t;
    log.nominal_rate = (log.samples.size() - 1) / span;
  }
  return log;
}

TrajectoryLog LoadLog(const std::filesystem::path& path) {
  return ParseLog(textio::ReadFile(path), path.string());
}

std::string FormatModel(const IdentifiedModel& model) {
  static constexpr const char* kKeys[kNumRegimes] = {"lin_up", "lin_down", "ang_up",
                                                      "ang_down"};
  std::string out = dynamics::FormatParams(model.params);
  for (int i = 0; i < kNumRegimes; ++i) {
    out += "meta.residual_" + std::string(kKeys[i]) + " = " +
           textio::FormatDouble(model.residuals[i]) + "\n";
  }
  for (int i = 0; i < kNumRegimes; ++i) {
    out += "meta.count_" + std::string(kKeys[i]) + " = " +
           std::to_string(model.counts[i]) + "\n";
  }
  return out;
}

}  // namespace kinonav::sysid
