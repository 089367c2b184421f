#include "textailor/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "textailor/error.hpp"

namespace textailor {

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "linear") return ScheduleKind::kLinear;
  if (name == "cosine") return ScheduleKind::kCosine;
  throw ConfigError("unknown schedule kind '" + name + "'");
}

const char* schedule_kind_name(ScheduleKind kind) {
  return kind == ScheduleKind::kLinear ? "linear" : "cosine";
}

std::vector<int> timestep_subsequence(int T, int steps) {
  if (T < 1) throw ConfigError("T must be >= 1");
  if (steps < 1) throw ConfigError("sampling steps must be >= 1");
  const int s = std::min(steps, T);
  std::vector<int> tau;
  tau.reserve(static_cast<std::size_t>(s));
  if (s == 1) {
    tau.push_back(T);
    return tau;
  }
  for (int i = 0; i < s; ++i) {
    const double v = 1.0 + static_cast<double>(T - 1) * i / (s - 1);
    const int t = static_cast<int>(std::lround(v));
    if (tau.empty() || t > tau.back()) tau.push_back(t);
  }
  return tau;
}

NoiseSchedule make_schedule(int T, ScheduleKind kind, int steps) {
  if (T < 1) throw ConfigError("T must be >= 1");
  NoiseSchedule s;
  s.T = T;
  s.alpha_bar.resize(static_cast<std::size_t>(T) + 1);
  s.alpha_bar[0] = 1.0;
  if (kind == ScheduleKind::kLinear) {
    constexpr double kBetaStart = 1e-4;
    constexpr double kBetaEnd = 2e-2;
    for (int t = 1; t <= T; ++t) {
      const double beta =
          T == 1 ? kBetaStart : kBetaStart + (kBetaEnd - kBetaStart) * (t - 1) / (T - 1);
      s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - beta);
    }
  } else {
    constexpr double kOffset = 0.008;
    const auto f = [&](int t) {
      const double x = (static_cast<double>(t) / T + kOffset) / (1.0 + kOffset);
      const double c = std::cos(x * std::numbers::pi / 2.0);
      return c * c;
    };
    const double f0 = f(0);
    double prev = 1.0;
    for (int t = 1; t <= T; ++t) {
      const double beta = std::min(1.0 - (f(t) / f0) / prev, 0.999);
      s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - beta);
      prev = f(t) / f0;
    }
  }
  s.tau = timestep_subsequence(T, steps);
  return s;
}

namespace {
void check_t(const NoiseSchedule& sched, int t, const char* what) {
  if (t < 0 || t > sched.T) throw ConfigError(std::string(what) + ": timestep out of range");
}
}  // namespace

LatentGrid forward_noise(const LatentGrid& z0, int t, const LatentGrid& eps,
                         const NoiseSchedule& sched) {
  require_same_shape(z0, eps, "forward_noise");
  check_t(sched, t, "forward_noise");
  if (t == 0) return z0;
  const double a = std::sqrt(sched.at(t));
  const double b = std::sqrt(1.0 - sched.at(t));
  LatentGrid out(z0.channels, z0.height, z0.width);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a * z0.data[i] + b * eps.data[i];
  return out;
}

LatentGrid predict_z0(const LatentGrid& z_t, const LatentGrid& eps_hat, int t,
                      const NoiseSchedule& sched) {
  require_same_shape(z_t, eps_hat, "predict_z0");
  if (t < 1 || t > sched.T) throw ConfigError("predict_z0: t must lie in 1..T");
  const double a = std::sqrt(sched.at(t));
  const double b = std::sqrt(1.0 - sched.at(t));
  LatentGrid out(z_t.channels, z_t.height, z_t.width);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = (z_t.data[i] - b * eps_hat.data[i]) / a;
  return out;
}

LatentGrid ddim_step(const LatentGrid& z_t, const LatentGrid& eps_hat, int t, int t_prev,
                     const NoiseSchedule& sched) {
  if (!(t > t_prev && t_prev >= 0)) throw ConfigError("ddim_step requires t > t_prev >= 0");
  check_t(sched, t, "ddim_step");
  const LatentGrid z0 = predict_z0(z_t, eps_hat, t, sched);
  const double a_t = sched.at(t);
  const double a_p = sched.at(t_prev);
  const double sa_t = std::sqrt(a_t);
  const double sa_p = std::sqrt(a_p);
  const double dir = std::sqrt(1.0 - a_p) / std::sqrt(1.0 - a_t);
  LatentGrid out(z_t.channels, z_t.height, z_t.width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data[i] = sa_p * z0.data[i] + dir * (z_t.data[i] - sa_t * z0.data[i]);
  }
  return out;
}

LatentGrid renoise(const LatentGrid& z_prev, int t_prev, int t, const LatentGrid& noise,
                   const NoiseSchedule& sched) {
  require_same_shape(z_prev, noise, "renoise");
  if (!(t > t_prev && t_prev >= 0)) throw ConfigError("renoise requires t > t_prev >= 0");
  check_t(sched, t, "renoise");
  const double ratio = sched.at(t) / sched.at(t_prev);
  const double a = std::sqrt(ratio);
  const double b = std::sqrt(1.0 - ratio);
  LatentGrid out(z_prev.channels, z_prev.height, z_prev.width);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a * z_prev.data[i] + b * noise.data[i];
  return out;
}

LatentGrid inpaint_merge(const LatentGrid& z_unknown, const LatentGrid& z_known,
                         const std::vector<std::uint8_t>& mask) {
  require_same_shape(z_unknown, z_known, "inpaint_merge");
  if (mask.size() != z_known.plane()) throw ShapeError("inpaint_merge: mask size mismatch");
  LatentGrid out = z_known;
  const std::size_t plane = z_known.plane();
  for (int c = 0; c < z_known.channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (mask[i]) out.data[c * plane + i] = z_unknown.data[c * plane + i];
    }
  }
  return out;
}

}  // namespace textailor
