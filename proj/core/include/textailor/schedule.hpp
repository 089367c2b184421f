#pragma once

#include <vector>

#include "textailor/latent.hpp"

namespace textailor {

enum class ScheduleKind { kLinear, kCosine };

ScheduleKind parse_schedule_kind(const std::string& name);
const char* schedule_kind_name(ScheduleKind kind);

/// Cumulative signal levels alpha_bar[0..T] (alpha_bar[0] = 1, strictly
/// decreasing) and the sampling sub-sequence tau (ascending, within 1..T).
struct NoiseSchedule {
  int T = 0;
  std::vector<double> alpha_bar;
  std::vector<int> tau;

  double at(int t) const { return alpha_bar[static_cast<std::size_t>(t)]; }
  int steps() const { return static_cast<int>(tau.size()); }
};

/// Linear: betas evenly spaced in [1e-4, 2e-2]. Cosine: squared-cosine
/// alpha_bar with offset 0.008 and betas clipped at 0.999. tau holds
/// min(steps, T) evenly spaced timesteps including 1 and T.
NoiseSchedule make_schedule(int T, ScheduleKind kind, int steps = 30);

std::vector<int> timestep_subsequence(int T, int steps);

/// sqrt(ab_t) z0 + sqrt(1 - ab_t) eps.
LatentGrid forward_noise(const LatentGrid& z0, int t, const LatentGrid& eps,
                         const NoiseSchedule& sched);

/// (z_t - sqrt(1 - ab_t) eps_hat) / sqrt(ab_t).
LatentGrid predict_z0(const LatentGrid& z_t, const LatentGrid& eps_hat, int t,
                      const NoiseSchedule& sched);

/// Deterministic (eta = 0) DDIM update from t to t_prev < t.
LatentGrid ddim_step(const LatentGrid& z_t, const LatentGrid& eps_hat, int t, int t_prev,
                     const NoiseSchedule& sched);

/// One forward jump t_prev -> t: mean sqrt(ab_t/ab_prev) z, variance
/// 1 - ab_t/ab_prev.
LatentGrid renoise(const LatentGrid& z_prev, int t_prev, int t, const LatentGrid& noise,
                   const NoiseSchedule& sched);

/// known where mask = 0, unknown where mask = 1; mask is h x w and broadcast
/// over channels.
LatentGrid inpaint_merge(const LatentGrid& z_unknown, const LatentGrid& z_known,
                         const std::vector<std::uint8_t>& mask);

}  // namespace textailor
