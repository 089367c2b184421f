#include "textailor/sampler.hpp"

#include <algorithm>
#include <random>

#include "textailor/error.hpp"

namespace textailor {

void ResampleConfig::validate() const {
  if (repetitions < 0) throw ConfigError("resampling repetitions R must be >= 0");
  if (steps < 1) throw ConfigError("sampling steps S must be >= 1");
}

namespace {

LatentGrid checked_predict(Denoiser& denoiser, const LatentGrid& z, int t, const Conditioning& cond) {
  LatentGrid eps = denoiser.predict(z, t, cond);
  require_same_shape(z, eps, "denoiser output");
  if (!eps.all_finite()) throw NonFiniteError("denoiser returned non-finite values at t=" + std::to_string(t));
  return eps;
}

// Shared body of resample_loop and inpaint_loop.
LatentGrid run_sampler(Denoiser& denoiser, const LatentGrid& z0_known,
                       const std::vector<std::uint8_t>& mask, const Conditioning& cond,
                       const NoiseSchedule& sched, int repetitions, std::uint64_t seed,
                       const MergeObserver& observer) {
  if (mask.size() != z0_known.plane()) throw ShapeError("sampler: mask does not match latent");
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    return z0_known;
  }
  if (sched.tau.empty()) throw ConfigError("sampler: empty timestep sequence");

  std::mt19937_64 rng(seed);
  LatentGrid z = gaussian_like(z0_known, rng);
  for (auto it = sched.tau.rbegin(); it != sched.tau.rend(); ++it) {
    const int t = *it;
    const int t_prev = std::next(it) == sched.tau.rend() ? 0 : *std::next(it);

    LatentGrid known = forward_noise(z0_known, t_prev, gaussian_like(z0_known, rng), sched);
    LatentGrid unknown = ddim_step(z, checked_predict(denoiser, z, t, cond), t, t_prev, sched);
    z = inpaint_merge(unknown, known, mask);
    if (observer) observer(MergeEvent{t, t_prev, 0, known, z});

    for (int r = 1; r <= repetitions; ++r) {
      const LatentGrid z_t = renoise(z, t_prev, t, gaussian_like(z0_known, rng), sched);
      unknown = ddim_step(z_t, checked_predict(denoiser, z_t, t, cond), t, t_prev, sched);
      known = forward_noise(z0_known, t_prev, gaussian_like(z0_known, rng), sched);
      z = inpaint_merge(unknown, known, mask);
      if (observer) observer(MergeEvent{t, t_prev, r, known, z});
    }
  }
  return z;
}

}  // namespace

LatentGrid resample_loop(Denoiser& denoiser, const LatentGrid& z0_known,
                         const std::vector<std::uint8_t>& mask, const Conditioning& cond,
                         const NoiseSchedule& sched, const ResampleConfig& cfg,
                         std::uint64_t seed, const MergeObserver& observer) {
  cfg.validate();
  if (cfg.steps != sched.steps() && cfg.steps <= sched.T) {
    throw ConfigError("resample_loop: schedule has " + std::to_string(sched.steps()) +
                      " sampling steps but S = " + std::to_string(cfg.steps));
  }
  return run_sampler(denoiser, z0_known, mask, cond, sched, cfg.repetitions, seed, observer);
}

LatentGrid inpaint_loop(Denoiser& denoiser, const LatentGrid& z0_known,
                        const std::vector<std::uint8_t>& mask, const Conditioning& cond,
                        const NoiseSchedule& sched, std::uint64_t seed) {
  if (mask.size() != z0_known.plane()) throw ShapeError("inpaint_loop: mask does not match latent");
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) return z0_known;

  std::mt19937_64 rng(seed);
  LatentGrid z = gaussian_like(z0_known, rng);
  for (std::size_t k = sched.tau.size(); k-- > 0;) {
    const int t = sched.tau[k];
    const int t_prev = k == 0 ? 0 : sched.tau[k - 1];
    const LatentGrid known = forward_noise(z0_known, t_prev, gaussian_like(z0_known, rng), sched);
    const LatentGrid eps = checked_predict(denoiser, z, t, cond);
    z = inpaint_merge(ddim_step(z, eps, t, t_prev, sched), known, mask);
  }
  return z;
}

LatentGrid ddim_sample(Denoiser& denoiser, LatentGrid z_T, const Conditioning& cond,
                       const NoiseSchedule& sched) {
  LatentGrid z = std::move(z_T);
  for (std::size_t k = sched.tau.size(); k-- > 0;) {
    const int t = sched.tau[k];
    const int t_prev = k == 0 ? 0 : sched.tau[k - 1];
    z = ddim_step(z, checked_predict(denoiser, z, t, cond), t, t_prev, sched);
  }
  return z;
}

}  // namespace textailor
