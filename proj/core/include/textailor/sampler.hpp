#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "textailor/denoiser.hpp"
#include "textailor/latent.hpp"
#include "textailor/schedule.hpp"

namespace textailor {

struct ResampleConfig {
  int repetitions = 3;  // R
  int steps = 30;       // S

  void validate() const;
};

/// Snapshot handed to an observer after every merge. `repetition` is 0 for
/// the first merge at a timestep and 1..R for the resampling passes.
struct MergeEvent {
  int t = 0;
  int t_prev = 0;
  int repetition = 0;
  const LatentGrid& known;
  const LatentGrid& merged;
};

using MergeObserver = std::function<void(const MergeEvent&)>;

/// Inpainting sampler with non-Markovian resampling. For each t in tau
/// (descending, t_prev its predecessor or 0) the known branch is forward-noised
/// to t_prev, the unknown branch takes one DDIM step and the two are merged;
/// then R times the merged latent is renoised back to t, denoised again and
/// re-merged with a freshly noised known branch. The result equals z0_known
/// on every mask = 0 cell.
LatentGrid resample_loop(Denoiser& denoiser, const LatentGrid& z0_known,
                         const std::vector<std::uint8_t>& mask, const Conditioning& cond,
                         const NoiseSchedule& sched, const ResampleConfig& cfg,
                         std::uint64_t seed, const MergeObserver& observer = {});

/// Plain DDIM inpainting (single merge per timestep). Consumes random numbers
/// in the same order as resample_loop with R = 0.
LatentGrid inpaint_loop(Denoiser& denoiser, const LatentGrid& z0_known,
                        const std::vector<std::uint8_t>& mask, const Conditioning& cond,
                        const NoiseSchedule& sched, std::uint64_t seed);

/// Unconditional deterministic DDIM from a given z_T over sched.tau.
LatentGrid ddim_sample(Denoiser& denoiser, LatentGrid z_T, const Conditioning& cond,
                       const NoiseSchedule& sched);

}  // namespace textailor
