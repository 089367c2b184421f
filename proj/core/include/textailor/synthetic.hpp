#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "textailor/finetune.hpp"
#include "textailor/schedule.hpp"
#include "textailor/toy_network.hpp"

namespace textailor {

/// Synthetic "pretraining" distribution for the toy denoiser: an elliptical
/// object with a dome-shaped depth map, painted with two-colour horizontal
/// stripes over a flat background.
struct StripeDistribution {
  int channels = 3;
  int height = 16;
  int width = 16;
  int min_period = 3;
  int max_period = 6;
  double background = 0.0;  // latent value of the background
  int vocabulary = 16;
};

TrainingSample sample_stripes(const StripeDistribution& dist, std::mt19937_64& rng);

struct PretrainConfig {
  int steps = 3000;
  double lr = 2e-4;
  double momentum = 0.9;
  int batch = 4;
  std::uint64_t seed = 1;
};

/// Trains a freshly initialised toy network on StripeDistribution with the
/// plain noise-prediction loss.
ToyWeights pretrain_toy(const ToyArchitecture& arch, const NoiseSchedule& sched,
                        const StripeDistribution& dist, const PretrainConfig& cfg);

}  // namespace textailor
