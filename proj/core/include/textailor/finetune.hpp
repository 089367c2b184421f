#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "textailor/camera.hpp"
#include "textailor/denoiser.hpp"
#include "textailor/latent.hpp"
#include "textailor/schedule.hpp"
#include "textailor/toy_network.hpp"

namespace textailor {

/// w(t) in the training objectives.
using TimestepWeight = std::function<double(int t)>;
TimestepWeight constant_weight(double w = 1.0);

/// One clean latent with its conditioning.
struct TrainingSample {
  LatentGrid z0;
  Conditioning cond;
};

struct FinetuneConfig {
  double lambda = 2.5;
  int steps = 2000;
  double lr = 1e-4;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  TimestepWeight weight = constant_weight();

  void validate() const;
};

/// Anchor views near the initial viewpoint whose resampled renders form the
/// fine-tuning set.
struct AnchorSet {
  std::vector<Viewpoint> viewpoints;
  std::vector<TrainingSample> samples;

  static std::vector<Viewpoint> default_viewpoints();
};

/// w(t) ||eps_phi(z_t, t, c) - eps||^2 with z_t = forward_noise(z0, t, eps).
double loss_fine(const ToyArchitecture& arch, std::span<const double> params,
                 const TrainingSample& sample, int t, const LatentGrid& eps,
                 const NoiseSchedule& sched, const TimestepWeight& w);

/// w(t) ||eps_phi(z_t, t, c) - eps_frozen(z_t, t, c)||^2 on the same draw.
double loss_preserve(const ToyArchitecture& arch, std::span<const double> params,
                     std::span<const double> frozen, const TrainingSample& sample, int t,
                     const LatentGrid& eps, const NoiseSchedule& sched,
                     const TimestepWeight& w);

/// loss_fine + lambda * loss_preserve.
double loss_final(const ToyArchitecture& arch, std::span<const double> params,
                  std::span<const double> frozen, const TrainingSample& sample, int t,
                  const LatentGrid& eps, const NoiseSchedule& sched, const FinetuneConfig& cfg);

struct LossTerms {
  double fine = 0.0;
  double preserve = 0.0;
  double total = 0.0;
};

/// Evaluates the three losses and accumulates d total / d params into `grad`.
LossTerms loss_final_gradient(const ToyArchitecture& arch, std::span<const double> params,
                              std::span<const double> frozen, const TrainingSample& sample,
                              int t, const LatentGrid& eps, const NoiseSchedule& sched,
                              double lambda, const TimestepWeight& w, std::span<double> grad);

/// Heavy-ball SGD: v <- m v + g; p <- p - lr v.
class SgdMomentum {
 public:
  SgdMomentum(std::size_t n, double lr, double momentum);
  void step(std::span<double> params, std::span<const double> grad);

 private:
  std::vector<double> velocity_;
  double lr_;
  double momentum_;
};

struct TrainingLogEntry {
  int step = 0;
  double fine = 0.0;
  double preserve = 0.0;
  double total = 0.0;
};

struct FinetuneResult {
  std::vector<double> frozen;
  std::vector<TrainingLogEntry> log;
};

/// Minimises the batch-mean of loss_final over the anchor samples with a
/// fresh (t, eps) per sample and step. The frozen snapshot is taken on entry
/// and the denoiser's parameters are updated in place.
FinetuneResult finetune_loop(ToyDenoiser& toy, const AnchorSet& anchors, const NoiseSchedule& sched,
                             const FinetuneConfig& cfg);

void write_training_csv(const std::filesystem::path& path, const std::vector<TrainingLogEntry>& log);

double parameter_distance(std::span<const double> a, std::span<const double> b);
double max_abs_drift(std::span<const double> a, std::span<const double> b);

/// Mean loss_preserve over `samples` with (t, eps) drawn from `seed`.
double mean_preserve_loss(const ToyArchitecture& arch, std::span<const double> params,
                          std::span<const double> frozen, const std::vector<TrainingSample>& samples,
                          const NoiseSchedule& sched, std::uint64_t seed, int draws_per_sample);

}  // namespace textailor
