#pragma once

#include <memory>
#include <string>
#include <vector>

#include "textailor/latent.hpp"
#include "textailor/schedule.hpp"

namespace textailor {

/// What the noise predictor is conditioned on: an opaque prompt token (and
/// the raw prompt for remote backends) plus a latent-resolution depth map in
/// [0,1] with background at 0.
struct Conditioning {
  int prompt_token = 0;
  std::string prompt;
  int height = 0;
  int width = 0;
  std::vector<double> depth;
};

Conditioning make_conditioning(int prompt_token, int height, int width);

/// FNV-1a of the prompt folded onto `vocabulary` tokens.
int prompt_to_token(const std::string& prompt, int vocabulary);

/// Noise predictor eps(z_t, t, c). Instances are used from one thread at a time.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual LatentGrid predict(const LatentGrid& z_t, int t, const Conditioning& cond) = 0;
  virtual std::string name() const = 0;
};

/// Exact posterior-mean noise predictor for isotropic Gaussian data N(mu, sigma0^2 I).
LatentGrid analytic_predict(const LatentGrid& z_t, int t, const NoiseSchedule& sched,
                            const LatentGrid& mu, double sigma0);

class AnalyticGaussianDenoiser final : public Denoiser {
 public:
  AnalyticGaussianDenoiser(LatentGrid mu, double sigma0, NoiseSchedule sched);

  LatentGrid predict(const LatentGrid& z_t, int t, const Conditioning& cond) override;
  std::string name() const override { return "analytic"; }

  const LatentGrid& mu() const { return mu_; }
  double sigma0() const { return sigma0_; }

 private:
  LatentGrid mu_;
  double sigma0_;
  NoiseSchedule sched_;
};

}  // namespace textailor
