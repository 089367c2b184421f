#include "textailor/denoiser.hpp"

#include <cmath>

#include "textailor/error.hpp"

namespace textailor {

Conditioning make_conditioning(int prompt_token, int height, int width) {
  Conditioning c;
  c.prompt_token = prompt_token;
  c.height = height;
  c.width = width;
  c.depth.assign(static_cast<std::size_t>(height) * width, 0.0);
  return c;
}

int prompt_to_token(const std::string& prompt, int vocabulary) {
  if (vocabulary <= 0) throw ConfigError("vocabulary must be positive");
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : prompt) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return static_cast<int>(h % static_cast<std::uint64_t>(vocabulary));
}

LatentGrid analytic_predict(const LatentGrid& z_t, int t, const NoiseSchedule& sched,
                            const LatentGrid& mu, double sigma0) {
  require_same_shape(z_t, mu, "analytic_predict");
  if (t < 1 || t > sched.T) throw ConfigError("analytic_predict: t must lie in 1..T");
  const double a = sched.at(t);
  const double sa = std::sqrt(a);
  const double scale = std::sqrt(1.0 - a) / (a * sigma0 * sigma0 + 1.0 - a);
  LatentGrid eps(z_t.channels, z_t.height, z_t.width);
  for (std::size_t i = 0; i < eps.size(); ++i) eps.data[i] = scale * (z_t.data[i] - sa * mu.data[i]);
  return eps;
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(LatentGrid mu, double sigma0, NoiseSchedule sched)
    : mu_(std::move(mu)), sigma0_(sigma0), sched_(std::move(sched)) {
  if (!(sigma0_ > 0.0)) throw ConfigError("analytic denoiser needs sigma0 > 0");
}

LatentGrid AnalyticGaussianDenoiser::predict(const LatentGrid& z_t, int t, const Conditioning&) {
  return analytic_predict(z_t, t, sched_, mu_, sigma0_);
}

}  // namespace textailor
