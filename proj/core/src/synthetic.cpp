#include "textailor/synthetic.hpp"

#include <array>
#include <cmath>

#include "textailor/error.hpp"

namespace textailor {

namespace {

// Two stripe colours per prompt token, fixed so the token carries meaning.
std::array<std::array<double, 3>, 2> token_palette(int token) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(token));
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  std::array<std::array<double, 3>, 2> pal{};
  for (auto& c : pal) {
    for (double& v : c) v = u(rng);
  }
  return pal;
}

}  // namespace

TrainingSample sample_stripes(const StripeDistribution& d, std::mt19937_64& rng) {
  if (d.channels < 1 || d.height < 4 || d.width < 4 || d.min_period < 2 || d.max_period < d.min_period ||
      d.vocabulary < 1) {
    throw ConfigError("invalid stripe distribution");
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick_token(0, d.vocabulary - 1);
  std::uniform_int_distribution<int> pick_period(d.min_period, d.max_period);

  const int token = pick_token(rng);
  const int period = pick_period(rng);
  const double phase = u(rng) * period;
  const double cx = (0.4 + 0.2 * u(rng)) * d.width;
  const double cy = (0.4 + 0.2 * u(rng)) * d.height;
  const double rx = (0.25 + 0.15 * u(rng)) * d.width;
  const double ry = (0.25 + 0.15 * u(rng)) * d.height;
  const auto pal = token_palette(token);

  TrainingSample s;
  s.z0 = LatentGrid(d.channels, d.height, d.width, d.background);
  s.cond = make_conditioning(token, d.height, d.width);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      const double ex = (x + 0.5 - cx) / rx;
      const double ey = (y + 0.5 - cy) / ry;
      const double r2 = ex * ex + ey * ey;
      if (r2 >= 1.0) continue;
      s.cond.depth[static_cast<std::size_t>(y) * d.width + x] = 0.3 + 0.7 * std::sqrt(1.0 - r2);
      const int band = static_cast<int>(std::floor((y + phase) / period * 2.0)) & 1;
      for (int c = 0; c < d.channels; ++c) s.z0.at(c, y, x) = pal[band][c % 3];
    }
  }
  return s;
}

ToyWeights pretrain_toy(const ToyArchitecture& arch, const NoiseSchedule& sched,
                        const StripeDistribution& dist, const PretrainConfig& cfg) {
  if (cfg.steps < 0 || cfg.batch < 1 || !(cfg.lr > 0.0)) throw ConfigError("invalid pretraining config");
  if (dist.channels != arch.latent_channels || dist.vocabulary > arch.vocabulary) {
    throw ConfigError("stripe distribution does not fit the toy architecture");
  }
  ToyWeights out;
  out.arch = arch;
  out.T = sched.T;
  out.params = init_toy_params(arch, cfg.seed);

  std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995ULL);
  std::uniform_int_distribution<int> pick_t(1, sched.T);
  SgdMomentum opt(out.params.size(), cfg.lr, cfg.momentum);
  std::vector<double> grad(out.params.size());
  const auto w = constant_weight();
  const double inv_b = 1.0 / cfg.batch;
  for (int step = 0; step < cfg.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      const TrainingSample s = sample_stripes(dist, rng);
      const int t = pick_t(rng);
      const LatentGrid eps = gaussian_like(s.z0, rng);
      loss += loss_final_gradient(arch, out.params, {}, s, t, eps, sched, 0.0, w, grad).fine;
    }
    if (!std::isfinite(loss)) {
      throw NonFiniteError("pretraining diverged at step " + std::to_string(step));
    }
    for (double& g : grad) g *= inv_b;
    opt.step(out.params, grad);
  }
  return out;
}

}  // namespace textailor
