#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "textailor/error.hpp"
#include "textailor/finetune.hpp"

using namespace textailor;

namespace {

ToyArchitecture small_arch() {
  ToyArchitecture a;
  a.hidden = 4;
  return a;
}

std::vector<TrainingSample> random_samples(int n, int size, std::uint64_t seed, int channels = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<TrainingSample> out;
  for (int k = 0; k < n; ++k) {
    TrainingSample s;
    s.z0 = LatentGrid(channels, size, size);
    for (auto& v : s.z0.data) v = u(rng);
    s.cond = make_conditioning(k % 4, size, size);
    for (auto& d : s.cond.depth) d = 0.5 + 0.5 * u(rng);
    out.push_back(s);
  }
  return out;
}

AnchorSet anchors_of(std::vector<TrainingSample> samples) {
  AnchorSet a;
  a.samples = std::move(samples);
  return a;
}

double mean_fine(const ToyArchitecture& arch, const std::vector<double>& p, const std::vector<TrainingSample>& samples,
                 const NoiseSchedule& sched, std::uint64_t seed, int draws) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_t(1, sched.T);
  double sum = 0;
  for (const auto& s : samples) {
    for (int d = 0; d < draws; ++d) {
      const int t = pick_t(rng);
      sum += loss_fine(arch, p, s, t, gaussian_like(s.z0, rng), sched, constant_weight());
    }
  }
  return sum / (samples.size() * draws);
}

}  // namespace

TEST(Losses, MatchNaiveImplementations) {
  const ToyArchitecture arch = small_arch();
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear);
  const auto frozen = init_toy_params(arch, 1);
  const auto params = init_toy_params(arch, 2);
  std::mt19937_64 rng(3);
  for (const auto& s : random_samples(3, 5, 4)) {
    for (int t : {1, 200, 1000}) {
      const LatentGrid eps = gaussian_like(s.z0, rng);
      const double fine = loss_fine(arch, params, s, t, eps, sched, constant_weight());
      const double pre = loss_preserve(arch, params, frozen, s, t, eps, sched, constant_weight());
      EXPECT_NEAR(fine, textailor::testing::naive_loss_fine(arch, params, s.z0, s.cond, t, eps, sched), 1e-12 * fine);
      EXPECT_NEAR(pre, textailor::testing::naive_loss_preserve(arch, params, frozen, s.z0, s.cond, t, eps, sched),
                  1e-12 * pre);
      FinetuneConfig cfg;
      EXPECT_NEAR(loss_final(arch, params, frozen, s, t, eps, sched, cfg), fine + 2.5 * pre, 1e-12 * (fine + pre));
      cfg.lambda = 0.0;
      EXPECT_EQ(loss_final(arch, params, frozen, s, t, eps, sched, cfg), fine);
    }
  }
}

TEST(Losses, Examples) {
  const ToyArchitecture arch = small_arch();
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear);
  const auto samples = random_samples(1, 4, 5);
  const auto& s = samples[0];
  std::mt19937_64 rng(6);
  const LatentGrid eps = gaussian_like(s.z0, rng);
  const auto p = init_toy_params(arch, 7);
  // Identical networks preserve perfectly.
  EXPECT_EQ(loss_preserve(arch, p, p, s, 50, eps, sched, constant_weight()), 0.0);
  // A network that outputs zero pays exactly ||eps||^2, scaled by w(t).
  const std::vector<double> zero(arch.parameter_count(), 0.0);
  double norm2 = 0;
  for (double e : eps.data) norm2 += e * e;
  EXPECT_NEAR(loss_fine(arch, zero, s, 50, eps, sched, constant_weight()), norm2, 1e-12 * norm2);
  EXPECT_NEAR(loss_fine(arch, zero, s, 50, eps, sched, [](int t) { return 0.01 * t; }), 0.5 * norm2, 1e-12 * norm2);
  EXPECT_THROW(loss_fine(arch, p, s, 0, eps, sched, constant_weight()), ConfigError);
}

TEST(Losses, PreserveIsQuadraticInParameterOffset) {
  const ToyArchitecture arch = small_arch();
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear);
  const auto samples = random_samples(1, 4, 8);
  std::mt19937_64 rng(9);
  const LatentGrid eps = gaussian_like(samples[0].z0, rng);
  const auto frozen = init_toy_params(arch, 10);
  const auto dir = init_toy_params(arch, 11);
  auto at = [&](double s) {
    std::vector<double> p = frozen;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += s * dir[i];
    return loss_preserve(arch, p, frozen, samples[0], 300, eps, sched, constant_weight());
  };
  for (double s : {1e-3, 1e-4}) EXPECT_NEAR(at(2 * s) / at(s), 4.0, 0.02);
}

TEST(Losses, GradientMatchesCentralDifferences) {
  const ToyArchitecture arch = small_arch();
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear);
  const auto samples = random_samples(1, 4, 12);
  std::mt19937_64 rng(13);
  const LatentGrid eps = gaussian_like(samples[0].z0, rng);
  const auto frozen = init_toy_params(arch, 14);
  auto p = init_toy_params(arch, 15);
  std::vector<double> grad(p.size(), 0.0);
  FinetuneConfig cfg;
  loss_final_gradient(arch, p, frozen, samples[0], 450, eps, sched, cfg.lambda, cfg.weight, grad);
  for (std::size_t i = 0; i < p.size(); i += 7) {
    const double h = 1e-5, saved = p[i];
    p[i] = saved + h;
    const double fp = loss_final(arch, p, frozen, samples[0], 450, eps, sched, cfg);
    p[i] = saved - h;
    const double fm = loss_final(arch, p, frozen, samples[0], 450, eps, sched, cfg);
    p[i] = saved;
    const double fd = (fp - fm) / (2 * h);
    EXPECT_NEAR(grad[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << i;
  }
}

TEST(Finetune, ZeroStepsLeavesParametersUntouched) {
  const ToyArchitecture arch = small_arch();
  ToyDenoiser toy(arch, init_toy_params(arch, 1), 1000);
  const auto before = toy.params();
  FinetuneConfig cfg;
  cfg.steps = 0;
  const auto result = finetune_loop(toy, anchors_of(random_samples(2, 4, 1)), make_schedule(1000, ScheduleKind::kLinear), cfg);
  EXPECT_EQ(toy.params(), before);
  EXPECT_EQ(result.frozen, before);
  EXPECT_TRUE(result.log.empty());
}

TEST(Finetune, ReducesTheLossAndIsDeterministic) {
  const ToyArchitecture arch = small_arch();
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear);
  const auto samples = random_samples(4, 6, 2);
  FinetuneConfig cfg;
  cfg.steps = 500;
  cfg.lr = 1e-4;
  ToyDenoiser a(arch, init_toy_params(arch, 3), 1000), b(arch, init_toy_params(arch, 3), 1000);
  const auto ra = finetune_loop(a, anchors_of(samples), sched, cfg);
  const auto rb = finetune_loop(b, anchors_of(samples), sched, cfg);
  EXPECT_EQ(a.params(), b.params());
  ASSERT_EQ(ra.log.size(), 500u);
  double head = 0, tail = 0;
  for (int i = 0; i < 50; ++i) {
    head += ra.log[i].fine;
    tail += ra.log[450 + i].fine;
  }
  EXPECT_LT(tail, 0.9 * head);
  for (std::size_t i = 0; i < ra.log.size(); ++i) {
    EXPECT_EQ(ra.log[i].step, static_cast<int>(i) + 1);
    EXPECT_NEAR(ra.log[i].total, ra.log[i].fine + 2.5 * ra.log[i].preserve, 1e-9 * ra.log[i].total);
  }
}

TEST(Finetune, PreservationLimitsDrift) {
  const ToyArchitecture arch = small_arch();
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear);
  const auto samples = random_samples(4, 6, 4);
  const auto init = init_toy_params(arch, 5);
  double drift[2];
  for (int k = 0; k < 2; ++k) {
    FinetuneConfig cfg;
    cfg.steps = 300;
    cfg.lr = 2e-4;
    cfg.lambda = k == 0 ? 0.0 : 2.5;
    ToyDenoiser toy(arch, init, 1000);
    finetune_loop(toy, anchors_of(samples), sched, cfg);
    drift[k] = parameter_distance(toy.params(), init);
  }
  EXPECT_LT(drift[1], drift[0]);
}

TEST(Finetune, VeryLargeLambdaPinsTheMicroNetwork) {
  ToyArchitecture arch;
  arch.latent_channels = 1;
  arch.hidden = 1;
  arch.kernel = 1;
  arch.vocabulary = 2;
  ASSERT_EQ(arch.parameter_count(), 10u);
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear);
  auto samples = random_samples(4, 4, 6, 1);
  for (auto& s : samples) s.cond.prompt_token %= 2;
  const auto init = init_toy_params(arch, 7);
  ToyDenoiser toy(arch, init, 1000);
  FinetuneConfig cfg;
  cfg.lambda = 1e4;
  cfg.lr = 1e-6;
  cfg.steps = 500;
  finetune_loop(toy, anchors_of(samples), sched, cfg);
  EXPECT_LT(mean_preserve_loss(arch, toy.params(), init, samples, sched, 99, 8), 1e-6);
  const double frozen_fine = mean_fine(arch, init, samples, sched, 100, 8);
  const double tuned_fine = mean_fine(arch, toy.params(), samples, sched, 100, 8);
  EXPECT_LE(std::abs(tuned_fine - frozen_fine), 1e-3 * frozen_fine);
  EXPECT_LE(max_abs_drift(toy.params(), init), 1e-2);
}

TEST(Finetune, DivergenceRaisesNonFiniteError) {
  const ToyArchitecture arch = small_arch();
  ToyDenoiser toy(arch, init_toy_params(arch, 8), 1000);
  FinetuneConfig cfg;
  cfg.lr = 1e3;
  cfg.steps = 200;
  EXPECT_THROW(finetune_loop(toy, anchors_of(random_samples(2, 4, 9)), make_schedule(1000, ScheduleKind::kLinear), cfg),
               NonFiniteError);
}

TEST(Finetune, ConfigValidation) {
  const ToyArchitecture arch = small_arch();
  ToyDenoiser toy(arch, init_toy_params(arch, 8), 1000);
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear);
  FinetuneConfig cfg;
  cfg.lambda = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.momentum = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(finetune_loop(toy, AnchorSet{}, sched, FinetuneConfig{}), ConfigError);
  EXPECT_THROW(finetune_loop(toy, anchors_of(random_samples(1, 4, 1)), make_schedule(500, ScheduleKind::kLinear),
                             FinetuneConfig{}),
               ConfigError);
}

TEST(Finetune, TrainingCsv) {
  const auto dir = textailor::testing::scratch_dir("training_csv");
  write_training_csv(dir / "training.csv", {{1, 2.0, 0.5, 3.25}, {2, 1.5, 0.25, 2.125}});
  std::ifstream in(dir / "training.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,L_Fine,L_pre,L_Final");
  std::getline(in, line);
  EXPECT_EQ(line, "1,2,0.5,3.25");
  std::getline(in, line);
  EXPECT_EQ(line, "2,1.5,0.25,2.125");
}

TEST(Finetune, DefaultAnchorViewpoints) {
  const std::vector<Viewpoint> expected = {make_viewpoint(0, 15, 1), make_viewpoint(0, 35, 1), make_viewpoint(0, -5, 1),
                                           make_viewpoint(20, 15, 1), make_viewpoint(340, 15, 1)};
  EXPECT_EQ(AnchorSet::default_viewpoints(), expected);
  const FinetuneConfig cfg;
  EXPECT_EQ(cfg.lambda, 2.5);
}
