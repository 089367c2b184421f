#include "textailor/finetune.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "textailor/error.hpp"

namespace textailor {

TimestepWeight constant_weight(double w) {
  return [w](int) { return w; };
}

void FinetuneConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("finetune: lambda must be >= 0");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("finetune: lr must be > 0");
  if (steps < 0) throw ConfigError("finetune: steps must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("finetune: momentum must be in [0,1)");
  if (!weight) throw ConfigError("finetune: missing timestep weight");
}

std::vector<Viewpoint> AnchorSet::default_viewpoints() {
  return {make_viewpoint(0, 15, 1), make_viewpoint(0, 35, 1), make_viewpoint(0, -5, 1),
          make_viewpoint(20, 15, 1), make_viewpoint(340, 15, 1)};
}

namespace {

void check_t(int t, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.T) throw ConfigError("timestep outside 1..T");
}

double squared_distance(const LatentGrid& a, const LatentGrid& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s;
}

LatentGrid noised(const TrainingSample& sample, int t, const LatentGrid& eps, const NoiseSchedule& sched) {
  check_t(t, sched);
  require_same_shape(sample.z0, eps, "training sample");
  return forward_noise(sample.z0, t, eps, sched);
}

}  // namespace

double loss_fine(const ToyArchitecture& arch, std::span<const double> params,
                 const TrainingSample& sample, int t, const LatentGrid& eps,
                 const NoiseSchedule& sched, const TimestepWeight& w) {
  const LatentGrid z_t = noised(sample, t, eps, sched);
  const LatentGrid out = toy_forward(arch, params, z_t, t, sched.T, sample.cond);
  return w(t) * squared_distance(out, eps);
}

double loss_preserve(const ToyArchitecture& arch, std::span<const double> params,
                     std::span<const double> frozen, const TrainingSample& sample, int t,
                     const LatentGrid& eps, const NoiseSchedule& sched, const TimestepWeight& w) {
  const LatentGrid z_t = noised(sample, t, eps, sched);
  const LatentGrid out = toy_forward(arch, params, z_t, t, sched.T, sample.cond);
  const LatentGrid ref = toy_forward(arch, frozen, z_t, t, sched.T, sample.cond);
  return w(t) * squared_distance(out, ref);
}

double loss_final(const ToyArchitecture& arch, std::span<const double> params,
                  std::span<const double> frozen, const TrainingSample& sample, int t,
                  const LatentGrid& eps, const NoiseSchedule& sched, const FinetuneConfig& cfg) {
  const double fine = loss_fine(arch, params, sample, t, eps, sched, cfg.weight);
  if (cfg.lambda == 0.0) return fine;
  return fine + cfg.lambda * loss_preserve(arch, params, frozen, sample, t, eps, sched, cfg.weight);
}

LossTerms loss_final_gradient(const ToyArchitecture& arch, std::span<const double> params,
                              std::span<const double> frozen, const TrainingSample& sample,
                              int t, const LatentGrid& eps, const NoiseSchedule& sched,
                              double lambda, const TimestepWeight& w, std::span<double> grad) {
  const LatentGrid z_t = noised(sample, t, eps, sched);
  ToyActivations acts;
  const LatentGrid out = toy_forward(arch, params, z_t, t, sched.T, sample.cond, &acts);
  const double wt = w(t);

  LossTerms terms;
  LatentGrid upstream(out.channels, out.height, out.width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = out.data[i] - eps.data[i];
    terms.fine += r * r;
    upstream.data[i] = 2.0 * wt * r;
  }
  terms.fine *= wt;
  if (lambda != 0.0) {
    const LatentGrid ref = toy_forward(arch, frozen, z_t, t, sched.T, sample.cond);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double r = out.data[i] - ref.data[i];
      terms.preserve += r * r;
      upstream.data[i] += 2.0 * wt * lambda * r;
    }
    terms.preserve *= wt;
  }
  terms.total = terms.fine + lambda * terms.preserve;
  toy_backward(arch, params, acts, upstream, grad);
  return terms;
}

SgdMomentum::SgdMomentum(std::size_t n, double lr, double momentum)
    : velocity_(n, 0.0), lr_(lr), momentum_(momentum) {}

void SgdMomentum::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != velocity_.size() || grad.size() != velocity_.size()) {
    throw ShapeError("optimizer: size mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] + grad[i];
    params[i] -= lr_ * velocity_[i];
  }
}

FinetuneResult finetune_loop(ToyDenoiser& toy, const AnchorSet& anchors, const NoiseSchedule& sched,
                             const FinetuneConfig& cfg) {
  cfg.validate();
  if (anchors.samples.empty()) throw ConfigError("finetune: anchor set is empty");
  if (toy.total_steps() != sched.T) throw ConfigError("finetune: schedule T does not match the network");

  FinetuneResult result;
  result.frozen = toy.params();
  auto& params = toy.mutable_params();
  const auto& arch = toy.architecture();
  SgdMomentum opt(params.size(), cfg.lr, cfg.momentum);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> pick_t(1, sched.T);
  std::vector<double> grad(params.size());
  const double inv_n = 1.0 / static_cast<double>(anchors.samples.size());

  for (int step = 1; step <= cfg.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    LossTerms mean;
    for (const auto& sample : anchors.samples) {
      const int t = pick_t(rng);
      const LatentGrid eps = gaussian_like(sample.z0, rng);
      const LossTerms terms = loss_final_gradient(arch, params, result.frozen, sample, t, eps, sched,
                                                  cfg.lambda, cfg.weight, grad);
      mean.fine += terms.fine * inv_n;
      mean.preserve += terms.preserve * inv_n;
      mean.total += terms.total * inv_n;
    }
    if (!std::isfinite(mean.total)) {
      throw NonFiniteError("finetune: loss became non-finite at step " + std::to_string(step) +
                           " (fine=" + std::to_string(mean.fine) +
                           ", preserve=" + std::to_string(mean.preserve) + "); lower the learning rate");
    }
    for (double& g : grad) g *= inv_n;
    result.log.push_back({step, mean.fine, mean.preserve, mean.total});
    opt.step(params, grad);
  }
  return result;
}

void write_training_csv(const std::filesystem::path& path, const std::vector<TrainingLogEntry>& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "step,L_Fine,L_pre,L_Final\n";
  for (const auto& e : log) out << e.step << ',' << e.fine << ',' << e.preserve << ',' << e.total << '\n';
}

double parameter_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("parameter_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double max_abs_drift(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("max_abs_drift: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double mean_preserve_loss(const ToyArchitecture& arch, std::span<const double> params,
                          std::span<const double> frozen, const std::vector<TrainingSample>& samples,
                          const NoiseSchedule& sched, std::uint64_t seed, int draws_per_sample) {
  if (samples.empty() || draws_per_sample < 1) throw ConfigError("mean_preserve_loss: nothing to evaluate");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_t(1, sched.T);
  const auto w = constant_weight();
  double sum = 0.0;
  for (const auto& s : samples) {
    for (int d = 0; d < draws_per_sample; ++d) {
      const int t = pick_t(rng);
      const LatentGrid eps = gaussian_like(s.z0, rng);
      sum += loss_preserve(arch, params, frozen, s, t, eps, sched, w);
    }
  }
  return sum / (static_cast<double>(samples.size()) * draws_per_sample);
}

}  // namespace textailor
