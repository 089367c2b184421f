#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "textailor/denoiser.hpp"
#include "textailor/latent.hpp"

namespace textailor {

/// Three same-padded convolutions with SiLU between them. Inputs are the
/// latent channels, the depth map and a constant t/T plane; the prompt token
/// adds a learned bias to the first hidden layer.
struct ToyArchitecture {
  int latent_channels = 3;
  int hidden = 32;
  int kernel = 3;
  int vocabulary = 16;

  int input_channels() const { return latent_channels + 2; }
  std::size_t parameter_count() const;

  bool operator==(const ToyArchitecture&) const = default;
};

/// Offsets of each parameter block inside the flat vector.
struct ToyLayout {
  std::size_t w1, b1, w2, b2, w3, b3, token, total;
};
ToyLayout toy_layout(const ToyArchitecture& arch);

/// Activations kept by the forward pass for toy_backward.
struct ToyActivations {
  int height = 0;
  int width = 0;
  int token = 0;
  std::vector<double> input;   // Cin x H x W
  std::vector<double> pre1;    // hidden x H x W
  std::vector<double> act1;
  std::vector<double> pre2;
  std::vector<double> act2;
};

LatentGrid toy_forward(const ToyArchitecture& arch, std::span<const double> params,
                       const LatentGrid& z_t, int t, int T, const Conditioning& cond,
                       ToyActivations* keep = nullptr);

/// Accumulates d<upstream, f(params)>/d params into `grad` (which must have
/// parameter_count() entries).
void toy_backward(const ToyArchitecture& arch, std::span<const double> params,
                  const ToyActivations& acts, const LatentGrid& upstream,
                  std::span<double> grad);

/// Convenience: runs the forward pass and returns a fresh gradient vector.
std::vector<double> toy_backward(const ToyArchitecture& arch, std::span<const double> params,
                                 const LatentGrid& z_t, int t, int T, const Conditioning& cond,
                                 const LatentGrid& upstream);

/// Scaled-uniform initialisation, deterministic in `seed`.
std::vector<double> init_toy_params(const ToyArchitecture& arch, std::uint64_t seed);

class ToyDenoiser final : public Denoiser {
 public:
  ToyDenoiser(ToyArchitecture arch, std::vector<double> params, int T);

  LatentGrid predict(const LatentGrid& z_t, int t, const Conditioning& cond) override;
  std::string name() const override { return "toy"; }

  const ToyArchitecture& architecture() const { return arch_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }
  int total_steps() const { return T_; }

 private:
  ToyArchitecture arch_;
  std::vector<double> params_;
  int T_;
};

struct ToyWeights {
  ToyArchitecture arch;
  int T = 1000;
  std::vector<double> params;
};

void save_toy_weights(const std::filesystem::path& path, const ToyWeights& weights);
ToyWeights load_toy_weights(const std::filesystem::path& path);

}  // namespace textailor
