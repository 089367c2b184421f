#pragma once

#include <cstdint>
#include <vector>

#include "textailor/camera.hpp"
#include "textailor/denoiser.hpp"
#include "textailor/latent.hpp"
#include "textailor/mesh.hpp"
#include "textailor/schedule.hpp"
#include "textailor/toy_network.hpp"

// Independent reference implementations used to check the library.
namespace textailor::testing {

/// Face hit by the ray through every pixel centre (Moller-Trumbore, nearest
/// hit along the optical axis, back faces and near-clipped faces skipped,
/// lower face index on an exact tie). -1 on a miss.
std::vector<std::int32_t> raycast_face_ids(const Mesh& mesh, const Camera& cam);

/// Texel-level visibility: whether the surface point `p` on face `f` is the
/// nearest front-facing hit along the ray from the camera through it.
bool point_visible(const Mesh& mesh, const Camera& cam, std::size_t f, const Vec3& p);

/// Straight-line toy network forward pass, written element by element.
std::vector<double> naive_toy_forward(const ToyArchitecture& arch, const std::vector<double>& params,
                                      const LatentGrid& z_t, int t, int T, const Conditioning& cond);

double naive_loss_fine(const ToyArchitecture& arch, const std::vector<double>& params,
                       const LatentGrid& z0, const Conditioning& cond, int t, const LatentGrid& eps,
                       const NoiseSchedule& sched);

double naive_loss_preserve(const ToyArchitecture& arch, const std::vector<double>& params,
                           const std::vector<double>& frozen, const LatentGrid& z0,
                           const Conditioning& cond, int t, const LatentGrid& eps,
                           const NoiseSchedule& sched);

/// Probability-flow ODE of the Gaussian posterior-mean predictor integrated
/// with `steps` equal RK4 steps in sigma = sqrt((1 - ab) / ab), from sigma at
/// timestep `t_start` down to 0. Returns z_0.
LatentGrid ddim_fine_oracle(const LatentGrid& z_T, int t_start, const NoiseSchedule& sched,
                            const LatentGrid& mu, double sigma0, int steps);

/// Closed-form limit of the same ODE: x - mu scales with sqrt(sigma0^2 + sigma^2).
LatentGrid ddim_closed_form(const LatentGrid& z_T, int t_start, const NoiseSchedule& sched,
                            const LatentGrid& mu, double sigma0);

/// alpha_bar_T of the linear schedule by direct product in long double.
long double linear_alpha_bar(int T, int t);

/// ||a - b|| / ||b||.
double relative_l2(const LatentGrid& a, const LatentGrid& b);

}  // namespace textailor::testing
