#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace textailor::testing {

namespace {

struct Hit {
  double t = 0.0;
  bool ok = false;
};

Hit intersect(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 p = d.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return {};
  const double inv = 1.0 / det;
  const Vec3 s = o - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return {};
  const Vec3 q = s.cross(e1);
  const double v = d.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return {};
  return {e2.dot(q) * inv, true};
}

bool front_and_unclipped(const Mesh& mesh, const Camera& cam, std::size_t f) {
  const auto& idx = mesh.faces[f];
  const Vec3& a = mesh.vertices[idx[0]];
  const Vec3 n = (mesh.vertices[idx[1]] - a).cross(mesh.vertices[idx[2]] - a);
  if (n.dot(cam.position - a) <= 0.0) return false;
  for (int k = 0; k < 3; ++k) {
    if (cam.depth_of(mesh.vertices[idx[k]]) < cam.near_plane) return false;
  }
  return true;
}

// Nearest hit along a ray; returns the face and its axial depth.
std::pair<std::int32_t, double> nearest(const Mesh& mesh, const Camera& cam, const Vec3& dir) {
  std::int32_t best = -1;
  double best_depth = std::numeric_limits<double>::infinity();
  const double axial = dir.dot(cam.forward);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (!front_and_unclipped(mesh, cam, f)) continue;
    const auto& idx = mesh.faces[f];
    const Hit h = intersect(cam.position, dir, mesh.vertices[idx[0]], mesh.vertices[idx[1]],
                            mesh.vertices[idx[2]]);
    if (!h.ok || h.t <= 0.0) continue;
    const double depth = h.t * axial;
    if (depth < best_depth) {
      best_depth = depth;
      best = static_cast<std::int32_t>(f);
    }
  }
  return {best, best_depth};
}

}  // namespace

std::vector<std::int32_t> raycast_face_ids(const Mesh& mesh, const Camera& cam) {
  const int W = cam.resolution.width, H = cam.resolution.height;
  std::vector<std::int32_t> out(static_cast<std::size_t>(W) * H, -1);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      out[static_cast<std::size_t>(y) * W + x] = nearest(mesh, cam, cam.ray_direction(x + 0.5, y + 0.5)).first;
    }
  }
  return out;
}

bool point_visible(const Mesh& mesh, const Camera& cam, std::size_t f, const Vec3& p) {
  if (!front_and_unclipped(mesh, cam, f)) return false;
  const Vec3 dir = (p - cam.position).normalized();
  const auto [hit, depth] = nearest(mesh, cam, dir);
  if (hit < 0) return false;
  if (static_cast<std::size_t>(hit) == f) return true;
  return depth >= cam.depth_of(p) * (1.0 - 1e-9);
}

std::vector<double> naive_toy_forward(const ToyArchitecture& arch, const std::vector<double>& p,
                                      const LatentGrid& z, int t, int T, const Conditioning& cond) {
  const int C = arch.latent_channels, Hd = arch.hidden, K = arch.kernel, R = K / 2;
  const int Cin = C + 2, h = z.height, w = z.width;
  const std::size_t nw1 = static_cast<std::size_t>(Hd) * Cin * K * K;
  const std::size_t nw2 = static_cast<std::size_t>(Hd) * Hd * K * K;
  const std::size_t nw3 = static_cast<std::size_t>(C) * Hd * K * K;
  const double* w1 = p.data();
  const double* b1 = w1 + nw1;
  const double* w2 = b1 + Hd;
  const double* b2 = w2 + nw2;
  const double* w3 = b2 + Hd;
  const double* b3 = w3 + nw3;
  const double* tok = b3 + C;

  const auto input = [&](int c, int y, int x) -> double {
    if (c < C) return z.at(c, y, x);
    if (c == C) return cond.depth[static_cast<std::size_t>(y) * w + x];
    return static_cast<double>(t) / T;
  };
  const auto silu = [](double a) { return a / (1.0 + std::exp(-a)); };

  std::vector<double> a1(static_cast<std::size_t>(Hd) * h * w), a2(a1.size());
  for (int o = 0; o < Hd; ++o) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = b1[o] + tok[static_cast<std::size_t>(cond.prompt_token) * Hd + o];
        for (int i = 0; i < Cin; ++i) {
          for (int ky = 0; ky < K; ++ky) {
            for (int kx = 0; kx < K; ++kx) {
              const int yy = y + ky - R, xx = x + kx - R;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              s += w1[((static_cast<std::size_t>(o) * Cin + i) * K + ky) * K + kx] * input(i, yy, xx);
            }
          }
        }
        a1[(static_cast<std::size_t>(o) * h + y) * w + x] = silu(s);
      }
    }
  }
  for (int o = 0; o < Hd; ++o) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = b2[o];
        for (int i = 0; i < Hd; ++i) {
          for (int ky = 0; ky < K; ++ky) {
            for (int kx = 0; kx < K; ++kx) {
              const int yy = y + ky - R, xx = x + kx - R;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              s += w2[((static_cast<std::size_t>(o) * Hd + i) * K + ky) * K + kx] *
                   a1[(static_cast<std::size_t>(i) * h + yy) * w + xx];
            }
          }
        }
        a2[(static_cast<std::size_t>(o) * h + y) * w + x] = silu(s);
      }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(C) * h * w);
  for (int o = 0; o < C; ++o) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = b3[o];
        for (int i = 0; i < Hd; ++i) {
          for (int ky = 0; ky < K; ++ky) {
            for (int kx = 0; kx < K; ++kx) {
              const int yy = y + ky - R, xx = x + kx - R;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              s += w3[((static_cast<std::size_t>(o) * Hd + i) * K + ky) * K + kx] *
                   a2[(static_cast<std::size_t>(i) * h + yy) * w + xx];
            }
          }
        }
        out[(static_cast<std::size_t>(o) * h + y) * w + x] = s;
      }
    }
  }
  return out;
}

namespace {

LatentGrid noised(const LatentGrid& z0, int t, const LatentGrid& eps, const NoiseSchedule& sched) {
  const double ab = sched.alpha_bar[static_cast<std::size_t>(t)];
  LatentGrid z = z0;
  for (std::size_t i = 0; i < z.size(); ++i) z.data[i] = std::sqrt(ab) * z0.data[i] + std::sqrt(1.0 - ab) * eps.data[i];
  return z;
}

}  // namespace

double naive_loss_fine(const ToyArchitecture& arch, const std::vector<double>& params,
                       const LatentGrid& z0, const Conditioning& cond, int t, const LatentGrid& eps,
                       const NoiseSchedule& sched) {
  const auto out = naive_toy_forward(arch, params, noised(z0, t, eps, sched), t, sched.T, cond);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += (out[i] - eps.data[i]) * (out[i] - eps.data[i]);
  return s;
}

double naive_loss_preserve(const ToyArchitecture& arch, const std::vector<double>& params,
                           const std::vector<double>& frozen, const LatentGrid& z0,
                           const Conditioning& cond, int t, const LatentGrid& eps,
                           const NoiseSchedule& sched) {
  const LatentGrid z_t = noised(z0, t, eps, sched);
  const auto a = naive_toy_forward(arch, params, z_t, t, sched.T, cond);
  const auto b = naive_toy_forward(arch, frozen, z_t, t, sched.T, cond);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

LatentGrid ddim_fine_oracle(const LatentGrid& z_T, int t_start, const NoiseSchedule& sched,
                            const LatentGrid& mu, double sigma0, int steps) {
  const double ab = sched.alpha_bar[static_cast<std::size_t>(t_start)];
  const double sigma_start = std::sqrt((1.0 - ab) / ab);
  LatentGrid x = z_T;
  for (auto& v : x.data) v /= std::sqrt(ab);
  // dx/dsigma = sigma (x - mu) / (sigma0^2 + sigma^2), classic RK4 per entry.
  const auto f = [&](double s, double xi, double mi) { return s * (xi - mi) / (sigma0 * sigma0 + s * s); };
  const double h = -sigma_start / steps;
  for (int k = 0; k < steps; ++k) {
    const double s = sigma_start * (1.0 - static_cast<double>(k) / steps);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x.data[i], mi = mu.data[i];
      const double k1 = f(s, xi, mi);
      const double k2 = f(s + h / 2, xi + h / 2 * k1, mi);
      const double k3 = f(s + h / 2, xi + h / 2 * k2, mi);
      const double k4 = f(s + h, xi + h * k3, mi);
      x.data[i] = xi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  return x;
}

LatentGrid ddim_closed_form(const LatentGrid& z_T, int t_start, const NoiseSchedule& sched,
                            const LatentGrid& mu, double sigma0) {
  const double ab = sched.alpha_bar[static_cast<std::size_t>(t_start)];
  const double s2 = (1.0 - ab) / ab;
  const double scale = sigma0 / std::sqrt(sigma0 * sigma0 + s2);
  LatentGrid x = z_T;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x.data[i] = mu.data[i] + (z_T.data[i] / std::sqrt(ab) - mu.data[i]) * scale;
  }
  return x;
}

long double linear_alpha_bar(int T, int t) {
  long double prod = 1.0L;
  for (int s = 1; s <= t; ++s) {
    const long double beta = T == 1 ? 1e-4L : 1e-4L + (2e-2L - 1e-4L) * (s - 1) / (T - 1);
    prod *= 1.0L - beta;
  }
  return prod;
}

double relative_l2(const LatentGrid& a, const LatentGrid& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    den += b.data[i] * b.data[i];
  }
  return std::sqrt(num / den);
}

}  // namespace textailor::testing
