#include "textailor/toy_network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "textailor/error.hpp"
#include "textailor/wire.hpp"

namespace textailor {

ToyLayout toy_layout(const ToyArchitecture& a) {
  const std::size_t k2 = static_cast<std::size_t>(a.kernel) * a.kernel;
  ToyLayout l{};
  l.w1 = 0;
  l.b1 = l.w1 + static_cast<std::size_t>(a.hidden) * a.input_channels() * k2;
  l.w2 = l.b1 + static_cast<std::size_t>(a.hidden);
  l.b2 = l.w2 + static_cast<std::size_t>(a.hidden) * a.hidden * k2;
  l.w3 = l.b2 + static_cast<std::size_t>(a.hidden);
  l.b3 = l.w3 + static_cast<std::size_t>(a.latent_channels) * a.hidden * k2;
  l.token = l.b3 + static_cast<std::size_t>(a.latent_channels);
  l.total = l.token + static_cast<std::size_t>(a.vocabulary) * a.hidden;
  return l;
}

std::size_t ToyArchitecture::parameter_count() const { return toy_layout(*this).total; }

namespace {

void check_arch(const ToyArchitecture& a) {
  if (a.latent_channels < 1 || a.hidden < 1 || a.vocabulary < 1 || a.kernel < 1 || a.kernel % 2 == 0) {
    throw ConfigError("invalid toy architecture");
  }
}

// Same-padded 2D convolution: out[o] = bias[o] + sum_i w[o,i] * in[i].
void conv_forward(const double* in, int cin, int cout, int h, int w, int k, const double* weight,
                  const double* bias, double* out) {
  const int r = k / 2;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int o = 0; o < cout; ++o) {
    double* dst = out + o * plane;
    std::fill(dst, dst + plane, bias[o]);
    for (int i = 0; i < cin; ++i) {
      const double* src = in + i * plane;
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - r;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - r;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          const double wt = weight[((static_cast<std::size_t>(o) * cin + i) * k + ky) * k + kx];
          if (wt == 0.0) continue;
          for (int y = y0; y < y1; ++y) {
            const double* s = src + static_cast<std::size_t>(y + dy) * w + dx;
            double* d = dst + static_cast<std::size_t>(y) * w;
            for (int x = x0; x < x1; ++x) d[x] += wt * s[x];
          }
        }
      }
    }
  }
}

// Accumulates weight/bias gradients and (optionally) the input gradient.
void conv_backward(const double* in, int cin, int cout, int h, int w, int k, const double* weight,
                   const double* dout, double* dweight, double* dbias, double* din) {
  const int r = k / 2;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int o = 0; o < cout; ++o) {
    const double* g = dout + o * plane;
    double sb = 0.0;
    for (std::size_t p = 0; p < plane; ++p) sb += g[p];
    dbias[o] += sb;
    for (int i = 0; i < cin; ++i) {
      const double* src = in + i * plane;
      double* dsrc = din ? din + i * plane : nullptr;
      for (int ky = 0; ky < k; ++ky) {
        const int dy = ky - r;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        for (int kx = 0; kx < k; ++kx) {
          const int dx = kx - r;
          const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
          const std::size_t widx = ((static_cast<std::size_t>(o) * cin + i) * k + ky) * k + kx;
          const double wt = weight[widx];
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* s = src + static_cast<std::size_t>(y + dy) * w + dx;
            const double* gg = g + static_cast<std::size_t>(y) * w;
            for (int x = x0; x < x1; ++x) acc += gg[x] * s[x];
            if (dsrc) {
              double* ds = dsrc + static_cast<std::size_t>(y + dy) * w + dx;
              for (int x = x0; x < x1; ++x) ds[x] += wt * gg[x];
            }
          }
          dweight[widx] += acc;
        }
      }
    }
  }
}

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }
inline double silu(double a) { return a * sigmoid(a); }
inline double silu_grad(double a) {
  const double s = sigmoid(a);
  return s * (1.0 + a * (1.0 - s));
}

}  // namespace

LatentGrid toy_forward(const ToyArchitecture& arch, std::span<const double> params,
                       const LatentGrid& z_t, int t, int T, const Conditioning& cond,
                       ToyActivations* keep) {
  check_arch(arch);
  const ToyLayout L = toy_layout(arch);
  if (params.size() != L.total) throw ShapeError("toy_forward: parameter count mismatch");
  if (z_t.channels != arch.latent_channels) throw ShapeError("toy_forward: channel mismatch");
  if (cond.height != z_t.height || cond.width != z_t.width ||
      cond.depth.size() != z_t.plane()) {
    throw ShapeError("toy_forward: depth map does not match latent");
  }
  if (cond.prompt_token < 0 || cond.prompt_token >= arch.vocabulary) {
    throw ShapeError("toy_forward: prompt token outside vocabulary");
  }
  const int h = z_t.height, w = z_t.width, C = arch.latent_channels, H = arch.hidden;
  const std::size_t plane = z_t.plane();

  ToyActivations local;
  ToyActivations& a = keep ? *keep : local;
  a.height = h;
  a.width = w;
  a.token = cond.prompt_token;
  a.input.resize(plane * arch.input_channels());
  std::copy(z_t.data.begin(), z_t.data.end(), a.input.begin());
  std::copy(cond.depth.begin(), cond.depth.end(), a.input.begin() + C * plane);
  std::fill(a.input.begin() + (C + 1) * plane, a.input.end(), static_cast<double>(t) / T);

  const double* p = params.data();
  a.pre1.resize(plane * H);
  conv_forward(a.input.data(), arch.input_channels(), H, h, w, arch.kernel, p + L.w1, p + L.b1,
               a.pre1.data());
  const double* tok = p + L.token + static_cast<std::size_t>(cond.prompt_token) * H;
  for (int o = 0; o < H; ++o) {
    for (std::size_t q = 0; q < plane; ++q) a.pre1[o * plane + q] += tok[o];
  }
  a.act1.resize(a.pre1.size());
  for (std::size_t q = 0; q < a.pre1.size(); ++q) a.act1[q] = silu(a.pre1[q]);

  a.pre2.resize(plane * H);
  conv_forward(a.act1.data(), H, H, h, w, arch.kernel, p + L.w2, p + L.b2, a.pre2.data());
  a.act2.resize(a.pre2.size());
  for (std::size_t q = 0; q < a.pre2.size(); ++q) a.act2[q] = silu(a.pre2[q]);

  LatentGrid out(C, h, w);
  conv_forward(a.act2.data(), H, C, h, w, arch.kernel, p + L.w3, p + L.b3, out.data.data());
  return out;
}

void toy_backward(const ToyArchitecture& arch, std::span<const double> params,
                  const ToyActivations& a, const LatentGrid& upstream, std::span<double> grad) {
  const ToyLayout L = toy_layout(arch);
  if (params.size() != L.total || grad.size() != L.total) {
    throw ShapeError("toy_backward: parameter count mismatch");
  }
  if (upstream.channels != arch.latent_channels || upstream.height != a.height ||
      upstream.width != a.width) {
    throw ShapeError("toy_backward: upstream gradient shape mismatch");
  }
  const int h = a.height, w = a.width, C = arch.latent_channels, H = arch.hidden;
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const double* p = params.data();
  double* g = grad.data();

  std::vector<double> d_act2(plane * H, 0.0);
  conv_backward(a.act2.data(), H, C, h, w, arch.kernel, p + L.w3, upstream.data.data(), g + L.w3,
                g + L.b3, d_act2.data());
  for (std::size_t q = 0; q < d_act2.size(); ++q) d_act2[q] *= silu_grad(a.pre2[q]);

  std::vector<double> d_act1(plane * H, 0.0);
  conv_backward(a.act1.data(), H, H, h, w, arch.kernel, p + L.w2, d_act2.data(), g + L.w2, g + L.b2,
                d_act1.data());
  for (std::size_t q = 0; q < d_act1.size(); ++q) d_act1[q] *= silu_grad(a.pre1[q]);

  double* dtok = g + L.token + static_cast<std::size_t>(a.token) * H;
  for (int o = 0; o < H; ++o) {
    double s = 0.0;
    for (std::size_t q = 0; q < plane; ++q) s += d_act1[o * plane + q];
    dtok[o] += s;
  }
  conv_backward(a.input.data(), arch.input_channels(), H, h, w, arch.kernel, p + L.w1,
                d_act1.data(), g + L.w1, g + L.b1, nullptr);
}

std::vector<double> toy_backward(const ToyArchitecture& arch, std::span<const double> params,
                                 const LatentGrid& z_t, int t, int T, const Conditioning& cond,
                                 const LatentGrid& upstream) {
  ToyActivations acts;
  toy_forward(arch, params, z_t, t, T, cond, &acts);
  std::vector<double> grad(params.size(), 0.0);
  toy_backward(arch, params, acts, upstream, grad);
  return grad;
}

std::vector<double> init_toy_params(const ToyArchitecture& arch, std::uint64_t seed) {
  check_arch(arch);
  const ToyLayout L = toy_layout(arch);
  std::vector<double> p(L.total, 0.0);
  std::mt19937_64 rng(seed);
  const auto fill = [&](std::size_t from, std::size_t to, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = from; i < to; ++i) p[i] = u(rng);
  };
  const double k2 = static_cast<double>(arch.kernel) * arch.kernel;
  const double b1 = 1.0 / std::sqrt(arch.input_channels() * k2);
  const double b2 = 1.0 / std::sqrt(arch.hidden * k2);
  fill(L.w1, L.b1, b1);
  fill(L.b1, L.w2, b1);
  fill(L.w2, L.b2, b2);
  fill(L.b2, L.w3, b2);
  fill(L.w3, L.b3, b2);
  fill(L.b3, L.token, b2);
  fill(L.token, L.total, 0.1);
  return p;
}

ToyDenoiser::ToyDenoiser(ToyArchitecture arch, std::vector<double> params, int T)
    : arch_(arch), params_(std::move(params)), T_(T) {
  check_arch(arch_);
  if (params_.size() != arch_.parameter_count()) throw ShapeError("toy denoiser: wrong parameter count");
  if (T_ < 1) throw ConfigError("toy denoiser: T must be >= 1");
}

LatentGrid ToyDenoiser::predict(const LatentGrid& z_t, int t, const Conditioning& cond) {
  return toy_forward(arch_, params_, z_t, t, T_, cond);
}

namespace {

constexpr std::string_view kToySchema = "textailor-toy/1";

std::string encode_f64(const std::vector<double>& values) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  std::vector<std::uint8_t> bytes(values.size() * sizeof(double));
  std::memcpy(bytes.data(), values.data(), bytes.size());
  return wire::base64_encode(bytes);
}

std::vector<double> decode_f64(const std::string& b64) {
  const auto bytes = wire::base64_decode(b64);
  if (bytes.size() % sizeof(double) != 0) throw Error("toy weights: truncated parameter payload");
  std::vector<double> out(bytes.size() / sizeof(double));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace

void save_toy_weights(const std::filesystem::path& path, const ToyWeights& weights) {
  nlohmann::json j;
  j["schema"] = kToySchema;
  j["arch"] = {{"latent_channels", weights.arch.latent_channels},
               {"hidden", weights.arch.hidden},
               {"kernel", weights.arch.kernel},
               {"vocabulary", weights.arch.vocabulary}};
  j["T"] = weights.T;
  j["params_f64"] = encode_f64(weights.params);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ToyWeights load_toy_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open toy weights " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("schema").get<std::string>() != kToySchema) throw Error("toy weights: unsupported schema");
    ToyWeights w;
    const auto& a = j.at("arch");
    w.arch.latent_channels = a.at("latent_channels").get<int>();
    w.arch.hidden = a.at("hidden").get<int>();
    w.arch.kernel = a.at("kernel").get<int>();
    w.arch.vocabulary = a.at("vocabulary").get<int>();
    w.T = j.at("T").get<int>();
    w.params = decode_f64(j.at("params_f64").get<std::string>());
    if (w.params.size() != w.arch.parameter_count()) throw Error("toy weights: parameter count mismatch");
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("toy weights: ") + e.what());
  }
}

}  // namespace textailor
