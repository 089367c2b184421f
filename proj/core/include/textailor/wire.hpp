#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textailor/denoiser.hpp"
#include "textailor/latent.hpp"

// Denoise wire protocol shared with the inference bridge. Tensors travel as
// base64 of row-major float32 little-endian.
namespace textailor::wire {

inline constexpr std::string_view kSchema = "textailor-denoise/1";
inline constexpr std::string_view kDenoisePath = "/v1/denoise";
inline constexpr std::string_view kHealthPath = "/v1/health";

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ProtocolError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string encode_f32(std::span<const double> values);
std::vector<double> decode_f32(std::string_view b64, std::size_t expected_count);

struct DenoiseRequest {
  LatentGrid z;
  int t = 0;
  std::string prompt;             // sent as a string when non-empty
  int prompt_token = 0;           // otherwise sent as an integer token
  int height = 0;
  int width = 0;
  std::vector<double> depth;
  std::optional<double> guidance;
};

DenoiseRequest make_request(const LatentGrid& z_t, int t, const Conditioning& cond,
                            std::optional<double> guidance = std::nullopt);

std::string request_body(const DenoiseRequest& req);
DenoiseRequest parse_request(std::string_view body);

std::string response_body(const LatentGrid& eps);

/// Decodes a denoise response and checks it against the requested shape.
/// ProtocolError on malformed JSON, ResponseShapeError on shape mismatch.
LatentGrid parse_response(std::string_view body, int channels, int height, int width);

struct Health {
  std::string schema;
  std::string model_id;
};

Health parse_health(std::string_view body);
std::string health_body(const std::string& model_id);

}  // namespace textailor::wire
