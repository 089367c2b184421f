#include "textailor/wire.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "textailor/error.hpp"

namespace textailor::wire {

namespace {

using nlohmann::json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<int, 256> make_reverse() {
  std::array<int, 256> r{};
  for (auto& v : r) v = -1;
  for (int i = 0; i < 64; ++i) r[static_cast<unsigned char>(kAlphabet[i])] = i;
  return r;
}
constexpr auto kReverse = make_reverse();

json parse_json(std::string_view body, const char* what) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ProtocolError(std::string(what) + ": body is not a JSON object");
  }
  return j;
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(std::string(what) + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

void check_schema(const json& j, const char* what) {
  const auto schema = field<std::string>(j, "schema", what);
  if (schema != kSchema) {
    throw VersionMismatchError(std::string(what) + ": schema '" + schema + "', expected '" +
                               std::string(kSchema) + "'");
  }
}

std::array<int, 3> parse_shape(const json& j, const char* what) {
  const auto shape = field<std::vector<long long>>(j, "shape", what);
  if (shape.size() != 3) throw ProtocolError(std::string(what) + ": shape must have 3 entries");
  std::array<int, 3> out{};
  for (int i = 0; i < 3; ++i) {
    if (shape[i] < 1 || shape[i] > (1 << 16)) throw ProtocolError(std::string(what) + ": bad shape entry");
    out[i] = static_cast<int>(shape[i]);
  }
  return out;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64: length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2) throw ProtocolError("base64: misplaced padding");
        v[k] = 0;
        ++pad;
      } else {
        if (pad > 0) throw ProtocolError("base64: data after padding");
        v[k] = kReverse[static_cast<unsigned char>(c)];
        if (v[k] < 0) throw ProtocolError("base64: invalid character");
      }
    }
    const std::uint32_t n = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(n));
  }
  return out;
}

std::string encode_f32(std::span<const double> values) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = static_cast<float>(values[i]);
    std::memcpy(bytes.data() + 4 * i, &f, 4);
  }
  return base64_encode(bytes);
}

std::vector<double> decode_f32(std::string_view b64, std::size_t expected_count) {
  const auto bytes = base64_decode(b64);
  if (bytes.size() != expected_count * 4) {
    throw ResponseShapeError("tensor payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                             std::to_string(expected_count * 4));
  }
  std::vector<double> out(expected_count);
  for (std::size_t i = 0; i < expected_count; ++i) {
    float f;
    std::memcpy(&f, bytes.data() + 4 * i, 4);
    out[i] = f;
  }
  return out;
}

DenoiseRequest make_request(const LatentGrid& z_t, int t, const Conditioning& cond,
                            std::optional<double> guidance) {
  if (cond.height != z_t.height || cond.width != z_t.width || cond.depth.size() != z_t.plane()) {
    throw ShapeError("denoise request: depth map does not match latent");
  }
  DenoiseRequest r;
  r.z = z_t;
  r.t = t;
  r.prompt = cond.prompt;
  r.prompt_token = cond.prompt_token;
  r.height = cond.height;
  r.width = cond.width;
  r.depth = cond.depth;
  r.guidance = guidance;
  return r;
}

std::string request_body(const DenoiseRequest& req) {
  json j;
  j["schema"] = kSchema;
  j["z"] = encode_f32(req.z.data);
  j["shape"] = {req.z.channels, req.z.height, req.z.width};
  j["t"] = req.t;
  if (req.prompt.empty()) {
    j["prompt"] = req.prompt_token;
  } else {
    j["prompt"] = req.prompt;
  }
  j["depth"] = encode_f32(req.depth);
  if (req.guidance) j["guidance"] = *req.guidance;
  return j.dump();
}

DenoiseRequest parse_request(std::string_view body) {
  const json j = parse_json(body, "denoise request");
  check_schema(j, "denoise request");
  const auto shape = parse_shape(j, "denoise request");
  DenoiseRequest r;
  r.z = LatentGrid(shape[0], shape[1], shape[2]);
  try {
    r.z.data = decode_f32(field<std::string>(j, "z", "denoise request"), r.z.size());
    r.height = shape[1];
    r.width = shape[2];
    r.depth = decode_f32(field<std::string>(j, "depth", "denoise request"), r.z.plane());
  } catch (const ResponseShapeError& e) {
    throw ProtocolError(std::string("denoise request: ") + e.what());
  }
  r.t = field<int>(j, "t", "denoise request");
  auto p = j.find("prompt");
  if (p == j.end()) throw ProtocolError("denoise request: missing field 'prompt'");
  if (p->is_string()) {
    r.prompt = p->get<std::string>();
  } else if (p->is_number_integer()) {
    r.prompt_token = p->get<int>();
  } else {
    throw ProtocolError("denoise request: prompt must be a string or an integer token");
  }
  if (auto g = j.find("guidance"); g != j.end() && !g->is_null()) {
    if (!g->is_number()) throw ProtocolError("denoise request: guidance must be a number");
    r.guidance = g->get<double>();
  }
  return r;
}

std::string response_body(const LatentGrid& eps) {
  json j;
  j["schema"] = kSchema;
  j["eps"] = encode_f32(eps.data);
  j["shape"] = {eps.channels, eps.height, eps.width};
  return j.dump();
}

LatentGrid parse_response(std::string_view body, int channels, int height, int width) {
  const json j = parse_json(body, "denoise response");
  if (j.contains("schema")) check_schema(j, "denoise response");
  const auto shape = parse_shape(j, "denoise response");
  if (shape[0] != channels || shape[1] != height || shape[2] != width) {
    throw ResponseShapeError("denoise response: shape [" + std::to_string(shape[0]) + "," +
                             std::to_string(shape[1]) + "," + std::to_string(shape[2]) +
                             "] does not match request [" + std::to_string(channels) + "," +
                             std::to_string(height) + "," + std::to_string(width) + "]");
  }
  LatentGrid out(channels, height, width);
  out.data = decode_f32(field<std::string>(j, "eps", "denoise response"), out.size());
  for (double v : out.data) {
    if (!std::isfinite(v)) throw ProtocolError("denoise response: non-finite eps value");
  }
  return out;
}

Health parse_health(std::string_view body) {
  const json j = parse_json(body, "health");
  Health h;
  h.schema = field<std::string>(j, "schema", "health");
  h.model_id = field<std::string>(j, "model_id", "health");
  return h;
}

std::string health_body(const std::string& model_id) {
  return json{{"schema", kSchema}, {"model_id", model_id}}.dump();
}

}  // namespace textailor::wire
