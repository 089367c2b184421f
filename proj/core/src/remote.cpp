#include "textailor/remote.hpp"

#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "textailor/error.hpp"
#include "textailor/wire.hpp"

namespace textailor {

Endpoint Endpoint::parse(const std::string& url) {
  std::string rest = url;
  if (rest.rfind("http://", 0) == 0) {
    rest = rest.substr(7);
  } else if (rest.find("://") != std::string::npos) {
    throw ConfigError("endpoint: only http:// is supported: " + url);
  }
  while (!rest.empty() && rest.back() == '/') rest.pop_back();
  if (rest.empty()) throw ConfigError("endpoint: empty host");
  Endpoint e;
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos) {
    e.host = rest;
    return e;
  }
  e.host = rest.substr(0, colon);
  const std::string port = rest.substr(colon + 1);
  try {
    std::size_t used = 0;
    e.port = std::stoi(port, &used);
    if (used != port.size()) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw ConfigError("endpoint: bad port '" + port + "'");
  }
  if (e.host.empty() || e.port < 1 || e.port > 65535) throw ConfigError("endpoint: bad address " + url);
  return e;
}

std::string Endpoint::to_string() const { return "http://" + host + ":" + std::to_string(port); }

RemoteDenoiser::RemoteDenoiser(Endpoint endpoint, RetryPolicy retry, std::optional<double> guidance,
                               std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)), retry_(retry), guidance_(guidance), timeout_(timeout) {
  if (retry_.retries < 0) throw ConfigError("retry count must be >= 0");
}

std::string RemoteDenoiser::post(const std::string& path, const std::string& body) {
  httplib::Client client(endpoint_.host, endpoint_.port);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  auto backoff = retry_.initial_backoff;
  attempts_ = 0;
  std::string last_error;
  for (int attempt = 0; attempt <= retry_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(backoff.count()) * retry_.backoff_factor));
    }
    ++attempts_;
    auto res = client.Post(path, body, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      spdlog::warn("{}{}: {} (attempt {})", endpoint_.to_string(), path, last_error, attempts_);
      continue;
    }
    if (res->status >= 500) {
      last_error = "server returned " + std::to_string(res->status);
      spdlog::warn("{}{}: {} (attempt {})", endpoint_.to_string(), path, last_error, attempts_);
      continue;
    }
    if (res->status != 200) {
      throw ProtocolError(endpoint_.to_string() + path + ": HTTP " + std::to_string(res->status) +
                          ": " + res->body);
    }
    return res->body;
  }
  throw ConnectionError(endpoint_.to_string() + path + ": giving up after " +
                        std::to_string(attempts_) + " attempts: " + last_error);
}

LatentGrid RemoteDenoiser::predict(const LatentGrid& z_t, int t, const Conditioning& cond) {
  const auto req = wire::make_request(z_t, t, cond, guidance_);
  const std::string body = post(std::string(wire::kDenoisePath), wire::request_body(req));
  return wire::parse_response(body, z_t.channels, z_t.height, z_t.width);
}

std::string RemoteDenoiser::health() {
  const auto h = wire::parse_health(post(std::string(wire::kHealthPath), "{}"));
  if (h.schema != wire::kSchema) {
    throw VersionMismatchError("server speaks '" + h.schema + "', expected '" +
                               std::string(wire::kSchema) + "'");
  }
  return h.model_id;
}

LatentGrid remote_predict(const Endpoint& endpoint, const LatentGrid& z_t, int t,
                          const Conditioning& cond, const RetryPolicy& retry) {
  RemoteDenoiser d(endpoint, retry);
  return d.predict(z_t, t, cond);
}

}  // namespace textailor
