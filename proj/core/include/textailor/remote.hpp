#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "textailor/denoiser.hpp"

namespace textailor {

struct RetryPolicy {
  int retries = 3;
  std::chrono::milliseconds initial_backoff{100};
  double backoff_factor = 2.0;
};

struct Endpoint {
  std::string host;
  int port = 80;

  /// Accepts "http://host:port", "host:port" or "host".
  static Endpoint parse(const std::string& url);
  std::string to_string() const;
};

/// Noise prediction served over HTTP. Connection failures and 5xx replies are
/// retried with exponential backoff; protocol and shape errors are not.
class RemoteDenoiser final : public Denoiser {
 public:
  explicit RemoteDenoiser(Endpoint endpoint, RetryPolicy retry = {},
                          std::optional<double> guidance = std::nullopt,
                          std::chrono::seconds timeout = std::chrono::seconds(60));

  LatentGrid predict(const LatentGrid& z_t, int t, const Conditioning& cond) override;
  std::string name() const override { return "remote"; }

  /// Queries /v1/health; throws VersionMismatchError on a schema mismatch.
  std::string health();

  int attempts_last_call() const { return attempts_; }

 private:
  std::string post(const std::string& path, const std::string& body);

  Endpoint endpoint_;
  RetryPolicy retry_;
  std::optional<double> guidance_;
  std::chrono::seconds timeout_;
  int attempts_ = 0;
};

LatentGrid remote_predict(const Endpoint& endpoint, const LatentGrid& z_t, int t,
                          const Conditioning& cond, const RetryPolicy& retry = {});

}  // namespace textailor
