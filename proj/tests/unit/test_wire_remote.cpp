#include <gtest/gtest.h>

#include <atomic>
#include <cstring>
#include <functional>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "textailor/error.hpp"
#include "textailor/remote.hpp"
#include "textailor/sampler.hpp"
#include "textailor/wire.hpp"

using namespace textailor;

namespace {

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

// Local denoise server driven by a per-request handler.
class TestServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit TestServer(Handler denoise, Handler health = {}) {
    server_.Post(std::string(wire::kDenoisePath), [this, denoise](const httplib::Request& q, httplib::Response& r) {
      ++requests;
      denoise(q, r);
    });
    server_.Post(std::string(wire::kHealthPath), [health](const httplib::Request& q, httplib::Response& r) {
      if (health) {
        health(q, r);
      } else {
        r.set_content(wire::health_body("echo"), "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }
  Endpoint endpoint() const { return {"127.0.0.1", port_}; }
  std::atomic<int> requests{0};

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

RetryPolicy fast_retry(int retries) {
  RetryPolicy p;
  p.retries = retries;
  p.initial_backoff = std::chrono::milliseconds(1);
  return p;
}

// Predicts eps = 0.5 z, honouring the wire format.
void half_handler(const httplib::Request& q, httplib::Response& r) {
  const auto req = wire::parse_request(q.body);
  LatentGrid eps = req.z;
  for (auto& v : eps.data) v *= 0.5;
  r.set_content(wire::response_body(eps), "application/json");
}

}  // namespace

TEST(Base64, Rfc4648Vectors) {
  const std::pair<const char*, const char*> cases[] = {{"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},
                                                       {"foo", "Zm9v"},  {"foob", "Zm9vYg=="},  {"fooba", "Zm9vYmE="},
                                                       {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, coded] : cases) {
    EXPECT_EQ(wire::base64_encode(bytes_of(plain)), coded);
    EXPECT_EQ(wire::base64_decode(coded), bytes_of(plain));
  }
}

TEST(Base64, RejectsMalformedText) {
  for (const char* bad : {"Zg=", "Z===", "Zm9v!A==", "Zg==Zg==", "=Zg="}) {
    EXPECT_THROW(wire::base64_decode(bad), ProtocolError) << bad;
  }
}

TEST(Wire, Float32PayloadIsLittleEndianRowMajor) {
  const std::vector<double> v = {1.0, -2.5};
  const auto bytes = wire::base64_decode(wire::encode_f32(v));
  ASSERT_EQ(bytes.size(), 8u);
  const std::vector<std::uint8_t> expected = {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x20, 0xc0};
  EXPECT_EQ(bytes, expected);
  EXPECT_THROW(wire::decode_f32(wire::encode_f32(v), 3), ResponseShapeError);
}

TEST(Wire, TensorRoundTripIsBitExactInFloat32) {
  std::mt19937_64 rng(1);
  LatentGrid z(2, 16, 16);
  for (auto& v : z.data) v = static_cast<float>(std::normal_distribution<double>()(rng));
  const auto back = wire::decode_f32(wire::encode_f32(z.data), z.size());
  EXPECT_EQ(back, z.data);
}

TEST(Wire, RequestRoundTrip) {
  LatentGrid z(3, 2, 4, 0.25);
  Conditioning c = make_conditioning(7, 2, 4);
  c.depth[3] = 0.5;
  auto req = wire::make_request(z, 42, c, 7.5);
  auto back = wire::parse_request(wire::request_body(req));
  EXPECT_EQ(back.z, z);
  EXPECT_EQ(back.t, 42);
  EXPECT_EQ(back.prompt_token, 7);
  EXPECT_TRUE(back.prompt.empty());
  EXPECT_EQ(back.depth, c.depth);
  EXPECT_EQ(back.guidance, 7.5);

  c.prompt = "a wooden chair";
  const auto j = nlohmann::json::parse(wire::request_body(wire::make_request(z, 1, c)));
  EXPECT_EQ(j.at("schema"), "textailor-denoise/1");
  EXPECT_EQ(j.at("prompt"), "a wooden chair");
  EXPECT_EQ(j.at("shape"), (std::vector<int>{3, 2, 4}));
  EXPECT_FALSE(j.contains("guidance"));
}

TEST(Wire, ResponseValidation) {
  const LatentGrid eps(3, 2, 2, 0.5);
  EXPECT_EQ(wire::parse_response(wire::response_body(eps), 3, 2, 2), eps);
  EXPECT_THROW(wire::parse_response(wire::response_body(eps), 3, 4, 4), ResponseShapeError);
  EXPECT_THROW(wire::parse_response("not json", 3, 2, 2), ProtocolError);
  EXPECT_THROW(wire::parse_response("{\"shape\":[3,2,2]}", 3, 2, 2), ProtocolError);
  auto j = nlohmann::json::parse(wire::response_body(eps));
  j["schema"] = "textailor-denoise/2";
  EXPECT_THROW(wire::parse_response(j.dump(), 3, 2, 2), VersionMismatchError);
  j["schema"] = "textailor-denoise/1";
  j["eps"] = wire::encode_f32(std::vector<double>(11, 0.0));
  EXPECT_THROW(wire::parse_response(j.dump(), 3, 2, 2), ResponseShapeError);
  EXPECT_EQ(wire::parse_health(wire::health_body("m")).model_id, "m");
}

TEST(Endpoint, Parsing) {
  const Endpoint a = Endpoint::parse("http://localhost:8080/");
  EXPECT_EQ(a.host, "localhost");
  EXPECT_EQ(a.port, 8080);
  EXPECT_EQ(Endpoint::parse("example.org").port, 80);
  EXPECT_EQ(Endpoint::parse("10.0.0.1:9").to_string(), "http://10.0.0.1:9");
  EXPECT_THROW(Endpoint::parse("https://x:1"), ConfigError);
  EXPECT_THROW(Endpoint::parse("x:abc"), ConfigError);
  EXPECT_THROW(Endpoint::parse("x:70000"), ConfigError);
}

TEST(Remote, PredictsThroughTheWire) {
  TestServer server(half_handler);
  RemoteDenoiser d(server.endpoint(), fast_retry(0));
  EXPECT_EQ(d.health(), "echo");
  LatentGrid z(3, 4, 4);
  for (std::size_t i = 0; i < z.size(); ++i) z.data[i] = 0.125 * static_cast<double>(i);
  const LatentGrid eps = d.predict(z, 10, make_conditioning(0, 4, 4));
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(eps.data[i], 0.5 * z.data[i]);
}

TEST(Remote, RetriesServerErrorsThenSucceeds) {
  std::atomic<int> calls{0};
  TestServer server([&](const httplib::Request& q, httplib::Response& r) {
    if (calls++ < 2) {
      r.status = 503;
      return;
    }
    half_handler(q, r);
  });
  RemoteDenoiser d(server.endpoint(), fast_retry(3));
  d.predict(LatentGrid(3, 2, 2, 1.0), 5, make_conditioning(0, 2, 2));
  EXPECT_EQ(d.attempts_last_call(), 3);
  EXPECT_EQ(server.requests, 3);
}

TEST(Remote, GivesUpAfterRetriesOnServerErrors) {
  TestServer server([](const httplib::Request&, httplib::Response& r) { r.status = 500; });
  RemoteDenoiser d(server.endpoint(), fast_retry(2));
  EXPECT_THROW(d.predict(LatentGrid(3, 2, 2), 5, make_conditioning(0, 2, 2)), ConnectionError);
  EXPECT_EQ(server.requests, 3);
}

TEST(Remote, ProtocolFailuresAreNotRetried) {
  TestServer garbage([](const httplib::Request&, httplib::Response& r) { r.set_content("{oops", "application/json"); });
  RemoteDenoiser a(garbage.endpoint(), fast_retry(3));
  EXPECT_THROW(a.predict(LatentGrid(3, 2, 2), 5, make_conditioning(0, 2, 2)), ProtocolError);
  EXPECT_EQ(garbage.requests, 1);

  TestServer wrong_shape([](const httplib::Request&, httplib::Response& r) {
    r.set_content(wire::response_body(LatentGrid(3, 4, 4)), "application/json");
  });
  RemoteDenoiser b(wrong_shape.endpoint(), fast_retry(3));
  EXPECT_THROW(b.predict(LatentGrid(3, 2, 2), 5, make_conditioning(0, 2, 2)), ResponseShapeError);

  TestServer bad_request([](const httplib::Request&, httplib::Response& r) { r.status = 400; });
  RemoteDenoiser c(bad_request.endpoint(), fast_retry(3));
  EXPECT_THROW(c.predict(LatentGrid(3, 2, 2), 5, make_conditioning(0, 2, 2)), ProtocolError);
  EXPECT_EQ(bad_request.requests, 1);
}

TEST(Remote, SchemaMismatchOnHealth) {
  TestServer server(half_handler, [](const httplib::Request&, httplib::Response& r) {
    r.set_content(R"({"schema":"textailor-denoise/9","model_id":"x"})", "application/json");
  });
  RemoteDenoiser d(server.endpoint(), fast_retry(0));
  EXPECT_THROW(d.health(), VersionMismatchError);
}

TEST(Remote, ConnectionRefusedAfterRetries) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  RemoteDenoiser d({"127.0.0.1", port}, fast_retry(2), std::nullopt, std::chrono::seconds(2));
  EXPECT_THROW(d.predict(LatentGrid(3, 2, 2), 5, make_conditioning(0, 2, 2)), ConnectionError);
  EXPECT_EQ(d.attempts_last_call(), 3);
}

TEST(Remote, BackendsAreInterchangeableInTheSampler) {
  // A server that forwards to the analytic predictor gives the same sample up to float32 rounding.
  const NoiseSchedule sched = make_schedule(1000, ScheduleKind::kLinear, 10);
  LatentGrid mu(3, 4, 4, 0.25);
  AnalyticGaussianDenoiser local(mu, 0.5, sched);
  TestServer server([&](const httplib::Request& q, httplib::Response& r) {
    const auto req = wire::parse_request(q.body);
    r.set_content(wire::response_body(analytic_predict(req.z, req.t, sched, mu, 0.5)), "application/json");
  });
  RemoteDenoiser remote(server.endpoint(), fast_retry(0));
  std::vector<std::uint8_t> mask(16, 1);
  mask[0] = 0;
  LatentGrid known(3, 4, 4, -0.5);
  const Conditioning cond = make_conditioning(0, 4, 4);
  const LatentGrid a = resample_loop(local, known, mask, cond, sched, {1, 10}, 3);
  const LatentGrid b = resample_loop(remote, known, mask, cond, sched, {1, 10}, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data[i], b.data[i], 1e-4);
  EXPECT_EQ(server.requests, 20);
}
