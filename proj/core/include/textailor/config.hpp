#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textailor/camera.hpp"
#include "textailor/consistency.hpp"
#include "textailor/finetune.hpp"
#include "textailor/mesh.hpp"
#include "textailor/regions.hpp"
#include "textailor/remote.hpp"
#include "textailor/sampler.hpp"
#include "textailor/schedule.hpp"
#include "textailor/synthetic.hpp"
#include "textailor/toy_network.hpp"
#include "textailor/viewsched.hpp"

namespace textailor {

inline constexpr std::string_view kRunConfigSchema = "textailor-run/1";
inline constexpr std::string_view kVersion = "0.1.0";

enum class BackendKind { kAnalytic, kToy, kRemote };

BackendKind parse_backend(const std::string& name);
const char* backend_name(BackendKind kind);

struct AnalyticBackendConfig {
  std::array<double, 3> color{0.2, 0.8, 0.2};  // RGB in [0,1]
  double sigma0 = 0.002;
};

struct ToyBackendConfig {
  /// Loaded when the file exists; otherwise the network is pretrained on the
  /// stripe distribution and written here (or into the output directory).
  std::filesystem::path weights;
  ToyArchitecture arch;
  PretrainConfig pretrain;
};

struct RemoteBackendConfig {
  std::string endpoint;
  std::optional<double> guidance;
  RetryPolicy retry;
};

struct RunConfig {
  std::filesystem::path mesh;
  std::string prompt = "a object";
  BackendKind backend = BackendKind::kAnalytic;
  AnalyticBackendConfig analytic;
  ToyBackendConfig toy;
  RemoteBackendConfig remote;

  ResampleConfig resample;
  FinetuneConfig finetune;
  bool finetune_enabled = true;

  /// Anchor views come first and are painted without a coverage check; the
  /// scheduler then walks `views`.
  std::vector<Viewpoint> anchors = AnchorSet::default_viewpoints();
  std::vector<Viewpoint> views;
  double beta = 0.5;
  double gamma = 0.5;
  int max_insert_depth = 3;

  ScheduleKind schedule_kind = ScheduleKind::kLinear;
  int T = 1000;

  Resolution image{64, 64};
  double fov_deg = kDefaultFovDeg;
  int atlas_size = 256;
  RegionParams regions;
  ConsistencyParams consistency;
  double mesh_fit_radius = kDefaultFitRadius;

  std::uint64_t seed = 0;
  std::filesystem::path out = "textailor_out";
  bool write_views = true;

  SchedulerConfig scheduler_config() const;
  void validate() const;
};

/// Ring at 60..300 degrees (elevation 15) followed by a top and a bottom view.
std::vector<Viewpoint> default_sequence_views();

RunConfig default_run_config();

/// Overlays a JSON document on `base`. Unknown keys are rejected.
RunConfig parse_run_config(std::string_view json_text, RunConfig base = default_run_config());
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = default_run_config());

/// Full JSON echo (schema textailor-run/1) that parse_run_config accepts.
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace textailor
