#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "textailor/atlas.hpp"
#include "textailor/config.hpp"
#include "textailor/denoiser.hpp"
#include "textailor/raster.hpp"
#include "textailor/regions.hpp"
#include "textailor/toy_network.hpp"
#include "textailor/viewsched.hpp"

namespace textailor {

inline constexpr std::string_view kReportSchema = "textailor-report/1";
inline constexpr std::string_view kAnchorSchema = "textailor-anchors/1";

/// The selected noise predictor. `toy` aliases `denoiser` for the toy backend.
struct Backend {
  std::unique_ptr<Denoiser> denoiser;
  ToyDenoiser* toy = nullptr;
  std::filesystem::path weights_source;
};

/// Builds the backend for `cfg`. Toy weights are loaded from cfg.toy.weights
/// when that file exists and pretrained (then saved to `weights_cache`)
/// otherwise.
Backend make_backend(const RunConfig& cfg, const NoiseSchedule& sched,
                     const std::filesystem::path& weights_cache);

/// Latent-resolution depth condition: foreground depth rescaled so the nearest
/// point is 1 and the farthest 0.2, background 0, box-averaged per cell.
Conditioning depth_conditioning(const RasterBuffers& buffers, int factor, int prompt_token,
                                const std::string& prompt);

struct PaintedView {
  Camera camera;
  RasterBuffers buffers;
  RegionMasks masks;
  Conditioning cond;
  Image known;      // render of the current atlas
  LatentGrid z0;    // sampler output
  Image generated;  // decoded latent on unknown cells, `known` elsewhere
  ProjectionStats written;
};

/// Renders, classifies, inpaints and back-projects single views.
class ViewPainter {
 public:
  ViewPainter(const Mesh& mesh, const RunConfig& cfg, const NoiseSchedule& sched);

  const TexelMap& texel_map() const { return map_; }
  Camera camera(const Viewpoint& v) const;

  /// Region counts of `v` under the current atlas.
  RegionCounts probe(const Viewpoint& v, const TextureAtlas& atlas) const;

  PaintedView paint(const Viewpoint& v, Denoiser& denoiser, TextureAtlas& atlas,
                    std::uint64_t seed) const;

  /// Projects a constant colour through the view's labels (schedule dry runs).
  RegionMasks paint_constant(const Viewpoint& v, Rgb8 color, TextureAtlas& atlas) const;

 private:
  const Mesh& mesh_;
  const RunConfig& cfg_;
  const NoiseSchedule& sched_;
  TexelMap map_;
  int prompt_token_;
};

/// Seed of the n-th painted view.
std::uint64_t view_seed(std::uint64_t run_seed, std::size_t view_index);

struct ViewRecord {
  std::size_t index = 0;
  ScheduledView scheduled;
  RegionCounts regions;
  ProjectionStats written;
  std::string image_file;
  double timing_ms = 0.0;
};

struct FinetuneSummary {
  bool enabled = false;
  bool applied = false;
  std::string note;
  int steps = 0;
  double initial_total = 0.0;
  double final_total = 0.0;
  double parameter_distance = 0.0;
  double timing_ms = 0.0;
};

struct RunReport {
  std::string config_json;
  std::string backend;
  std::vector<ViewRecord> views;
  FinetuneSummary finetune;
  CoverageStats coverage;
  std::size_t referenced_texels = 0;
  std::vector<std::size_t> uncovered_faces;
  double consistency = 0.0;
  double timing_ms = 0.0;
};

/// Every timing field is called "timing_ms" so reports can be compared with
/// those keys removed.
std::string report_to_json(const RunReport& report, bool include_timing = true);

struct RunResult {
  Mesh mesh;
  TextureAtlas atlas;
  RunReport report;
};

/// Anchor views, optional fine-tuning, then the scheduled sequence. Writes
/// atlas.png, mesh.obj, mesh.mtl, report.json and views/ into cfg.out.
RunResult run_texturing(const RunConfig& cfg);

/// Scheduler dry run: each yielded view is painted with a constant colour.
std::vector<ScheduledView> simulate_schedule(const Mesh& mesh, const RunConfig& cfg);

/// Copies the source OBJ with its material lines replaced by mtllib/usemtl.
void export_textured_obj(const std::filesystem::path& source, const std::filesystem::path& dest,
                         const std::string& mtl_file);

struct StoredAnchors {
  std::string prompt;
  int T = 0;
  AnchorSet anchors;
};

void save_anchors(const std::filesystem::path& path, const StoredAnchors& anchors);
StoredAnchors load_anchors(const std::filesystem::path& path);

}  // namespace textailor
