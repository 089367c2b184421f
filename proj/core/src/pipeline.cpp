#include "textailor/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "textailor/consistency.hpp"
#include "textailor/error.hpp"
#include "textailor/remote.hpp"
#include "textailor/render.hpp"
#include "textailor/sampler.hpp"
#include "textailor/synthetic.hpp"
#include "textailor/wire.hpp"

namespace textailor {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

constexpr Rgb8 kGray = {128, 128, 128};

std::string describe(const Viewpoint& v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(az %.2f, el %.2f, r %.2f)", v.azimuth_deg, v.elevation_deg, v.radius);
  return buf;
}

json viewpoint_json(const Viewpoint& v) { return {v.azimuth_deg, v.elevation_deg, v.radius}; }

json counts_json(const RegionCounts& c) {
  return {{"keep", c.keep}, {"new", c.fresh}, {"update", c.update}, {"ignore", c.ignore},
          {"background", c.background}};
}

}  // namespace

std::uint64_t view_seed(std::uint64_t run_seed, std::size_t view_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                    static_cast<std::uint32_t>(view_index), 0x7e57a11u};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Backend make_backend(const RunConfig& cfg, const NoiseSchedule& sched,
                     const std::filesystem::path& weights_cache) {
  const int lh = cfg.image.height / cfg.regions.latent_factor;
  const int lw = cfg.image.width / cfg.regions.latent_factor;
  Backend b;
  switch (cfg.backend) {
    case BackendKind::kAnalytic: {
      LatentGrid mu(3, lh, lw);
      for (int c = 0; c < 3; ++c) {
        const double v = 2.0 * cfg.analytic.color[c] - 1.0;
        std::fill(mu.data.begin() + c * mu.plane(), mu.data.begin() + (c + 1) * mu.plane(), v);
      }
      b.denoiser = std::make_unique<AnalyticGaussianDenoiser>(std::move(mu), cfg.analytic.sigma0, sched);
      break;
    }
    case BackendKind::kToy: {
      const auto path = cfg.toy.weights.empty() ? weights_cache : cfg.toy.weights;
      ToyWeights w;
      if (!cfg.toy.weights.empty() && std::filesystem::exists(cfg.toy.weights)) {
        w = load_toy_weights(cfg.toy.weights);
        if (w.T != sched.T) {
          throw ConfigError("toy weights were trained with T=" + std::to_string(w.T) + ", run uses T=" +
                            std::to_string(sched.T));
        }
      } else {
        StripeDistribution dist;
        dist.height = lh;
        dist.width = lw;
        dist.vocabulary = cfg.toy.arch.vocabulary;
        spdlog::info("pretraining toy denoiser ({} steps) on the stripe distribution", cfg.toy.pretrain.steps);
        w = pretrain_toy(cfg.toy.arch, sched, dist, cfg.toy.pretrain);
        if (!path.empty()) {
          if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
          save_toy_weights(path, w);
        }
      }
      auto toy = std::make_unique<ToyDenoiser>(w.arch, std::move(w.params), w.T);
      b.toy = toy.get();
      b.denoiser = std::move(toy);
      b.weights_source = path;
      break;
    }
    case BackendKind::kRemote: {
      auto remote = std::make_unique<RemoteDenoiser>(Endpoint::parse(cfg.remote.endpoint), cfg.remote.retry,
                                                     cfg.remote.guidance);
      spdlog::info("remote backend model: {}", remote->health());
      b.denoiser = std::move(remote);
      break;
    }
  }
  return b;
}

Conditioning depth_conditioning(const RasterBuffers& buf, int factor, int prompt_token,
                                const std::string& prompt) {
  if (factor < 1 || buf.width % factor != 0 || buf.height % factor != 0) {
    throw ShapeError("depth_conditioning: resolution not divisible by the latent factor");
  }
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -dmin;
  for (std::size_t i = 0; i < buf.depth.size(); ++i) {
    if (!buf.foreground(i)) continue;
    dmin = std::min(dmin, buf.depth[i]);
    dmax = std::max(dmax, buf.depth[i]);
  }
  Conditioning c = make_conditioning(prompt_token, buf.height / factor, buf.width / factor);
  c.prompt = prompt;
  const double span = dmax - dmin;
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < buf.height; ++y) {
    for (int x = 0; x < buf.width; ++x) {
      const std::size_t i = buf.index(x, y);
      if (!buf.foreground(i)) continue;
      const double near = span > 0.0 ? (dmax - buf.depth[i]) / span : 1.0;
      c.depth[static_cast<std::size_t>(y / factor) * c.width + x / factor] += (0.2 + 0.8 * near) * inv;
    }
  }
  return c;
}

ViewPainter::ViewPainter(const Mesh& mesh, const RunConfig& cfg, const NoiseSchedule& sched)
    : mesh_(mesh),
      cfg_(cfg),
      sched_(sched),
      map_(build_texel_map(mesh, cfg.atlas_size)),
      prompt_token_(prompt_to_token(cfg.prompt, cfg.toy.arch.vocabulary)) {}

Camera ViewPainter::camera(const Viewpoint& v) const { return viewpoint_to_camera(v, cfg_.image, cfg_.fov_deg); }

RegionCounts ViewPainter::probe(const Viewpoint& v, const TextureAtlas& atlas) const {
  const Camera cam = camera(v);
  return classify_regions(mesh_, rasterize(mesh_, cam), atlas, cam, cfg_.regions).counts();
}

PaintedView ViewPainter::paint(const Viewpoint& v, Denoiser& denoiser, TextureAtlas& atlas,
                               std::uint64_t seed) const {
  PaintedView pv;
  pv.camera = camera(v);
  pv.buffers = rasterize(mesh_, pv.camera);
  if (pv.buffers.foreground_count() == 0) {
    throw PipelineError("view " + describe(v) + " does not see the mesh");
  }
  pv.masks = classify_regions(mesh_, pv.buffers, atlas, pv.camera, cfg_.regions);
  pv.cond = depth_conditioning(pv.buffers, cfg_.regions.latent_factor, prompt_token_, cfg_.prompt);
  pv.known = render_textured(mesh_, atlas, pv.camera, pv.buffers, kGray);

  const int f = cfg_.regions.latent_factor;
  const LatentGrid z0_known = encode_image(pv.known, f);
  pv.z0 = resample_loop(denoiser, z0_known, pv.masks.latent_mask, pv.cond, sched_, cfg_.resample, seed);
  if (!pv.z0.all_finite()) throw NonFiniteError("view " + describe(v) + ": sampler produced non-finite latents");

  const Image decoded = decode_latent(pv.z0, f);
  pv.generated = pv.known;
  const int lw = pv.masks.latent_width();
  for (int y = 0; y < pv.generated.height; ++y) {
    for (int x = 0; x < pv.generated.width; ++x) {
      if (pv.masks.latent_mask[static_cast<std::size_t>(y / f) * lw + x / f]) {
        pv.generated.at(x, y) = decoded.at(x, y);
      }
    }
  }
  pv.written = project(pv.generated, mesh_, pv.buffers, pv.masks, pv.camera, map_, atlas);
  return pv;
}

RegionMasks ViewPainter::paint_constant(const Viewpoint& v, Rgb8 color, TextureAtlas& atlas) const {
  const Camera cam = camera(v);
  const RasterBuffers buf = rasterize(mesh_, cam);
  RegionMasks masks = classify_regions(mesh_, buf, atlas, cam, cfg_.regions);
  project(Image(buf.width, buf.height, color), mesh_, buf, masks, cam, map_, atlas);
  return masks;
}

std::string report_to_json(const RunReport& r, bool include_timing) {
  json j;
  j["schema"] = kReportSchema;
  j["versions"] = {{"textailor", kVersion}, {"config_schema", kRunConfigSchema},
                   {"wire_schema", wire::kSchema}};
  j["config"] = json::parse(r.config_json);
  j["backend"] = r.backend;
  j["phases"] = {"anchors", "finetune", "sequence"};
  json ft = {{"enabled", r.finetune.enabled},
             {"applied", r.finetune.applied},
             {"schedule", "once-after-anchors"},
             {"note", r.finetune.note},
             {"steps", r.finetune.steps},
             {"initial_loss", r.finetune.initial_total},
             {"final_loss", r.finetune.final_total},
             {"parameter_distance", r.finetune.parameter_distance}};
  if (include_timing) ft["timing_ms"] = r.finetune.timing_ms;
  j["finetune"] = ft;
  json views = json::array();
  for (const auto& v : r.views) {
    json e = {{"index", v.index},
              {"viewpoint", viewpoint_json(v.scheduled.view)},
              {"inserted", v.scheduled.inserted},
              {"predefined_index", v.scheduled.predefined_index},
              {"locked", v.scheduled.locked},
              {"depth_limited", v.scheduled.depth_limited},
              {"p", v.scheduled.p},
              {"regions", counts_json(v.regions)},
              {"texels_written", {{"new", v.written.written_new}, {"update", v.written.written_update}}},
              {"image", v.image_file}};
    if (include_timing) e["timing_ms"] = v.timing_ms;
    views.push_back(std::move(e));
  }
  j["views"] = std::move(views);
  j["coverage"] = {{"painted_texel_fraction", r.coverage.painted_texel_fraction},
                   {"painted_area_fraction", r.coverage.painted_area_fraction},
                   {"referenced_texels", r.referenced_texels},
                   {"uncovered_faces", r.uncovered_faces}};
  j["consistency"] = r.consistency;
  if (include_timing) j["timing_ms"] = r.timing_ms;
  return j.dump(2);
}

void export_textured_obj(const std::filesystem::path& source, const std::filesystem::path& dest,
                         const std::string& mtl_file) {
  std::ifstream in(source);
  if (!in) throw Error("cannot open " + source.string());
  std::ofstream out(dest);
  if (!out) throw Error("cannot write " + dest.string());
  out << "mtllib " << mtl_file << "\nusemtl textured\n";
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t");
    if (start != std::string::npos &&
        (line.compare(start, 6, "mtllib") == 0 || line.compare(start, 6, "usemtl") == 0)) {
      continue;
    }
    out << line << '\n';
  }
}

void save_anchors(const std::filesystem::path& path, const StoredAnchors& a) {
  json j;
  j["schema"] = kAnchorSchema;
  j["prompt"] = a.prompt;
  j["T"] = a.T;
  json samples = json::array();
  for (std::size_t i = 0; i < a.anchors.samples.size(); ++i) {
    const auto& s = a.anchors.samples[i];
    json e = {{"shape", {s.z0.channels, s.z0.height, s.z0.width}},
              {"z0", s.z0.data},
              {"depth", s.cond.depth},
              {"prompt_token", s.cond.prompt_token}};
    if (i < a.anchors.viewpoints.size()) e["viewpoint"] = viewpoint_json(a.anchors.viewpoints[i]);
    samples.push_back(std::move(e));
  }
  j["samples"] = std::move(samples);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump() << '\n';
}

StoredAnchors load_anchors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open anchors " + path.string());
  StoredAnchors a;
  try {
    json j;
    in >> j;
    if (j.at("schema").get<std::string>() != kAnchorSchema) throw Error("anchors: unsupported schema");
    a.prompt = j.at("prompt").get<std::string>();
    a.T = j.at("T").get<int>();
    for (const auto& e : j.at("samples")) {
      const auto shape = e.at("shape").get<std::array<int, 3>>();
      TrainingSample s;
      s.z0 = LatentGrid(shape[0], shape[1], shape[2]);
      s.z0.data = e.at("z0").get<std::vector<double>>();
      s.cond = make_conditioning(e.at("prompt_token").get<int>(), shape[1], shape[2]);
      s.cond.prompt = a.prompt;
      s.cond.depth = e.at("depth").get<std::vector<double>>();
      if (s.z0.data.size() != s.z0.size() || s.cond.depth.size() != s.z0.plane()) {
        throw Error("anchors: tensor size does not match shape");
      }
      if (e.contains("viewpoint")) {
        const auto v = e.at("viewpoint").get<std::array<double, 3>>();
        a.anchors.viewpoints.push_back(make_viewpoint(v[0], v[1], v[2]));
      }
      a.anchors.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("anchors: ") + e.what());
  }
  return a;
}

RunResult run_texturing(const RunConfig& cfg) {
  const auto t_start = Clock::now();
  cfg.validate();
  RunResult result;
  result.mesh = load_mesh(cfg.mesh, {cfg.mesh_fit_radius, true});
  const Mesh& mesh = result.mesh;
  const NoiseSchedule sched = make_schedule(cfg.T, cfg.schedule_kind, cfg.resample.steps);

  std::filesystem::create_directories(cfg.out);
  if (cfg.write_views) std::filesystem::create_directories(cfg.out / "views");

  Backend backend = make_backend(cfg, sched, cfg.out / "toy_weights_pretrained.json");
  RunReport& report = result.report;
  report.config_json = run_config_to_json(cfg);
  report.backend = backend_name(cfg.backend);
  report.finetune.enabled = cfg.finetune_enabled;

  result.atlas = TextureAtlas(cfg.atlas_size);
  TextureAtlas& atlas = result.atlas;
  const ViewPainter painter(mesh, cfg, sched);
  ViewScheduler scheduler(cfg.scheduler_config());
  const CoverageProbe probe = [&](const Viewpoint& v) { return painter.probe(v, atlas); };

  StoredAnchors stored;
  stored.prompt = cfg.prompt;
  stored.T = cfg.T;
  bool finetune_done = false;

  const auto run_finetune = [&] {
    finetune_done = true;
    save_anchors(cfg.out / "anchors.json", stored);
    if (!cfg.finetune_enabled) {
      report.finetune.note = "disabled by configuration";
      return;
    }
    if (!backend.toy) {
      report.finetune.note = std::string("skipped: the ") + backend_name(cfg.backend) +
                             " backend has no trainable parameters";
      spdlog::info("fine-tuning {}", report.finetune.note);
      return;
    }
    const auto t0 = Clock::now();
    const FinetuneResult ft = finetune_loop(*backend.toy, stored.anchors, sched, cfg.finetune);
    report.finetune.applied = true;
    report.finetune.steps = cfg.finetune.steps;
    if (!ft.log.empty()) {
      report.finetune.initial_total = ft.log.front().total;
      report.finetune.final_total = ft.log.back().total;
    }
    report.finetune.parameter_distance = parameter_distance(backend.toy->params(), ft.frozen);
    report.finetune.timing_ms = ms_since(t0);
    write_training_csv(cfg.out / "training_log.csv", ft.log);
    save_toy_weights(cfg.out / "toy_weights_finetuned.json",
                     {backend.toy->architecture(), backend.toy->total_steps(), backend.toy->params()});
  };

  for (;;) {
    if (!finetune_done && report.views.size() == cfg.anchors.size()) run_finetune();
    const auto next = scheduler.next(probe);
    if (!next) break;
    const auto t0 = Clock::now();
    ViewRecord rec;
    rec.index = report.views.size();
    rec.scheduled = *next;
    PaintedView pv;
    try {
      pv = painter.paint(next->view, *backend.denoiser, atlas, view_seed(cfg.seed, rec.index));
    } catch (const Error& e) {
      spdlog::error("view {} {}: {}", rec.index, describe(next->view), e.what());
      throw;
    }
    rec.regions = pv.masks.counts();
    rec.written = pv.written;
    if (rec.index < cfg.anchors.size()) {
      stored.anchors.viewpoints.push_back(next->view);
      stored.anchors.samples.push_back({pv.z0, pv.cond});
    }
    if (cfg.write_views) {
      char name[64];
      std::snprintf(name, sizeof name, "views/%02zu_az%03d_el%+03d.png", rec.index,
                    static_cast<int>(std::lround(next->view.azimuth_deg)) % 360,
                    static_cast<int>(std::lround(next->view.elevation_deg)));
      rec.image_file = name;
      write_png(cfg.out / rec.image_file, pv.generated);
    }
    rec.timing_ms = ms_since(t0);
    report.views.push_back(std::move(rec));
  }
  if (!finetune_done) run_finetune();

  const TexelMap& map = painter.texel_map();
  report.coverage = coverage_stats(atlas, map);
  report.referenced_texels = map.referenced;
  report.uncovered_faces = uncovered_faces(atlas, map, mesh.face_count());
  if (report.coverage.painted_texel_fraction < 0.99) {
    std::ostringstream faces;
    for (std::size_t i = 0; i < report.uncovered_faces.size() && i < 20; ++i) {
      faces << (i ? ", " : "") << report.uncovered_faces[i];
    }
    if (report.uncovered_faces.size() > 20) faces << ", ...";
    spdlog::warn("atlas covers {:.2f}% of referenced texels; {} faces have no painted texel: [{}]",
                 100.0 * report.coverage.painted_texel_fraction, report.uncovered_faces.size(), faces.str());
  }
  report.consistency = eval_consistency(mesh, atlas, cfg.consistency);

  save_atlas(cfg.out / "atlas.png", atlas);
  write_mtl(cfg.out / "mesh.mtl", "atlas.png");
  export_textured_obj(cfg.mesh, cfg.out / "mesh.obj", "mesh.mtl");
  report.timing_ms = ms_since(t_start);
  std::ofstream(cfg.out / "report.json") << report_to_json(report) << '\n';
  return result;
}

std::vector<ScheduledView> simulate_schedule(const Mesh& mesh, const RunConfig& cfg) {
  const NoiseSchedule sched = make_schedule(cfg.T, cfg.schedule_kind, cfg.resample.steps);
  const ViewPainter painter(mesh, cfg, sched);
  TextureAtlas atlas(cfg.atlas_size);
  ViewScheduler scheduler(cfg.scheduler_config());
  const CoverageProbe probe = [&](const Viewpoint& v) { return painter.probe(v, atlas); };
  while (auto next = scheduler.next(probe)) painter.paint_constant(next->view, kGray, atlas);
  return scheduler.history();
}

}  // namespace textailor
