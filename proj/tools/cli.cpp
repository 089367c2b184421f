#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "textailor/atlas.hpp"
#include "textailor/config.hpp"
#include "textailor/consistency.hpp"
#include "textailor/error.hpp"
#include "textailor/finetune.hpp"
#include "textailor/pipeline.hpp"
#include "textailor/primitives.hpp"
#include "textailor/render.hpp"
#include "textailor/synthetic.hpp"

namespace textailor::cli {

namespace {

// Options shared by the commands that build a RunConfig.
struct CommonOptions {
  std::string config;
  std::string mesh;
  std::string prompt;
  std::string backend;
  std::string endpoint;
  std::string out;
  std::string weights;
  std::uint64_t seed = 0;
  int resample = 0;
  int steps = 0;
  int finetune_steps = 0;
  double lambda = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  bool no_finetune = false;

  std::map<std::string, CLI::Option*> opts;

  void add_to(CLI::App* app) {
    opts["config"] = app->add_option("--config", config, "JSON run config (schema textailor-run/1)");
    opts["mesh"] = app->add_option("--mesh", mesh, "Wavefront OBJ with UVs");
    opts["prompt"] = app->add_option("--prompt", prompt, "Text prompt");
    opts["backend"] = app->add_option("--backend", backend, "analytic | toy | remote")
                          ->check(CLI::IsMember({"analytic", "toy", "remote"}));
    opts["endpoint"] = app->add_option("--endpoint", endpoint, "Remote backend URL (http://host:port)");
    opts["seed"] = app->add_option("--seed", seed, "Run seed");
    opts["out"] = app->add_option("--out", out, "Output directory");
    opts["resample"] = app->add_option("--resample", resample, "Resampling repetitions R")
                           ->check(CLI::NonNegativeNumber);
    opts["steps"] = app->add_option("--steps", steps, "Sampling steps S")->check(CLI::PositiveNumber);
    opts["lambda"] = app->add_option("--lambda", lambda, "Preservation loss weight")->check(CLI::NonNegativeNumber);
    opts["beta"] = app->add_option("--beta", beta, "Coverage threshold for view insertion");
    opts["gamma"] = app->add_option("--gamma", gamma, "Interpolation parameter for inserted views");
    opts["weights"] = app->add_option("--weights", weights, "Toy network weights (JSON)");
    opts["finetune_steps"] = app->add_option("--finetune-steps", finetune_steps, "Fine-tuning iterations")
                                 ->check(CLI::NonNegativeNumber);
    opts["no_finetune"] = app->add_flag("--no-finetune", no_finetune, "Skip the fine-tuning phase");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  RunConfig build() const {
    RunConfig cfg = default_run_config();
    if (given("config")) cfg = load_run_config(config, cfg);
    if (given("mesh")) cfg.mesh = mesh;
    if (given("prompt")) cfg.prompt = prompt;
    if (given("backend")) cfg.backend = parse_backend(backend);
    if (given("endpoint")) {
      cfg.remote.endpoint = endpoint;
      if (!given("backend")) cfg.backend = BackendKind::kRemote;
    }
    if (given("seed")) cfg.seed = seed;
    if (given("out")) cfg.out = out;
    if (given("resample")) cfg.resample.repetitions = resample;
    if (given("steps")) cfg.resample.steps = steps;
    if (given("lambda")) cfg.finetune.lambda = lambda;
    if (given("beta")) cfg.beta = beta;
    if (given("gamma")) cfg.gamma = gamma;
    if (given("weights")) cfg.toy.weights = weights;
    if (given("finetune_steps")) cfg.finetune.steps = finetune_steps;
    if (no_finetune) cfg.finetune_enabled = false;
    return cfg;
  }
};

std::string fmt_view(const Viewpoint& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%7.2f %7.2f %5.2f", v.azimuth_deg, v.elevation_deg, v.radius);
  return buf;
}

int cmd_run(const CommonOptions& o, std::ostream& out) {
  const RunConfig cfg = o.build();
  const RunResult r = run_texturing(cfg);
  std::size_t inserted = 0;
  for (const auto& v : r.report.views) inserted += v.scheduled.inserted ? 1 : 0;
  out << "views painted      " << r.report.views.size() << " (" << inserted << " inserted)\n";
  out << "texel coverage     " << std::fixed << std::setprecision(4)
      << r.report.coverage.painted_texel_fraction << '\n';
  out << "consistency        " << std::setprecision(6) << r.report.consistency << '\n';
  if (!r.report.finetune.note.empty()) out << "fine-tuning        " << r.report.finetune.note << '\n';
  out << "output             " << cfg.out.string() << '\n';
  return 0;
}

// Resolves mesh/atlas/config either from a run directory or explicit flags.
struct EvalInputs {
  RunConfig cfg = default_run_config();
  std::filesystem::path mesh;
  std::filesystem::path atlas;
};

EvalInputs eval_inputs(const std::string& run_dir, const CommonOptions& o, const std::string& atlas) {
  EvalInputs in;
  if (!run_dir.empty()) {
    const std::filesystem::path dir(run_dir);
    std::ifstream rep(dir / "report.json");
    if (!rep) throw Error("no report.json in " + dir.string());
    nlohmann::json j;
    rep >> j;
    in.cfg = parse_run_config(j.at("config").dump(), in.cfg);
    in.mesh = dir / "mesh.obj";
    in.atlas = dir / "atlas.png";
  }
  if (o.given("config")) in.cfg = load_run_config(o.config, in.cfg);
  if (o.given("mesh")) in.mesh = o.mesh;
  if (!atlas.empty()) in.atlas = atlas;
  if (in.mesh.empty() || in.atlas.empty()) throw ConfigError("need --run or both --mesh and --atlas");
  return in;
}

int cmd_eval(const EvalInputs& in, std::ostream& out) {
  const Mesh mesh = load_mesh(in.mesh, {in.cfg.mesh_fit_radius, true});
  const TextureAtlas atlas = load_atlas(in.atlas);
  out << std::fixed << std::setprecision(6) << eval_consistency(mesh, atlas, in.cfg.consistency) << '\n';
  return 0;
}

int cmd_render(const EvalInputs& in, const std::string& out_dir, const std::string& which, std::ostream& out) {
  const Mesh mesh = load_mesh(in.mesh, {in.cfg.mesh_fit_radius, true});
  const TextureAtlas atlas = load_atlas(in.atlas);
  std::vector<Viewpoint> views;
  if (which == "eval") {
    views = evaluation_views(in.cfg.consistency);
  } else {
    views = in.cfg.scheduler_config().predefined;
  }
  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < views.size(); ++i) {
    const Camera cam = viewpoint_to_camera(views[i], in.cfg.image, in.cfg.fov_deg);
    char name[64];
    std::snprintf(name, sizeof name, "render_%02zu.png", i);
    write_png(std::filesystem::path(out_dir) / name, render_textured(mesh, atlas, cam, {0, 0, 0}));
    out << name << "  " << fmt_view(views[i]) << '\n';
  }
  return 0;
}

int cmd_schedule(const CommonOptions& o, std::ostream& out) {
  const RunConfig cfg = o.build();
  if (cfg.mesh.empty()) throw ConfigError("schedule needs --mesh");
  const Mesh mesh = load_mesh(cfg.mesh, {cfg.mesh_fit_radius, true});
  const auto seq = simulate_schedule(mesh, cfg);
  out << "#   azimuth elevation radius  kind       p\n";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& s = seq[i];
    const char* kind = s.inserted ? "inserted" : (s.locked ? "anchor" : "predef");
    char line[160];
    std::snprintf(line, sizeof line, "%-3zu %s  %-9s %.4f%s\n", i, fmt_view(s.view).c_str(), kind, s.p,
                  s.depth_limited ? "  depth-limited" : "");
    out << line;
  }
  return 0;
}

int cmd_finetune(const std::string& anchors_path, const CommonOptions& o, double lr, std::ostream& out) {
  const RunConfig cfg = o.build();
  const StoredAnchors stored = load_anchors(anchors_path);
  if (stored.anchors.samples.empty()) throw ConfigError("anchor file holds no samples");
  if (cfg.toy.weights.empty() || !std::filesystem::exists(cfg.toy.weights)) {
    throw ConfigError("finetune needs --weights pointing at existing toy weights");
  }
  ToyWeights w = load_toy_weights(cfg.toy.weights);
  const NoiseSchedule sched = make_schedule(w.T, cfg.schedule_kind, std::min(cfg.resample.steps, w.T));
  ToyDenoiser toy(w.arch, w.params, w.T);
  FinetuneConfig fc = cfg.finetune;
  if (lr > 0.0) fc.lr = lr;
  const FinetuneResult r = finetune_loop(toy, stored.anchors, sched, fc);

  const std::filesystem::path dir = cfg.out;
  std::filesystem::create_directories(dir);
  write_training_csv(dir / "training_log.csv", r.log);
  save_toy_weights(dir / "toy_weights_finetuned.json", {w.arch, w.T, toy.params()});
  nlohmann::json summary = {{"steps", fc.steps},
                            {"lambda", fc.lambda},
                            {"lr", fc.lr},
                            {"initial_loss", r.log.empty() ? 0.0 : r.log.front().total},
                            {"final_loss", r.log.empty() ? 0.0 : r.log.back().total},
                            {"parameter_distance", parameter_distance(toy.params(), r.frozen)},
                            {"max_abs_drift", max_abs_drift(toy.params(), r.frozen)}};
  std::ofstream(dir / "finetune_summary.json") << summary.dump(2) << '\n';
  out << summary.dump(2) << '\n';
  return 0;
}

int cmd_pretrain(const std::string& path, int steps, std::uint64_t seed, std::ostream& out) {
  const RunConfig cfg = default_run_config();
  const NoiseSchedule sched = make_schedule(cfg.T, cfg.schedule_kind, cfg.resample.steps);
  StripeDistribution dist;
  dist.height = cfg.image.height / cfg.regions.latent_factor;
  dist.width = cfg.image.width / cfg.regions.latent_factor;
  PretrainConfig pc = cfg.toy.pretrain;
  if (steps >= 0) pc.steps = steps;
  pc.seed = seed;
  save_toy_weights(path, pretrain_toy(cfg.toy.arch, sched, dist, pc));
  out << "wrote " << path << '\n';
  return 0;
}

int cmd_primitive(const std::string& shape, int detail, const std::string& path, std::ostream& out) {
  Mesh m;
  if (shape == "sphere") {
    m = make_uv_sphere(detail > 0 ? 4 * detail : 32, detail > 0 ? 2 * detail : 16, 1.0);
  } else if (shape == "icosphere") {
    m = make_icosphere(detail >= 0 ? detail : 2, 1.0);
  } else if (shape == "cube") {
    m = make_cube();
  } else {
    m = make_quad(0.5);
  }
  write_obj(path, m);
  out << "wrote " << path << " (" << m.face_count() << " faces)\n";
  return 0;
}

}  // namespace

int cli_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"textailor: texture synthesis for UV-mapped meshes with a diffusion inpainting loop"};
  app.name("textailor");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace | debug | info | warn | error | off");

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Texture a mesh (anchors, fine-tuning, scheduled views)");
  run_opts.add_to(run);

  CommonOptions eval_opts;
  std::string eval_run, eval_atlas;
  auto* eval = app.add_subcommand("eval", "Print the view-consistency score of a textured mesh");
  eval->add_option("--run", eval_run, "Run output directory");
  eval->add_option("--atlas", eval_atlas, "Atlas PNG");
  eval_opts.opts["config"] = eval->add_option("--config", eval_opts.config, "JSON run config");
  eval_opts.opts["mesh"] = eval->add_option("--mesh", eval_opts.mesh, "Mesh OBJ");

  CommonOptions render_opts;
  std::string render_run, render_atlas, render_out = "renders", render_views = "sequence";
  auto* render = app.add_subcommand("render", "Render a textured mesh from the view sequence or the eval ring");
  render->add_option("--run", render_run, "Run output directory");
  render->add_option("--atlas", render_atlas, "Atlas PNG");
  render->add_option("--out", render_out, "Output directory");
  render->add_option("--views", render_views, "sequence | eval")->check(CLI::IsMember({"sequence", "eval"}));
  render_opts.opts["config"] = render->add_option("--config", render_opts.config, "JSON run config");
  render_opts.opts["mesh"] = render->add_option("--mesh", render_opts.mesh, "Mesh OBJ");

  CommonOptions ft_opts;
  std::string anchors_path;
  double ft_lr = 0.0;
  auto* ft = app.add_subcommand("finetune", "Fine-tune toy weights on stored anchor latents");
  ft->add_option("--anchors", anchors_path, "anchors.json written by run")->required();
  ft->add_option("--lr", ft_lr, "Learning rate")->check(CLI::PositiveNumber);
  ft_opts.add_to(ft);

  CommonOptions sched_opts;
  auto* sched = app.add_subcommand("schedule", "Dry-run the view scheduler and print views with p values");
  sched_opts.add_to(sched);

  std::string pre_out = "toy_weights.json";
  int pre_steps = -1;
  std::uint64_t pre_seed = 1;
  auto* pre = app.add_subcommand("pretrain", "Pretrain toy weights on the synthetic stripe distribution");
  pre->add_option("--out", pre_out, "Weights file");
  pre->add_option("--steps", pre_steps, "Optimizer steps")->check(CLI::NonNegativeNumber);
  pre->add_option("--seed", pre_seed, "Seed");

  std::string prim_shape = "sphere", prim_out;
  int prim_detail = -1;
  auto* prim = app.add_subcommand("primitive", "Write a procedural test mesh as OBJ");
  prim->add_option("--shape", prim_shape, "sphere | icosphere | cube | quad")
      ->check(CLI::IsMember({"sphere", "icosphere", "cube", "quad"}));
  prim->add_option("--detail", prim_detail, "Resolution (sphere: ring multiplier, icosphere: subdivisions)");
  prim->add_option("--out", prim_out, "Output OBJ")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 2;
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  try {
    if (run->parsed()) return cmd_run(run_opts, out);
    if (eval->parsed()) return cmd_eval(eval_inputs(eval_run, eval_opts, eval_atlas), out);
    if (render->parsed()) {
      return cmd_render(eval_inputs(render_run, render_opts, render_atlas), render_out, render_views, out);
    }
    if (ft->parsed()) return cmd_finetune(anchors_path, ft_opts, ft_lr, out);
    if (sched->parsed()) return cmd_schedule(sched_opts, out);
    if (pre->parsed()) return cmd_pretrain(pre_out, pre_steps, pre_seed, out);
    if (prim->parsed()) return cmd_primitive(prim_shape, prim_detail, prim_out, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace textailor::cli
