#include "textailor/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textailor/error.hpp"

namespace textailor {

using nlohmann::json;

BackendKind parse_backend(const std::string& name) {
  if (name == "analytic") return BackendKind::kAnalytic;
  if (name == "toy") return BackendKind::kToy;
  if (name == "remote") return BackendKind::kRemote;
  throw ConfigError("unknown backend '" + name + "' (expected analytic, toy or remote)");
}

const char* backend_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kAnalytic: return "analytic";
    case BackendKind::kToy: return "toy";
    case BackendKind::kRemote: return "remote";
  }
  return "?";
}

std::vector<Viewpoint> default_sequence_views() {
  std::vector<Viewpoint> v;
  for (double az : {60.0, 120.0, 180.0, 240.0, 300.0}) v.push_back(make_viewpoint(az, 15, 1));
  v.push_back(make_viewpoint(0, 85, 1));
  v.push_back(make_viewpoint(0, -85, 1));
  return v;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.views = default_sequence_views();
  return cfg;
}

SchedulerConfig RunConfig::scheduler_config() const {
  SchedulerConfig s;
  s.beta = beta;
  s.gamma = gamma;
  s.max_insert_depth = max_insert_depth;
  s.predefined = anchors;
  s.predefined.insert(s.predefined.end(), views.begin(), views.end());
  s.locked_prefix = anchors.size();
  return s;
}

void RunConfig::validate() const {
  if (mesh.empty()) throw ConfigError("no mesh given");
  if (prompt.empty()) throw ConfigError("prompt must not be empty");
  resample.validate();
  finetune.validate();
  scheduler_config().validate();
  if (anchors.empty()) throw ConfigError("at least one anchor view is required");
  if (T < 1) throw ConfigError("T must be >= 1");
  if (resample.steps > T) throw ConfigError("steps S must not exceed T");
  if (regions.latent_factor < 1 || image.width < 1 || image.height < 1 ||
      image.width % regions.latent_factor != 0 || image.height % regions.latent_factor != 0) {
    throw ConfigError("image resolution must be a positive multiple of the latent factor");
  }
  if (atlas_size < 1 || (atlas_size & (atlas_size - 1)) != 0) throw ConfigError("atlas size must be a power of two");
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw ConfigError("fov must lie in (0,180)");
  if (!(mesh_fit_radius > 0.0)) throw ConfigError("mesh fit radius must be positive");
  if (!(analytic.sigma0 >= 0.0)) throw ConfigError("analytic sigma0 must be >= 0");
  for (double c : analytic.color) {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("analytic colour components must lie in [0,1]");
  }
  if (backend == BackendKind::kRemote && remote.endpoint.empty()) {
    throw ConfigError("remote backend requires an endpoint");
  }
  if (backend == BackendKind::kToy && toy.arch.latent_channels != 3) {
    throw ConfigError("toy backend must have 3 latent channels (identity codec)");
  }
}

namespace {

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown config key '" + where + "." + it.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

std::vector<Viewpoint> read_views(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of [azimuth, elevation, radius]");
  std::vector<Viewpoint> out;
  for (const auto& v : j) {
    if (!v.is_array() || v.size() < 2 || v.size() > 3) {
      throw ConfigError(where + " entries must be [azimuth, elevation] or [azimuth, elevation, radius]");
    }
    try {
      out.push_back(make_viewpoint(v[0].get<double>(), v[1].get<double>(),
                                   v.size() == 3 ? v[2].get<double>() : 1.0));
    } catch (const json::exception&) {
      throw ConfigError(where + " entries must be numbers");
    }
  }
  return out;
}

json views_json(const std::vector<Viewpoint>& views) {
  json a = json::array();
  for (const auto& v : views) a.push_back({v.azimuth_deg, v.elevation_deg, v.radius});
  return a;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, RunConfig cfg) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");
  reject_unknown(j, "config",
                 {"schema", "mesh", "prompt", "backend", "endpoint", "seed", "out", "write_views",
                  "resample", "finetune", "scheduler", "noise", "resolution", "regions", "analytic",
                  "toy", "remote", "consistency", "mesh_fit_radius"});
  if (j.contains("schema")) {
    std::string schema;
    read(j, "schema", schema, "config");
    if (schema != kRunConfigSchema) {
      throw ConfigError("config schema '" + schema + "' is not supported (expected " +
                        std::string(kRunConfigSchema) + ")");
    }
  }
  std::string s;
  if (j.contains("mesh")) {
    read(j, "mesh", s, "config");
    cfg.mesh = s;
  }
  read(j, "prompt", cfg.prompt, "config");
  if (j.contains("backend")) {
    read(j, "backend", s, "config");
    cfg.backend = parse_backend(s);
  }
  read(j, "endpoint", cfg.remote.endpoint, "config");
  read(j, "seed", cfg.seed, "config");
  if (j.contains("out")) {
    read(j, "out", s, "config");
    cfg.out = s;
  }
  read(j, "write_views", cfg.write_views, "config");
  read(j, "mesh_fit_radius", cfg.mesh_fit_radius, "config");

  if (auto it = j.find("resample"); it != j.end()) {
    reject_unknown(*it, "resample", {"R", "steps"});
    read(*it, "R", cfg.resample.repetitions, "resample");
    read(*it, "steps", cfg.resample.steps, "resample");
  }
  if (auto it = j.find("finetune"); it != j.end()) {
    reject_unknown(*it, "finetune", {"enabled", "lambda", "steps", "lr", "momentum", "seed"});
    read(*it, "enabled", cfg.finetune_enabled, "finetune");
    read(*it, "lambda", cfg.finetune.lambda, "finetune");
    read(*it, "steps", cfg.finetune.steps, "finetune");
    read(*it, "lr", cfg.finetune.lr, "finetune");
    read(*it, "momentum", cfg.finetune.momentum, "finetune");
    read(*it, "seed", cfg.finetune.seed, "finetune");
  }
  if (auto it = j.find("scheduler"); it != j.end()) {
    reject_unknown(*it, "scheduler", {"beta", "gamma", "max_insert_depth", "anchors", "views"});
    read(*it, "beta", cfg.beta, "scheduler");
    read(*it, "gamma", cfg.gamma, "scheduler");
    read(*it, "max_insert_depth", cfg.max_insert_depth, "scheduler");
    if (it->contains("anchors")) cfg.anchors = read_views(it->at("anchors"), "scheduler.anchors");
    if (it->contains("views")) cfg.views = read_views(it->at("views"), "scheduler.views");
  }
  if (auto it = j.find("noise"); it != j.end()) {
    reject_unknown(*it, "noise", {"T", "kind"});
    read(*it, "T", cfg.T, "noise");
    if (it->contains("kind")) {
      read(*it, "kind", s, "noise");
      cfg.schedule_kind = parse_schedule_kind(s);
    }
  }
  if (auto it = j.find("resolution"); it != j.end()) {
    reject_unknown(*it, "resolution", {"image", "latent_factor", "atlas", "fov_deg"});
    if (it->contains("image")) {
      std::array<int, 2> wh{};
      read(*it, "image", wh, "resolution");
      cfg.image = {wh[0], wh[1]};
    }
    read(*it, "latent_factor", cfg.regions.latent_factor, "resolution");
    read(*it, "atlas", cfg.atlas_size, "resolution");
    read(*it, "fov_deg", cfg.fov_deg, "resolution");
  }
  if (auto it = j.find("regions"); it != j.end()) {
    reject_unknown(*it, "regions", {"update_margin", "grazing_cos"});
    read(*it, "update_margin", cfg.regions.update_margin, "regions");
    read(*it, "grazing_cos", cfg.regions.grazing_cos, "regions");
  }
  if (auto it = j.find("analytic"); it != j.end()) {
    reject_unknown(*it, "analytic", {"color", "sigma0"});
    read(*it, "color", cfg.analytic.color, "analytic");
    read(*it, "sigma0", cfg.analytic.sigma0, "analytic");
  }
  if (auto it = j.find("toy"); it != j.end()) {
    reject_unknown(*it, "toy", {"weights", "hidden", "vocabulary", "pretrain_steps", "pretrain_lr",
                                "pretrain_batch", "pretrain_seed"});
    if (it->contains("weights")) {
      read(*it, "weights", s, "toy");
      cfg.toy.weights = s;
    }
    read(*it, "hidden", cfg.toy.arch.hidden, "toy");
    read(*it, "vocabulary", cfg.toy.arch.vocabulary, "toy");
    read(*it, "pretrain_steps", cfg.toy.pretrain.steps, "toy");
    read(*it, "pretrain_lr", cfg.toy.pretrain.lr, "toy");
    read(*it, "pretrain_batch", cfg.toy.pretrain.batch, "toy");
    read(*it, "pretrain_seed", cfg.toy.pretrain.seed, "toy");
  }
  if (auto it = j.find("remote"); it != j.end()) {
    reject_unknown(*it, "remote", {"endpoint", "guidance", "retries", "backoff_ms"});
    read(*it, "endpoint", cfg.remote.endpoint, "remote");
    if (it->contains("guidance") && !it->at("guidance").is_null()) {
      double g = 0.0;
      read(*it, "guidance", g, "remote");
      cfg.remote.guidance = g;
    }
    read(*it, "retries", cfg.remote.retry.retries, "remote");
    if (it->contains("backoff_ms")) {
      long long ms = 0;
      read(*it, "backoff_ms", ms, "remote");
      cfg.remote.retry.initial_backoff = std::chrono::milliseconds(ms);
    }
  }
  if (auto it = j.find("consistency"); it != j.end()) {
    reject_unknown(*it, "consistency", {"per_hemisphere", "elevations", "grid", "azimuth_offset"});
    read(*it, "per_hemisphere", cfg.consistency.per_hemisphere, "consistency");
    if (it->contains("elevations")) {
      std::array<double, 2> el{};
      read(*it, "elevations", el, "consistency");
      cfg.consistency.elevation_up = el[0];
      cfg.consistency.elevation_down = el[1];
    }
    read(*it, "grid", cfg.consistency.grid, "consistency");
    read(*it, "azimuth_offset", cfg.consistency.azimuth_offset, "consistency");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::move(base));
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["schema"] = kRunConfigSchema;
  j["mesh"] = c.mesh.string();
  j["prompt"] = c.prompt;
  j["backend"] = backend_name(c.backend);
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  j["write_views"] = c.write_views;
  j["mesh_fit_radius"] = c.mesh_fit_radius;
  j["resample"] = {{"R", c.resample.repetitions}, {"steps", c.resample.steps}};
  j["finetune"] = {{"enabled", c.finetune_enabled}, {"lambda", c.finetune.lambda},
                   {"steps", c.finetune.steps},      {"lr", c.finetune.lr},
                   {"momentum", c.finetune.momentum}, {"seed", c.finetune.seed}};
  j["scheduler"] = {{"beta", c.beta},
                    {"gamma", c.gamma},
                    {"max_insert_depth", c.max_insert_depth},
                    {"anchors", views_json(c.anchors)},
                    {"views", views_json(c.views)}};
  j["noise"] = {{"T", c.T}, {"kind", schedule_kind_name(c.schedule_kind)}};
  j["resolution"] = {{"image", {c.image.width, c.image.height}},
                     {"latent_factor", c.regions.latent_factor},
                     {"atlas", c.atlas_size},
                     {"fov_deg", c.fov_deg}};
  j["regions"] = {{"update_margin", c.regions.update_margin}, {"grazing_cos", c.regions.grazing_cos}};
  j["analytic"] = {{"color", c.analytic.color}, {"sigma0", c.analytic.sigma0}};
  j["toy"] = {{"weights", c.toy.weights.string()},
              {"hidden", c.toy.arch.hidden},
              {"vocabulary", c.toy.arch.vocabulary},
              {"pretrain_steps", c.toy.pretrain.steps},
              {"pretrain_lr", c.toy.pretrain.lr},
              {"pretrain_batch", c.toy.pretrain.batch},
              {"pretrain_seed", c.toy.pretrain.seed}};
  j["remote"] = {{"endpoint", c.remote.endpoint},
                 {"guidance", c.remote.guidance ? json(*c.remote.guidance) : json(nullptr)},
                 {"retries", c.remote.retry.retries},
                 {"backoff_ms", c.remote.retry.initial_backoff.count()}};
  j["consistency"] = {{"per_hemisphere", c.consistency.per_hemisphere},
                      {"elevations", {c.consistency.elevation_up, c.consistency.elevation_down}},
                      {"grid", c.consistency.grid},
                      {"azimuth_offset", c.consistency.azimuth_offset}};
  return j.dump(2);
}

}  // namespace textailor
