#include "textailor/viewsched.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "textailor/error.hpp"

namespace textailor {

void SchedulerConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("scheduler: beta must lie in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("scheduler: gamma must lie in (0,1)");
  if (max_insert_depth < 0) throw ConfigError("scheduler: max_insert_depth must be >= 0");
  if (predefined.empty()) throw ConfigError("scheduler: no predefined viewpoints");
  if (locked_prefix > predefined.size()) throw ConfigError("scheduler: locked prefix longer than the sequence");
}

double coverage_ratio(const RegionCounts& c) {
  const std::size_t denom = c.keep + c.fresh;
  if (denom == 0) return 1.0;
  return static_cast<double>(c.keep) / static_cast<double>(denom);
}

double coverage_ratio(const RegionMasks& masks) { return coverage_ratio(masks.counts()); }

Viewpoint interpolate_view(const Viewpoint& prev, const Viewpoint& cur, double gamma) {
  if (gamma == 0.0) return make_viewpoint(prev.azimuth_deg, prev.elevation_deg, cur.radius);
  if (gamma == 1.0) return make_viewpoint(cur.azimuth_deg, cur.elevation_deg, cur.radius);
  // Signed azimuth difference folded into [-180, 180).
  const double d = std::fmod(cur.azimuth_deg - prev.azimuth_deg + 540.0, 360.0) - 180.0;
  const double az = prev.azimuth_deg + gamma * d;
  const double el = prev.elevation_deg + gamma * (cur.elevation_deg - prev.elevation_deg);
  return make_viewpoint(az, el, cur.radius);
}

ViewScheduler::ViewScheduler(SchedulerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::optional<ScheduledView> ViewScheduler::next(const CoverageProbe& probe) {
  if (pending_.empty()) {
    if (next_predefined_ >= cfg_.predefined.size()) return std::nullopt;
    pending_.push_back(cfg_.predefined[next_predefined_++]);
    insertions_for_current_ = 0;
  }
  const int index = static_cast<int>(next_predefined_) - 1;

  for (;;) {
    const Viewpoint v = pending_.back();
    ScheduledView out;
    out.view = v;
    out.inserted = pending_.size() > 1;
    out.predefined_index = index;

    const bool first = !last_.has_value();
    const bool locked = !out.inserted && static_cast<std::size_t>(index) < cfg_.locked_prefix;
    if (!first && !locked) {
      out.p = coverage_ratio(probe(v));
      if (out.p < cfg_.beta) {
        if (insertions_for_current_ < cfg_.max_insert_depth) {
          ++insertions_for_current_;
          pending_.push_back(interpolate_view(*last_, v, cfg_.gamma));
          continue;
        }
        out.depth_limited = true;
        spdlog::warn("view (az {:.1f}, el {:.1f}) yielded with coverage ratio {:.3f} < beta after {} insertions",
                     v.azimuth_deg, v.elevation_deg, out.p, insertions_for_current_);
      }
    }
    out.locked = locked;
    pending_.pop_back();
    last_ = v;
    history_.push_back(out);
    return out;
  }
}

}  // namespace textailor
