#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "textailor/camera.hpp"
#include "textailor/regions.hpp"

namespace textailor {

struct SchedulerConfig {
  double beta = 0.5;
  double gamma = 0.5;
  int max_insert_depth = 3;
  std::vector<Viewpoint> predefined;
  /// Leading predefined views yielded without a coverage check (the anchors).
  std::size_t locked_prefix = 0;

  void validate() const;
};

/// |keep| / (|new| + |keep|); 1 when neither region is present.
double coverage_ratio(const RegionCounts& counts);
double coverage_ratio(const RegionMasks& masks);

/// Interpolates azimuth along the shorter arc and elevation linearly; the
/// radius is taken from `cur`.
Viewpoint interpolate_view(const Viewpoint& prev, const Viewpoint& cur, double gamma);

struct ScheduledView {
  Viewpoint view;
  bool inserted = false;
  int predefined_index = -1;  // the predefined view this one serves
  double p = 1.0;             // coverage ratio at yield time
  bool locked = false;
  bool depth_limited = false;
};

/// Maps a candidate view to its region masks under the current atlas.
using CoverageProbe = std::function<RegionCounts(const Viewpoint&)>;

/// Walks the predefined sequence. Before a view is yielded its coverage ratio
/// is measured; below beta an interpolated view between the last yielded view
/// and it is pushed in front and examined the same way, at most
/// max_insert_depth times per predefined view.
class ViewScheduler {
 public:
  explicit ViewScheduler(SchedulerConfig cfg);

  std::optional<ScheduledView> next(const CoverageProbe& probe);

  const std::vector<ScheduledView>& history() const { return history_; }
  const SchedulerConfig& config() const { return cfg_; }

 private:
  SchedulerConfig cfg_;
  std::size_t next_predefined_ = 0;
  std::vector<Viewpoint> pending_;  // back() is examined next
  int insertions_for_current_ = 0;
  std::optional<Viewpoint> last_;
  std::vector<ScheduledView> history_;
};

}  // namespace textailor
