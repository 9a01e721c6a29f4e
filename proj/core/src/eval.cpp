#include "semvox/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"

namespace semvox::eval {
namespace {

namespace cls = semantics::canonical;
using sim::ScenarioTimeline;
using Json = nlohmann::ordered_json;
using sim::Vec2;

constexpr double kCellEps = 1e-9;

sim::Aabb cell_box(const VoxelKey& k, double res) {
  return {Vec3(k.x, k.y, k.z) * res, Vec3(k.x + 1, k.y + 1, k.z + 1) * res};
}

/// Class of every traced key as the frames are replayed.
class ClassReplay {
 public:
  void apply(const sim::FrameRecord& f) {
    for (const auto& row : f.trace) state_[row.key] = row.class_after;
  }
  std::optional<ClassIndex> at(const VoxelKey& k) const {
    const auto it = state_.find(k);
    return it == state_.end() ? std::nullopt : it->second;
  }

 private:
  std::map<VoxelKey, std::optional<ClassIndex>> state_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <class T>
std::string opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return fmt(*v);
  } else {
    return std::to_string(*v);
  }
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

HindsightMap::HindsightMap(semantics::Ontology ontology, double resolution,
                           std::map<VoxelKey, std::optional<ClassIndex>> cells)
    : ontology_(std::move(ontology)), resolution_(resolution), cells_(std::move(cells)) {}

std::optional<ClassIndex> HindsightMap::label(const VoxelKey& k) const {
  const auto it = cells_.find(k);
  return it == cells_.end() ? std::nullopt : it->second;
}

std::size_t HindsightMap::occupied() const {
  return static_cast<std::size_t>(std::count_if(
      cells_.begin(), cells_.end(), [](const auto& kv) { return kv.second.has_value(); }));
}

HindsightMap build_hindsight_map(const sim::Scene& scene, std::span<const VoxelKey> observed_keys,
                                 double resolution) {
  if (!(resolution > 0.0)) throw ConfigurationError("resolution must be positive");
  std::map<VoxelKey, std::optional<ClassIndex>> cells;
  for (const VoxelKey& k : observed_keys) {
    const sim::Aabb c = cell_box(k, resolution);
    cells[k] = scene.cell_class(c.min, c.max, kCellEps);
  }
  return {scene.ontology(), resolution, std::move(cells)};
}

MapIou map_iou(const map::MapSnapshot& snapshot, const HindsightMap& gt, float threshold) {
  if (snapshot.resolution() != gt.resolution()) {
    throw ConfigurationError("map resolution " + fmt(snapshot.resolution()) +
                             " differs from hindsight resolution " + fmt(gt.resolution()));
  }
  if (!(snapshot.ontology() == gt.ontology())) {
    throw ConfigurationError("map and hindsight ontologies differ");
  }
  MapIou out;
  out.confusion = semantics::ConfusionMatrix(gt.ontology().size());
  for (const auto& [key, label] : gt.cells()) {
    if (!label) continue;
    const auto v = snapshot.query(key);
    if (!v) continue;
    const auto pred = map::argmax_class(*v, threshold);
    if (!pred) {
      ++out.unclassified;
      ++out.confusion.ignored;
      continue;
    }
    out.confusion.add(*label, *pred);
    ++out.scored;
  }
  out.per_class = semantics::iou_per_class(out.confusion);
  out.mean = semantics::miou(out.confusion);
  return out;
}

std::vector<VoxelKey> hazard_cells(const sim::Scene& scene, double resolution) {
  std::set<VoxelKey> keys;
  for (const auto& o : scene.objects) {
    if (!o.hazard) continue;
    for (const VoxelKey& k : sim::cells_of(o.box, resolution)) keys.insert(k);
  }
  return {keys.begin(), keys.end()};
}

std::string_view to_string(LatencyResult::Status s) {
  switch (s) {
    case LatencyResult::Status::kMeasured: return "measured";
    case LatencyResult::Status::kNotObserved: return "not_observed";
    case LatencyResult::Status::kNotReached: return "not_reached";
  }
  return "unknown";
}

LatencyResult popup_latency(const ScenarioTimeline& timeline,
                            std::span<const VoxelKey> hazard_keys, const HindsightMap& gt,
                            const LatencyOptions& options) {
  if (hazard_keys.empty()) throw PreconditionError("popup_latency needs hazard keys");
  if (!(options.coverage > 0.0 && options.coverage <= 1.0)) {
    throw ConfigurationError("coverage must lie in (0,1]");
  }
  const std::set<VoxelKey> hazards(hazard_keys.begin(), hazard_keys.end());
  LatencyResult out;

  std::size_t first = timeline.frames.size();
  std::vector<VoxelKey> revealed;
  for (std::size_t f = 0; f < timeline.frames.size() && revealed.empty(); ++f) {
    for (const auto& row : timeline.frames[f].trace) {
      if (!hazards.count(row.key)) continue;
      const auto truth = gt.label(row.key);
      if (truth && row.obs_class == truth && row.obs_range < row.range_before) {
        revealed.push_back(row.key);
      }
    }
    if (!revealed.empty()) first = f;
  }
  if (revealed.empty()) return out;

  out.first_correct_frame = timeline.frames[first].index;
  if (options.revealed_only) {
    out.tracked = revealed;
  } else {
    for (const VoxelKey& k : hazards) {
      if (gt.label(k)) out.tracked.push_back(k);
    }
  }

  ClassReplay replay;
  for (std::size_t f = 0; f < timeline.frames.size(); ++f) {
    replay.apply(timeline.frames[f]);
    if (f < first) continue;
    std::size_t correct = 0;
    for (const VoxelKey& k : out.tracked) {
      if (replay.at(k) && replay.at(k) == gt.label(k)) ++correct;
    }
    if (static_cast<double>(correct) >=
        options.coverage * static_cast<double>(out.tracked.size()) - 1e-12) {
      out.status = LatencyResult::Status::kMeasured;
      out.covered_frame = timeline.frames[f].index;
      out.frames = *out.covered_frame - *out.first_correct_frame;
      return out;
    }
  }
  out.status = LatencyResult::Status::kNotReached;
  return out;
}

namespace {

std::size_t reverse_start(const ScenarioTimeline& timeline) {
  for (std::size_t f = 0; f < timeline.frames.size(); ++f) {
    if (timeline.frames[f].segment != sim::Segment::kForward) return f;
  }
  throw PreconditionError("timeline has no reverse or double-back segment");
}

}  // namespace

StabilityResult reverse_stability(const ScenarioTimeline& timeline,
                                  std::span<const VoxelKey> protected_keys) {
  const std::size_t start = reverse_start(timeline);
  const std::set<VoxelKey> keys(protected_keys.begin(), protected_keys.end());
  StabilityResult out;
  out.reverse_start = timeline.frames[start].index;
  out.protected_keys = keys.size();
  for (std::size_t f = start; f < timeline.frames.size(); ++f) {
    for (const auto& row : timeline.frames[f].trace) {
      if (!keys.count(row.key)) continue;
      if (row.class_after != row.class_before && row.obs_range > row.range_before) {
        ++out.violations;
        out.events.emplace_back(timeline.frames[f].index, row.key);
      }
    }
  }
  return out;
}

StabilityResult reverse_stability(const ScenarioTimeline& timeline, const HindsightMap& gt) {
  const std::size_t start = reverse_start(timeline);
  ClassReplay replay;
  std::set<VoxelKey> seen;
  for (std::size_t f = 0; f < start; ++f) {
    replay.apply(timeline.frames[f]);
    for (const auto& row : timeline.frames[f].trace) seen.insert(row.key);
  }
  std::vector<VoxelKey> keys;
  for (const VoxelKey& k : seen) {
    const auto truth = gt.label(k);
    if (truth && replay.at(k) == truth) keys.push_back(k);
  }
  return reverse_stability(timeline, keys);
}

BleedResult bleed_correction(const ScenarioTimeline& timeline, const HindsightMap& gt,
                             double far_range) {
  std::set<VoxelKey> classified;
  std::vector<VoxelKey> wrong;
  for (const auto& f : timeline.frames) {
    for (const auto& row : f.trace) {
      if (!row.class_after || classified.count(row.key)) continue;
      classified.insert(row.key);
      const auto truth = gt.label(row.key);
      if (truth && row.obs_range >= far_range && row.class_after != truth) {
        wrong.push_back(row.key);
      }
    }
  }
  BleedResult out;
  out.initially_wrong = wrong.size();
  for (const VoxelKey& k : wrong) {
    const auto v = timeline.final_map.query(k);
    if (v && map::argmax_class(*v) == gt.label(k)) ++out.corrected;
  }
  if (out.initially_wrong > 0) {
    out.rate = static_cast<double>(out.corrected) / static_cast<double>(out.initially_wrong);
  }
  return out;
}

WaterResult water_handling(const ScenarioTimeline& timeline) {
  const sim::Scene& scene = timeline.config.scene;
  const double res = timeline.config.resolution;
  // Column -> index of the true surface cell.
  std::map<map::ColumnKey, std::int32_t> footprint;
  for (const auto& w : scene.water) {
    const Vec2 lo = w.polygon.bbox_min();
    const Vec2 hi = w.polygon.bbox_max();
    const auto surface_iz = static_cast<std::int32_t>(std::floor(w.surface_height / res));
    for (auto x = static_cast<std::int32_t>(std::floor(lo.x() / res)) - 1;
         x <= static_cast<std::int32_t>(std::floor(hi.x() / res)) + 1; ++x) {
      for (auto y = static_cast<std::int32_t>(std::floor(lo.y() / res)) - 1;
           y <= static_cast<std::int32_t>(std::floor(hi.y() / res)) + 1; ++y) {
        const Vec2 clo(x * res + kCellEps, y * res + kCellEps);
        const Vec2 chi((x + 1) * res - kCellEps, (y + 1) * res - kCellEps);
        if (w.polygon.contains_rect(clo, chi)) footprint[{x, y}] = surface_iz;
      }
    }
  }
  const auto near_surface = [&footprint](const VoxelKey& k) {
    const auto it = footprint.find({k.x, k.y});
    return it != footprint.end() && std::abs(k.z - it->second) <= 1;
  };

  WaterResult out;
  out.footprint_columns = footprint.size();
  for (const auto& f : timeline.frames) {
    if (f.water.injected > 0) {
      out.first_injection_frame = f.index;
      break;
    }
  }
  std::set<VoxelKey> occupied;
  for (const auto& f : timeline.frames) {
    const bool last = out.first_injection_frame && f.index == *out.first_injection_frame;
    if (out.first_injection_frame && f.index > *out.first_injection_frame) break;
    for (const auto& row : f.trace) {
      if (last && row.injected) continue;
      if (row.hits_after > 0 && near_surface(row.key)) occupied.insert(row.key);
    }
  }
  out.occupied_before = occupied.size();

  const auto water = scene.ontology().find("water");
  for (const auto& [col, iz] : footprint) {
    for (int dz = -1; dz <= 1; ++dz) {
      const auto v = timeline.final_map.query({col.x, col.y, iz + dz});
      if (v && map::argmax_class(*v) == water) {
        ++out.covered_after;
        break;
      }
    }
  }
  if (!footprint.empty()) {
    out.coverage =
        static_cast<double>(out.covered_after) / static_cast<double>(footprint.size());
  }

  for (const auto& f : timeline.frames) {
    if (!f.water.plane) continue;
    ++out.fits;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : scene.water) {
      const Vec2 c = 0.5 * (w.polygon.bbox_min() + w.polygon.bbox_max());
      best = std::min(best, std::abs(f.water.plane->height_at(c.x(), c.y()) - w.surface_height));
    }
    out.max_offset_error = std::max(out.max_offset_error.value_or(0.0), best);
  }
  return out;
}

OverhangResult overhang_separation(const map::MapSnapshot& snapshot, const sim::Scene& scene) {
  OverhangResult out;
  const double res = snapshot.resolution();
  const auto voxels = snapshot.voxels();
  for (const auto& o : scene.objects) {
    if (o.kind != sim::ObjectKind::kSlab) continue;
    for (const auto& [k, v] : voxels) {
      const sim::Aabb c = cell_box(k, res);
      const auto cls_of = map::argmax_class(v);
      if (o.box.overlaps(c, kCellEps)) {
        ++out.slab_voxels;
        if (cls_of == cls::kDryVegetation || cls_of == cls::kLushVegetation) {
          ++out.slab_vegetation;
        }
        continue;
      }
      const bool beneath = c.max.x() >= o.box.min.x() - kCellEps &&
                           c.min.x() <= o.box.max.x() + kCellEps &&
                           c.max.y() >= o.box.min.y() - kCellEps &&
                           c.min.y() <= o.box.max.y() + kCellEps && c.max.z() < o.box.min.z();
      if (!beneath) continue;
      const double g[4] = {scene.ground.height(c.min.x(), c.min.y()),
                           scene.ground.height(c.max.x(), c.min.y()),
                           scene.ground.height(c.min.x(), c.max.y()),
                           scene.ground.height(c.max.x(), c.max.y())};
      const bool touches_ground = *std::max_element(g, g + 4) >= c.min.z() - kCellEps &&
                                  *std::min_element(g, g + 4) <= c.max.z() + kCellEps;
      if (!touches_ground) continue;
      ++out.floor_voxels;
      if (cls_of == cls::kGround || cls_of == cls::kTrail) ++out.floor_ground;
    }
  }
  return out;
}

FusionReport evaluate(const ScenarioTimeline& timeline) {
  const auto& cfg = timeline.config;
  FusionReport r;
  r.scenario = cfg.scene.name;
  r.strategy = std::string(map::to_string(cfg.strategy));
  r.seed = cfg.seed;
  r.frames = timeline.frames.size();
  r.final_voxels = timeline.final_map.size();
  const auto keys = timeline.final_map.keys();
  const HindsightMap gt = build_hindsight_map(cfg.scene, keys, cfg.resolution);
  r.iou = map_iou(timeline.final_map, gt);
  const auto hazards = hazard_cells(cfg.scene, cfg.resolution);
  if (!hazards.empty()) r.popup = popup_latency(timeline, hazards, gt);
  const auto& wps = cfg.trajectory.waypoints();
  if (std::any_of(wps.begin(), wps.end(),
                  [](const sim::Waypoint& w) { return w.segment != sim::Segment::kForward; })) {
    r.reverse = reverse_stability(timeline, gt);
  }
  r.bleed = bleed_correction(timeline, gt);
  if (!cfg.scene.water.empty()) r.water = water_handling(timeline);
  if (std::any_of(cfg.scene.objects.begin(), cfg.scene.objects.end(),
                  [](const sim::SceneObject& o) { return o.kind == sim::ObjectKind::kSlab; })) {
    r.overhang = overhang_separation(timeline.final_map, cfg.scene);
  }
  return r;
}

std::string to_json(const FusionReport& r) {
  const auto& names = semantics::Ontology::canonical().names();
  Json j;
  j["metric_kind"] = "proxy";
  j["scenario"] = r.scenario;
  j["strategy"] = r.strategy;
  j["seed"] = r.seed;
  j["frames"] = r.frames;
  j["final_voxels"] = r.final_voxels;
  Json iou;
  for (std::size_t c = 0; c < r.iou.per_class.size() && c < names.size(); ++c) {
    iou[names[c]] = opt_json(r.iou.per_class[c]);
  }
  j["voxel_iou"] = {{"per_class", iou},
                    {"mean", opt_json(r.iou.mean)},
                    {"scored", r.iou.scored},
                    {"unclassified", r.iou.unclassified}};
  if (r.popup) {
    const auto& p = *r.popup;
    j["popup_latency"] = {
        {"status", std::string(to_string(p.status))},
        {"frames", p.frames ? Json(*p.frames) : Json(nullptr)},
        {"first_correct_frame",
         p.first_correct_frame ? Json(*p.first_correct_frame) : Json(nullptr)},
        {"covered_frame", p.covered_frame ? Json(*p.covered_frame) : Json(nullptr)},
        {"tracked_voxels", p.tracked.size()}};
  }
  if (r.reverse) {
    j["reverse_stability"] = {{"reverse_start", r.reverse->reverse_start},
                              {"protected_voxels", r.reverse->protected_keys},
                              {"violations", r.reverse->violations}};
  }
  j["bleed_correction"] = {{"initially_wrong", r.bleed.initially_wrong},
                           {"corrected", r.bleed.corrected},
                           {"rate", opt_json(r.bleed.rate)}};
  if (r.water) {
    const auto& w = *r.water;
    j["water"] = {{"footprint_columns", w.footprint_columns},
                  {"first_injection_frame",
                   w.first_injection_frame ? Json(*w.first_injection_frame) : Json(nullptr)},
                  {"occupied_before", w.occupied_before},
                  {"covered_after", w.covered_after},
                  {"coverage", opt_json(w.coverage)},
                  {"max_offset_error", opt_json(w.max_offset_error)},
                  {"fits", w.fits}};
  }
  if (r.overhang) {
    const auto& o = *r.overhang;
    j["overhang"] = {{"slab_voxels", o.slab_voxels},
                     {"slab_vegetation", o.slab_vegetation},
                     {"floor_voxels", o.floor_voxels},
                     {"floor_ground", o.floor_ground}};
  }
  return j.dump(2) + "\n";
}

std::string csv_header() {
  return "scenario,strategy,seed,frames,final_voxels,miou,obstacle_rock_iou,popup_status,"
         "popup_latency,reverse_violations,bleed_rate,water_coverage,water_offset_error,"
         "slab_vegetation_fraction,floor_ground_fraction";
}

std::string to_csv_row(const FusionReport& r) {
  std::ostringstream os;
  const auto frac = [](std::size_t a, std::size_t b) -> std::optional<double> {
    if (b == 0) return std::nullopt;
    return static_cast<double>(a) / static_cast<double>(b);
  };
  std::optional<double> rock;
  if (r.iou.per_class.size() > cls::kObstacleRock) rock = r.iou.per_class[cls::kObstacleRock];
  os << r.scenario << ',' << r.strategy << ',' << r.seed << ',' << r.frames << ','
     << r.final_voxels << ',' << opt(r.iou.mean) << ',' << opt(rock) << ','
     << (r.popup ? std::string(to_string(r.popup->status)) : "") << ','
     << (r.popup ? opt(r.popup->frames) : "") << ','
     << (r.reverse ? std::to_string(r.reverse->violations) : "") << ',' << opt(r.bleed.rate)
     << ',' << (r.water ? opt(r.water->coverage) : "") << ','
     << (r.water ? opt(r.water->max_offset_error) : "") << ','
     << (r.overhang ? opt(frac(r.overhang->slab_vegetation, r.overhang->slab_voxels)) : "")
     << ','
     << (r.overhang ? opt(frac(r.overhang->floor_ground, r.overhang->floor_voxels)) : "");
  return os.str();
}

}  // namespace semvox::eval
