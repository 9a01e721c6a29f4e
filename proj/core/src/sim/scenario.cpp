#include "semvox/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace semvox::sim {
namespace {

using map::ColumnKey;
using map::VoxelKey;

struct Observation {
  std::optional<ClassIndex> cls;
  float range = kNoRange;
  bool injected = false;
};

Aabb dilate(const Aabb& box, double margin) {
  return {box.min.array() - margin, box.max.array() + margin};
}

std::vector<Aabb> trace_region(const Scene& scene, double margin) {
  std::vector<Aabb> boxes;
  for (const auto& o : scene.objects) boxes.push_back(dilate(o.box, margin));
  for (const auto& w : scene.water) {
    const Vec2 lo = w.polygon.bbox_min();
    const Vec2 hi = w.polygon.bbox_max();
    boxes.push_back(dilate({Vec3(lo.x(), lo.y(), w.surface_height),
                            Vec3(hi.x(), hi.y(), w.surface_height)},
                           margin));
  }
  return boxes;
}

bool fires(std::uint32_t frame, int base_hz, double rate_hz) {
  const int period = base_hz / static_cast<int>(std::llround(rate_hz));
  return frame % static_cast<std::uint32_t>(period) == 0;
}

std::optional<ClassIndex> class_of(const std::optional<map::Voxel>& v) {
  if (!v) return std::nullopt;
  return map::argmax_class(*v);
}

struct FiredCamera {
  const CameraSpec* spec;
  geometry::Pose pose_world;
  geometry::Pose world_to_cam;
  ClassImage labels;
  ConfidenceImage confidence;
};

}  // namespace

std::string_view to_string(WaterEstimate::Status s) {
  switch (s) {
    case WaterEstimate::Status::kNotAttempted: return "not_attempted";
    case WaterEstimate::Status::kInsufficient: return "insufficient";
    case WaterEstimate::Status::kImplausible: return "implausible";
    case WaterEstimate::Status::kFitted: return "fitted";
  }
  return "unknown";
}

std::optional<WaterEstimate::Status> parse_water_status(std::string_view name) {
  for (auto s : {WaterEstimate::Status::kNotAttempted, WaterEstimate::Status::kInsufficient,
                 WaterEstimate::Status::kImplausible, WaterEstimate::Status::kFitted}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

SensorRig ScenarioConfig::effective_rig() const {
  SensorRig r = rig;
  if (map_rate_hz) r.map_rate_hz = *map_rate_hz;
  return r;
}

void ScenarioConfig::validate() const {
  scene.validate();
  if (trajectory.waypoints().empty()) {
    throw ConfigurationError("trajectory has no waypoints");
  }
  effective_rig().validate();
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw ConfigurationError("resolution must be positive");
  }
  if (!(trace_margin >= 0.0)) throw ConfigurationError("trace_margin must be non-negative");
  for (const auto& p : priors) {
    const bool known = std::any_of(scene.objects.begin(), scene.objects.end(),
                                   [&](const SceneObject& o) { return o.name == p.object; });
    if (!known) throw ConfigurationError("priors.object '" + p.object + "' is not in the scene");
    if (p.cls >= scene.ontology().size()) {
      throw ConfigurationError("priors.class is outside the ontology");
    }
    if (p.votes < 0) throw ConfigurationError("priors.votes must be non-negative");
    if (!(p.range > 0.0)) throw ConfigurationError("priors.range must be positive");
  }
}

std::vector<VoxelKey> cells_of(const Aabb& box, double resolution) {
  std::vector<VoxelKey> out;
  const VoxelKey lo = map::key_of(resolution, box.min);
  const VoxelKey hi = map::key_of(resolution, box.max);
  for (int x = lo.x - 1; x <= hi.x + 1; ++x) {
    for (int y = lo.y - 1; y <= hi.y + 1; ++y) {
      for (int z = lo.z - 1; z <= hi.z + 1; ++z) {
        const Aabb cell{Vec3(x, y, z) * resolution, Vec3(x + 1, y + 1, z + 1) * resolution};
        if (box.overlaps(cell, 1e-9)) out.push_back({x, y, z});
      }
    }
  }
  return out;
}

ScenarioTimeline run_scenario(const ScenarioConfig& config) {
  config.validate();
  const SensorRig rig = config.effective_rig();
  const Scene& scene = config.scene;
  const auto& ontology = scene.ontology();
  const std::size_t n_cls = ontology.size();
  const double res = config.resolution;

  map::MapOptions options;
  options.resolution = res;
  options.strategy = config.strategy;
  map::VoxelMap vmap(ontology, options);

  vmap.set_frame(0);
  for (const auto& prior : config.priors) {
    const auto obj = std::find_if(scene.objects.begin(), scene.objects.end(),
                                  [&](const SceneObject& o) { return o.name == prior.object; });
    const auto one_hot = ClassConfidence::one_hot(n_cls, prior.cls, 1.0f);
    SemanticCloud cloud(n_cls);
    for (const VoxelKey& k : cells_of(obj->box, res)) {
      cloud.push_back(vmap.center_of(k), one_hot.scores(), static_cast<float>(prior.range));
    }
    for (int v = 0; v < prior.votes; ++v) vmap.fuse_cloud(cloud);
  }

  const std::vector<Aabb> region = trace_region(scene, config.trace_margin);
  const auto traced = [&region](const Vec3& p) {
    return std::any_of(region.begin(), region.end(),
                       [&p](const Aabb& b) { return b.contains(p); });
  };

  ScenarioTimeline timeline;
  timeline.config = config;
  timeline.base_rate_hz = rig.base_rate_hz();
  const int base = timeline.base_rate_hz;
  const auto n_frames =
      static_cast<std::uint32_t>(std::floor(config.trajectory.duration() * base + 1e-9)) + 1;
  timeline.frames.reserve(n_frames);

  for (std::uint32_t i = 0; i < n_frames; ++i) {
    const double t = config.trajectory.start_time() + static_cast<double>(i) / base;
    FrameRecord rec;
    rec.index = i;
    rec.time = t;
    rec.segment = config.trajectory.segment_at(t);
    rec.pose = config.trajectory.pose_at(t);
    vmap.set_frame(i);
    if (config.record_sensor_data) rec.sensors.emplace();

    std::vector<FiredCamera> cams;
    for (std::size_t c = 0; c < rig.cameras.size(); ++c) {
      const CameraSpec& spec = rig.cameras[c];
      if (!fires(i, base, spec.rate_hz)) continue;
      rec.fired.push_back(spec.name);
      FiredCamera fc{&spec, rec.pose * spec.mount, {}, {}, {}};
      fc.pose_world.frame_id = "world";
      fc.world_to_cam = fc.pose_world.inverse();
      fc.labels = bleed(render_class_image(scene, fc.pose_world, spec.intrinsics),
                        rig.oracle.bleed_px);
      fc.confidence = to_confidence(fc.labels, rig.oracle, n_cls,
                                    stream_seed(config.seed, {2, i, c}));
      if (rec.sensors) rec.sensors->images.emplace_back(spec.name, fc.labels);
      cams.push_back(std::move(fc));
    }

    std::map<VoxelKey, Observation> obs;
    std::vector<SemanticCloud> clouds;
    const ClassConfidence none = ClassConfidence::none(n_cls);
    for (std::size_t l = 0; l < rig.lidars.size(); ++l) {
      const LidarSpec& spec = rig.lidars[l];
      if (!fires(i, base, spec.rate_hz)) continue;
      rec.fired.push_back(spec.name);
      geometry::Pose sensor = rec.pose * spec.mount;
      sensor.frame_id = "world";
      const LidarScan scan = raycast_lidar(scene, sensor, spec, stream_seed(config.seed, {1, i, l}));
      SemanticCloud cloud(n_cls);
      cloud.reserve(scan.points.size());
      for (std::size_t p = 0; p < scan.points.size(); ++p) {
        const Vec3 world = geometry::transform_point(sensor, scan.points[p]);
        const float range = std::max(static_cast<float>(scan.points[p].norm()),
                                     std::numeric_limits<float>::min());
        std::span<const float> scores = none.scores();
        for (const FiredCamera& fc : cams) {
          const auto px = geometry::project_to_image(
              fc.spec->intrinsics, geometry::transform_point(fc.world_to_cam, world));
          if (!px) continue;
          const auto idx = geometry::nearest_pixel(fc.spec->intrinsics, *px);
          scores = fc.confidence.at(idx.u, idx.v);
          break;
        }
        cloud.push_back(world, scores, range);
        const bool measured = std::isfinite(scores[0]);
        const std::optional<ClassIndex> label =
            measured ? thresholded_argmax(scores, kDefaultClassThreshold) : std::nullopt;
        if (measured) ++rec.stats.semantic_points;
        if (rec.sensors) {
          rec.sensors->points.push_back(world);
          rec.sensors->truth.push_back(scan.truth[p]);
          rec.sensors->label.push_back(label);
        }
        if (!traced(world)) continue;
        Observation& o = obs[vmap.key_of(world)];
        if (measured && range < o.range) {
          o.range = range;
          o.cls = label;
        }
      }
      rec.stats.lidar_points += cloud.size();
      clouds.push_back(std::move(cloud));
    }

    Vec3 water_origin = Vec3::Zero();
    if (rig.stereo) {
      const StereoSpec& st = *rig.stereo;
      const auto cam = std::find_if(cams.begin(), cams.end(),
                                    [&](const FiredCamera& fc) { return fc.spec->name == st.camera; });
      if (cam != cams.end()) {
        const geometry::CameraIntrinsics& intr = cam->spec->intrinsics;
        const auto water = ontology.find("water");
        const auto is_water = [&](int u, int v) {
          return thresholded_argmax(cam->confidence.at(u, v), kDefaultClassThreshold) == water;
        };
        const StereoCloud sc = simulate_stereo(scene, cam->pose_world, intr, st,
                                               stream_seed(config.seed, {3, i}));
        rec.stats.stereo_points = sc.points.size();
        std::vector<Vec3> support;
        for (std::size_t p = 0; p < sc.points.size(); ++p) {
          if (is_water(sc.pixels[p].u, sc.pixels[p].v)) support.push_back(sc.points[p]);
        }
        rec.water.support = support.size();
        if (!support.empty()) {
          try {
            rec.water.plane = geometry::fit_water_plane(support);
            rec.water.status = WaterEstimate::Status::kFitted;
          } catch (const InsufficientDataError&) {
            rec.water.status = WaterEstimate::Status::kInsufficient;
          } catch (const ImplausibleSurfaceError&) {
            rec.water.status = WaterEstimate::Status::kImplausible;
          }
        }
        if (rec.water.plane) {
          const geometry::Plane& plane = *rec.water.plane;
          const Vec3 origin = cam->pose_world.translation;
          water_origin = origin;
          for (int v = 0; v < intr.height; ++v) {
            for (int u = 0; u < intr.width; ++u) {
              if (!is_water(u, v)) continue;
              const Vec3 d = cam->pose_world.rotation * geometry::pixel_ray(intr, u, v);
              const double denom = plane.normal.dot(d);
              if (std::abs(denom) < 1e-12) continue;
              const double s = (plane.offset - plane.normal.dot(origin)) / denom;
              const Vec3 hit = origin + s * d;
              if (!(s > 0.0) || (hit - origin).norm() > st.max_range) continue;
              const VoxelKey k = vmap.key_of(hit);
              rec.water.footprint.push_back({k.x, k.y});
            }
          }
          auto& fp = rec.water.footprint;
          std::sort(fp.begin(), fp.end());
          fp.erase(std::unique(fp.begin(), fp.end()), fp.end());
          for (const ColumnKey& c : fp) {
            const double x = (c.x + 0.5) * res;
            const double y = (c.y + 0.5) * res;
            const Vec3 p(x, y, plane.height_at(x, y));
            const float range = std::max(static_cast<float>((p - origin).norm()),
                                         std::numeric_limits<float>::min());
            Observation& o = obs[vmap.key_of(p)];
            o.injected = true;
            if (range < o.range) {
              o.range = range;
              o.cls = water;
            }
          }
        }
      }
    }

    std::vector<std::pair<VoxelKey, std::optional<map::Voxel>>> before;
    before.reserve(obs.size());
    for (const auto& [k, o] : obs) before.emplace_back(k, vmap.query(k));

    for (const SemanticCloud& cloud : clouds) {
      const map::FusionStats s = vmap.fuse_cloud(cloud);
      rec.stats.voxels_created += s.voxels_created;
      rec.stats.voxel_updates += s.voxel_updates;
      rec.stats.semantic_replacements += s.semantic_replacements;
    }
    if (rec.water.plane && !rec.water.footprint.empty()) {
      rec.water.injected =
          vmap.inject_water_plane(*rec.water.plane, rec.water.footprint, water_origin);
    }

    rec.trace.reserve(obs.size());
    std::size_t b = 0;
    for (const auto& [k, o] : obs) {
      const auto after = vmap.query(k);
      const auto& prev = before[b++].second;
      VoxelTrace row;
      row.key = k;
      row.obs_class = o.cls;
      row.obs_range = o.range;
      row.range_before = prev ? prev->range : kNoRange;
      row.range_after = after ? after->range : kNoRange;
      row.class_before = class_of(prev);
      row.class_after = class_of(after);
      row.hits_after = after ? after->hits : 0;
      row.injected = o.injected;
      rec.trace.push_back(row);
    }

    rec.stats.map_size = vmap.size();
    if (fires(i, base, rig.map_rate_hz)) {
      rec.published = true;
      rec.snapshot = vmap.snapshot();
    }
    timeline.frames.push_back(std::move(rec));
  }
  timeline.final_map = vmap.snapshot();
  return timeline;
}

}  // namespace semvox::sim
