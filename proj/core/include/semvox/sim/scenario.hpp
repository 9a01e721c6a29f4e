#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semvox/geometry.hpp"
#include "semvox/voxel_map.hpp"
#include "semvox/sim/scene.hpp"
#include "semvox/sim/sensors.hpp"
#include "semvox/sim/trajectory.hpp"

namespace semvox::sim {

/// Pre-loads `votes` one-hot measurements of `cls` at `range` into every
/// cell of the named scene object before the first frame (each measurement
/// is its own cloud, so the vote strategy counts `votes` votes).
struct PriorVotes {
  std::string object;
  ClassIndex cls = 0;
  int votes = 1;
  double range = 30.0;
};

struct ScenarioConfig {
  Scene scene;
  Trajectory trajectory;
  SensorRig rig;
  map::FusionStrategy strategy = map::FusionStrategy::kRangeBased;
  std::uint64_t seed = 0;
  double resolution = 0.2;
  /// Overrides the rig's map publication rate.
  std::optional<double> map_rate_hz;
  /// Keep per-frame LiDAR points and class images in the timeline.
  bool record_sensor_data = false;
  /// Voxels within this distance of an object or pool are traced per frame.
  double trace_margin = 1.0;
  std::vector<PriorVotes> priors;

  /// Rig with the map-rate override applied.
  SensorRig effective_rig() const;
  /// Throws ConfigurationError naming the offending field.
  void validate() const;
};

/// Per-frame change record of one traced voxel. `obs_*` describe the
/// closest semantic measurement fused into it during the frame (none for
/// geometry-only points); `*_before` is the state at the start of the frame.
struct VoxelTrace {
  map::VoxelKey key;
  std::optional<ClassIndex> obs_class;
  float obs_range = kNoRange;
  float range_before = kNoRange;
  float range_after = kNoRange;
  std::optional<ClassIndex> class_before;
  std::optional<ClassIndex> class_after;
  std::uint32_t hits_after = 0;
  bool injected = false;
};

struct WaterEstimate {
  enum class Status { kNotAttempted, kInsufficient, kImplausible, kFitted };
  Status status = Status::kNotAttempted;
  std::optional<geometry::Plane> plane;
  /// Water-labeled stereo points handed to the fit.
  std::size_t support = 0;
  std::vector<map::ColumnKey> footprint;
  std::size_t injected = 0;
};

std::string_view to_string(WaterEstimate::Status s);
std::optional<WaterEstimate::Status> parse_water_status(std::string_view name);

struct FrameStats {
  std::size_t lidar_points = 0;
  std::size_t semantic_points = 0;
  std::size_t stereo_points = 0;
  std::size_t voxels_created = 0;
  std::size_t voxel_updates = 0;
  std::size_t semantic_replacements = 0;
  std::size_t map_size = 0;
};

struct SensorData {
  /// World-frame LiDAR points with oracle truth and the fused label
  /// (none where no camera covered the point).
  std::vector<Vec3> points;
  std::vector<ClassIndex> truth;
  std::vector<std::optional<ClassIndex>> label;
  std::vector<std::pair<std::string, ClassImage>> images;
};

struct FrameRecord {
  std::uint32_t index = 0;
  double time = 0.0;
  Segment segment = Segment::kForward;
  geometry::Pose pose;
  bool published = false;
  std::vector<std::string> fired;
  WaterEstimate water;
  FrameStats stats;
  /// Sorted by key.
  std::vector<VoxelTrace> trace;
  std::optional<map::MapSnapshot> snapshot;
  std::optional<SensorData> sensors;
};

struct ScenarioTimeline {
  ScenarioConfig config;
  int base_rate_hz = 0;
  std::vector<FrameRecord> frames;
  map::MapSnapshot final_map;
};

/// Steps the trajectory at the least common multiple of the sensor and map
/// rates. Per frame: fired cameras render oracle semantics; each fired LiDAR
/// is labeled from the first fired camera (rig order) that sees the point
/// and fused; when the stereo camera fires, water-labeled stereo points fit a
/// plane that is injected over the water pixels' footprint; published frames
/// snapshot the map. Deterministic in the configuration and seed.
ScenarioTimeline run_scenario(const ScenarioConfig& config);

/// Cells of the closed box `box` at `resolution` (cells sharing only a face
/// included).
std::vector<map::VoxelKey> cells_of(const Aabb& box, double resolution);

}  // namespace semvox::sim
