#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semvox/metrics.hpp"
#include "semvox/ontology.hpp"
#include "semvox/sim/scenario.hpp"
#include "semvox/voxel_map.hpp"

namespace semvox::eval {

using map::VoxelKey;

/// Reference labels computed from the scene itself. Each cell is labeled by
/// the scene surface touching the closed cell (objects over water over
/// ground); cells touching no surface are free and carry no label.
class HindsightMap {
 public:
  HindsightMap() = default;
  HindsightMap(semantics::Ontology ontology, double resolution,
               std::map<VoxelKey, std::optional<ClassIndex>> cells);

  const semantics::Ontology& ontology() const { return ontology_; }
  double resolution() const { return resolution_; }
  const std::map<VoxelKey, std::optional<ClassIndex>>& cells() const { return cells_; }
  bool contains(const VoxelKey& k) const { return cells_.count(k) != 0; }
  /// Label of an observed, non-free cell.
  std::optional<ClassIndex> label(const VoxelKey& k) const;
  std::size_t occupied() const;

  friend bool operator==(const HindsightMap&, const HindsightMap&) = default;

 private:
  semantics::Ontology ontology_ = semantics::Ontology::canonical();
  double resolution_ = 0.2;
  std::map<VoxelKey, std::optional<ClassIndex>> cells_;
};

HindsightMap build_hindsight_map(const sim::Scene& scene,
                                 std::span<const VoxelKey> observed_keys,
                                 double resolution);

struct MapIou {
  semantics::ConfusionMatrix confusion;
  /// Percent; no score for classes with an empty union.
  std::vector<std::optional<double>> per_class;
  std::optional<double> mean;
  /// Voxels with a hindsight label and a predicted class.
  std::size_t scored = 0;
  /// Voxels with a hindsight label but no class above the threshold.
  std::size_t unclassified = 0;
};

/// Voxel confusion over keys present in both maps (free cells excluded).
/// Throws ConfigurationError when resolution or ontology differ.
MapIou map_iou(const map::MapSnapshot& map, const HindsightMap& gt,
               float threshold = kDefaultClassThreshold);

/// Cells of every object flagged as a hazard.
std::vector<VoxelKey> hazard_cells(const sim::Scene& scene, double resolution);

struct LatencyOptions {
  /// Fraction of tracked hazard voxels that must hold the true class.
  double coverage = 0.9;
  /// Track only the hazard voxels correctly observed in the first correct
  /// frame instead of every given key.
  bool revealed_only = true;
};

struct LatencyResult {
  enum class Status { kMeasured, kNotObserved, kNotReached };
  Status status = Status::kNotObserved;
  /// Frames between the first correct closer observation and coverage.
  std::optional<std::uint32_t> frames;
  std::optional<std::uint32_t> first_correct_frame;
  std::optional<std::uint32_t> covered_frame;
  std::vector<VoxelKey> tracked;
};

std::string_view to_string(LatencyResult::Status s);

/// Throws PreconditionError for an empty key set.
LatencyResult popup_latency(const sim::ScenarioTimeline& timeline,
                            std::span<const VoxelKey> hazard_keys, const HindsightMap& gt,
                            const LatencyOptions& options = {});

struct StabilityResult {
  std::uint32_t reverse_start = 0;
  std::size_t protected_keys = 0;
  std::size_t violations = 0;
  /// (frame, key) of each violation.
  std::vector<std::pair<std::uint32_t, VoxelKey>> events;
};

/// Counts protected voxel-frames from the first reverse or double-back frame
/// on whose class changes although every observation in that frame is
/// farther than the stored range. Throws PreconditionError when the
/// trajectory has no such segment.
StabilityResult reverse_stability(const sim::ScenarioTimeline& timeline,
                                  std::span<const VoxelKey> protected_keys);
/// Protected keys: traced voxels holding their hindsight class when the
/// reverse segment starts.
StabilityResult reverse_stability(const sim::ScenarioTimeline& timeline,
                                  const HindsightMap& gt);

struct BleedResult {
  std::size_t initially_wrong = 0;
  std::size_t corrected = 0;
  /// corrected / initially_wrong; empty when nothing was initially wrong.
  std::optional<double> rate;
};

/// Among traced voxels whose first class came from an observation at
/// `far_range` or more and was wrong, the fraction holding the true class in
/// the final map.
BleedResult bleed_correction(const sim::ScenarioTimeline& timeline, const HindsightMap& gt,
                             double far_range = 10.0);

struct WaterResult {
  /// Grid columns lying entirely inside a pool.
  std::size_t footprint_columns = 0;
  std::optional<std::uint32_t> first_injection_frame;
  /// Occupied voxels within one cell of the surface in footprint columns
  /// before the first injection.
  std::size_t occupied_before = 0;
  /// Footprint columns whose final map holds a water voxel within one cell
  /// of the true surface.
  std::size_t covered_after = 0;
  std::optional<double> coverage;
  /// Largest |fitted - true| surface height over all fits, taken at the
  /// pool's bounding-box centre.
  std::optional<double> max_offset_error;
  std::size_t fits = 0;
};

WaterResult water_handling(const sim::ScenarioTimeline& timeline);

struct OverhangResult {
  std::size_t slab_voxels = 0;
  std::size_t slab_vegetation = 0;
  std::size_t floor_voxels = 0;
  std::size_t floor_ground = 0;
};

/// Slab voxels must be vegetation; voxels touching the ground directly
/// beneath a slab must be ground or trail.
OverhangResult overhang_separation(const map::MapSnapshot& map, const sim::Scene& scene);

/// All numbers are proxies defined on simulated scenes.
struct FusionReport {
  std::string scenario;
  std::string strategy;
  std::uint64_t seed = 0;
  std::size_t frames = 0;
  std::size_t final_voxels = 0;
  MapIou iou;
  std::optional<LatencyResult> popup;
  std::optional<StabilityResult> reverse;
  BleedResult bleed;
  std::optional<WaterResult> water;
  std::optional<OverhangResult> overhang;
};

/// Runs every metric that applies to the timeline's scene and trajectory.
FusionReport evaluate(const sim::ScenarioTimeline& timeline);

std::string to_json(const FusionReport& report);
std::string csv_header();
std::string to_csv_row(const FusionReport& report);

}  // namespace semvox::eval
