#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semvox/common.hpp"
#include "semvox/geometry.hpp"
#include "semvox/ontology.hpp"
#include "semvox/semantic_types.hpp"
#include "semvox/voxel.hpp"

namespace semvox::map {

namespace detail {

/// 4x4x4 cells of dense storage. Slots with zero hits are empty.
struct Block {
  static constexpr int kShift = 2;
  static constexpr int kEdge = 1 << kShift;
  static constexpr int kMask = kEdge - 1;
  static constexpr int kVoxels = kEdge * kEdge * kEdge;

  explicit Block(std::size_t num_classes)
      : confidence(kVoxels * num_classes), evidence(kVoxels * num_classes) {
    range.fill(kNoRange);
    hits.fill(0);
    last_update.fill(0);
  }

  static VoxelKey key_of(const VoxelKey& k) {
    return {k.x >> kShift, k.y >> kShift, k.z >> kShift};
  }
  static int slot_of(const VoxelKey& k) {
    return (k.x & kMask) | ((k.y & kMask) << kShift) |
           ((k.z & kMask) << (2 * kShift));
  }
  static VoxelKey voxel_key(const VoxelKey& block, int slot) {
    return {(block.x << kShift) | (slot & kMask),
            (block.y << kShift) | ((slot >> kShift) & kMask),
            (block.z << kShift) | ((slot >> (2 * kShift)) & kMask)};
  }

  VoxelView view(int slot, std::size_t n) {
    return {std::span<float>(confidence.data() + slot * n, n),
            std::span<float>(evidence.data() + slot * n, n), range[slot],
            hits[slot]};
  }
  Voxel read(int slot, std::size_t n) const;

  std::vector<float> confidence;
  std::vector<float> evidence;
  std::array<float, kVoxels> range;
  std::array<std::uint32_t, kVoxels> hits;
  std::array<std::uint32_t, kVoxels> last_update;
  std::uint32_t occupied = 0;
  std::uint32_t last_touched = 0;
};

using BlockTable =
    std::unordered_map<VoxelKey, std::shared_ptr<const Block>, VoxelKeyHash>;

}  // namespace detail

struct MapOptions {
  double resolution = 0.2;
  FusionStrategy strategy = FusionStrategy::kRangeBased;
  /// Least-recently-updated blocks are evicted beyond this many voxels.
  std::optional<std::size_t> max_voxels;
};

struct FusionStats {
  std::size_t points = 0;
  std::size_t voxels_created = 0;
  /// Fusions into voxels that were already stored.
  std::size_t voxel_updates = 0;
  /// Fusions that changed at least one stored confidence entry.
  std::size_t semantic_replacements = 0;
  std::size_t voxels_evicted = 0;
};

/// Floor binning shared by maps and snapshots.
inline VoxelKey key_of(double resolution, const Vec3& p) {
  return {static_cast<std::int32_t>(std::floor(p.x() / resolution)),
          static_cast<std::int32_t>(std::floor(p.y() / resolution)),
          static_cast<std::int32_t>(std::floor(p.z() / resolution))};
}
inline Vec3 center_of(double resolution, const VoxelKey& k) {
  return {(k.x + 0.5) * resolution, (k.y + 0.5) * resolution,
          (k.z + 0.5) * resolution};
}

/// Immutable point-in-time copy of a VoxelMap. Shares unchanged blocks with
/// the map and with other snapshots; safe to read from any thread.
class MapSnapshot {
 public:
  MapSnapshot() = default;

  /// Builds a snapshot from explicit voxels (e.g. a loaded dump).
  static MapSnapshot from_voxels(
      semantics::Ontology ontology, double resolution,
      FusionStrategy strategy,
      std::span<const std::pair<VoxelKey, Voxel>> voxels,
      std::uint32_t frame = 0);

  const semantics::Ontology& ontology() const { return *ontology_; }
  double resolution() const { return resolution_; }
  FusionStrategy strategy() const { return strategy_; }
  std::uint32_t frame() const { return frame_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  VoxelKey key_of(const Vec3& p) const { return map::key_of(resolution_, p); }
  Vec3 center_of(const VoxelKey& k) const {
    return map::center_of(resolution_, k);
  }

  std::optional<Voxel> query(const VoxelKey& key) const;
  /// All voxels sorted by key.
  std::vector<std::pair<VoxelKey, Voxel>> voxels() const;
  std::vector<VoxelKey> keys() const;

 private:
  friend class VoxelMap;

  std::shared_ptr<const semantics::Ontology> ontology_;
  double resolution_ = 0.0;
  FusionStrategy strategy_ = FusionStrategy::kRangeBased;
  std::uint32_t frame_ = 0;
  std::size_t size_ = 0;
  std::shared_ptr<const detail::BlockTable> blocks_;
};

/// Sparse semantic voxel map.
///
/// One writer at a time; fuse_cloud() and snapshot() serialize on an
/// internal mutex so readers on other threads may take snapshots while a
/// writer fuses. Blocks are copy-on-write, so a snapshot costs one pass over
/// the block table and later writes clone only the blocks they touch.
class VoxelMap {
 public:
  explicit VoxelMap(semantics::Ontology ontology, MapOptions options = {});
  VoxelMap(const VoxelMap& other);
  VoxelMap& operator=(const VoxelMap& other);

  const semantics::Ontology& ontology() const { return *ontology_; }
  double resolution() const { return options_.resolution; }
  FusionStrategy strategy() const { return options_.strategy; }
  const MapOptions& options() const { return options_; }

  VoxelKey key_of(const Vec3& p) const {
    return map::key_of(options_.resolution, p);
  }
  Vec3 center_of(const VoxelKey& k) const {
    return map::center_of(options_.resolution, k);
  }

  /// Frame index stamped into `last_update` by subsequent fusions.
  std::uint32_t frame() const;
  void set_frame(std::uint32_t frame);

  /// Bins and fuses every point. Range-based, Bayesian and average fuse per
  /// point; vote casts one vote per voxel per cloud using the mean of the
  /// cloud's measured confidences in that voxel. Throws ConfigurationError
  /// when the cloud's class count differs from the ontology.
  FusionStats fuse_cloud(const SemanticCloud& cloud);

  /// Writes a water measurement (confidence 1, other classes 0) into the
  /// cell holding the plane height at each column centre, at the distance
  /// from `sensor_origin`. New cells count one hit; existing cells keep
  /// their hit count. Returns the number of cells written.
  std::size_t inject_water_plane(const geometry::Plane& plane,
                                 std::span<const ColumnKey> footprint,
                                 const Vec3& sensor_origin);

  std::optional<Voxel> query(const VoxelKey& key) const;
  MapSnapshot snapshot() const;
  std::size_t size() const;

 private:
  detail::Block& writable_block(const VoxelKey& block_key, bool* created);
  void evict_if_needed(FusionStats& stats);
  void fuse_pointwise(const SemanticCloud& cloud, FusionStats& stats);
  void fuse_votes(const SemanticCloud& cloud, FusionStats& stats);

  std::shared_ptr<const semantics::Ontology> ontology_;
  MapOptions options_;
  std::uint32_t frame_ = 0;
  std::size_t size_ = 0;
  std::unordered_map<VoxelKey, std::shared_ptr<detail::Block>, VoxelKeyHash>
      blocks_;
  mutable std::mutex mutex_;
};

}  // namespace semvox::map
