#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "semvox/common.hpp"
#include "semvox/semantic_types.hpp"

namespace semvox::map {

enum class FusionStrategy : std::uint8_t {
  kRangeBased,
  kBayesian,
  kVote,
  kAverage,
};

inline constexpr FusionStrategy kAllStrategies[] = {
    FusionStrategy::kRangeBased, FusionStrategy::kBayesian,
    FusionStrategy::kVote, FusionStrategy::kAverage};

std::string_view to_string(FusionStrategy s);
/// Accepts "range_based", "bayesian", "vote", "average".
std::optional<FusionStrategy> parse_strategy(std::string_view name);

struct VoxelKey {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;
  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

/// Grid column (x, y) of voxel keys.
struct ColumnKey {
  std::int32_t x = 0;
  std::int32_t y = 0;
  friend auto operator<=>(const ColumnKey&, const ColumnKey&) = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.x)) << 42) ^
                      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.y)) << 21) ^
                      static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.z));
    // splitmix64 finalizer
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return static_cast<std::size_t>(h);
  }
};

struct ColumnKeyHash {
  std::size_t operator()(const ColumnKey& k) const noexcept {
    return VoxelKeyHash{}(VoxelKey{k.x, k.y, 0});
  }
};

/// One stored grid cell.
///
/// `range` is the smallest capture range of any semantic measurement fused
/// into the cell (infinity while the cell only holds geometry). `evidence`
/// is per-class strategy state:
///   range_based  capture range of the currently held class confidence
///   bayesian     clamped log-odds (NaN until the class is measured)
///   vote         number of votes won by the class
///   average      number of samples in the class mean
struct Voxel {
  ClassConfidence confidence;
  std::vector<float> evidence;
  float range = kNoRange;
  std::uint32_t hits = 0;
  std::uint32_t last_update = 0;

  friend bool operator==(const Voxel& a, const Voxel& b);
};

/// Mutable view over a voxel's storage; kernels operate on views so block
/// storage and the Voxel value type share one implementation.
struct VoxelView {
  std::span<float> confidence;
  std::span<float> evidence;
  float& range;
  std::uint32_t& hits;
};

namespace kernel {

/// Resets storage to the empty state for `strategy`.
void init(FusionStrategy strategy, VoxelView v);

/// Each returns true when a stored confidence entry changed. None of them
/// touch `hits`.
bool range_based(VoxelView v, std::span<const float> incoming, float range);
bool bayesian(VoxelView v, std::span<const float> incoming, float range);
/// Casts one vote for the incoming argmax (lowest index on ties).
bool vote(VoxelView v, std::span<const float> incoming, float range);
bool average(VoxelView v, std::span<const float> incoming, float range);

bool apply(FusionStrategy strategy, VoxelView v,
           std::span<const float> incoming, float range);

inline constexpr float kBayesLogOddsClamp = 10.0f;
inline constexpr float kBayesProbabilityClamp = 1e-4f;

}  // namespace kernel

/// Value-level fusion of one measurement; an empty `voxel` is a fresh cell.
/// Each adds one hit. Throws InvalidMeasurementError for a non-positive
/// range or a confidence vector whose length disagrees with the voxel.
Voxel fuse_point(FusionStrategy strategy, const std::optional<Voxel>& voxel,
                 const ClassConfidence& incoming, float incoming_range);
Voxel fuse_point_range_based(const std::optional<Voxel>& voxel,
                             const ClassConfidence& incoming,
                             float incoming_range);
Voxel fuse_point_bayesian(const std::optional<Voxel>& voxel,
                          const ClassConfidence& incoming,
                          float incoming_range);
Voxel fuse_point_vote(const std::optional<Voxel>& voxel,
                      const ClassConfidence& incoming, float incoming_range);
Voxel fuse_point_average(const std::optional<Voxel>& voxel,
                         const ClassConfidence& incoming,
                         float incoming_range);

/// The voxel's class under the 0.5 confidence rule.
std::optional<ClassIndex> argmax_class(const Voxel& voxel,
                                       float threshold = kDefaultClassThreshold);

}  // namespace semvox::map
