#include "semvox/voxel_map.hpp"

#include <algorithm>
#include <string>

namespace semvox::map {

namespace detail {

Voxel Block::read(int slot, std::size_t n) const {
  Voxel v;
  const auto first = confidence.begin() + static_cast<std::ptrdiff_t>(slot * n);
  v.confidence = ClassConfidence(std::vector<float>(first, first + n));
  const auto ev = evidence.begin() + static_cast<std::ptrdiff_t>(slot * n);
  v.evidence.assign(ev, ev + n);
  v.range = range[slot];
  v.hits = hits[slot];
  v.last_update = last_update[slot];
  return v;
}

}  // namespace detail

using detail::Block;

MapSnapshot MapSnapshot::from_voxels(
    semantics::Ontology ontology, double resolution, FusionStrategy strategy,
    std::span<const std::pair<VoxelKey, Voxel>> voxels, std::uint32_t frame) {
  if (!(resolution > 0.0)) {
    throw ConfigurationError("map resolution must be positive");
  }
  const std::size_t n = ontology.size();
  std::unordered_map<VoxelKey, std::shared_ptr<Block>, VoxelKeyHash> blocks;
  std::size_t size = 0;
  for (const auto& [key, voxel] : voxels) {
    if (voxel.confidence.size() != n || voxel.evidence.size() != n) {
      throw ConfigurationError("voxel class count does not match ontology");
    }
    if (voxel.hits == 0) {
      throw ConfigurationError("stored voxels need at least one hit");
    }
    auto& slot_block = blocks[Block::key_of(key)];
    if (!slot_block) slot_block = std::make_shared<Block>(n);
    Block& b = *slot_block;
    const int s = Block::slot_of(key);
    if (b.hits[s] == 0) {
      ++b.occupied;
      ++size;
    }
    std::copy(voxel.confidence.scores().begin(), voxel.confidence.scores().end(),
              b.confidence.begin() + static_cast<std::ptrdiff_t>(s * n));
    std::copy(voxel.evidence.begin(), voxel.evidence.end(),
              b.evidence.begin() + static_cast<std::ptrdiff_t>(s * n));
    b.range[s] = voxel.range;
    b.hits[s] = voxel.hits;
    b.last_update[s] = voxel.last_update;
    b.last_touched = std::max(b.last_touched, voxel.last_update);
  }
  MapSnapshot snap;
  snap.ontology_ =
      std::make_shared<const semantics::Ontology>(std::move(ontology));
  snap.resolution_ = resolution;
  snap.strategy_ = strategy;
  snap.frame_ = frame;
  snap.size_ = size;
  auto table = std::make_shared<detail::BlockTable>();
  table->reserve(blocks.size());
  for (auto& [k, b] : blocks) table->emplace(k, std::move(b));
  snap.blocks_ = std::move(table);
  return snap;
}

std::optional<Voxel> MapSnapshot::query(const VoxelKey& key) const {
  if (!blocks_) return std::nullopt;
  const auto it = blocks_->find(Block::key_of(key));
  if (it == blocks_->end()) return std::nullopt;
  const int s = Block::slot_of(key);
  if (it->second->hits[s] == 0) return std::nullopt;
  return it->second->read(s, ontology_->size());
}

std::vector<std::pair<VoxelKey, Voxel>> MapSnapshot::voxels() const {
  std::vector<std::pair<VoxelKey, Voxel>> out;
  if (!blocks_) return out;
  out.reserve(size_);
  const std::size_t n = ontology_->size();
  for (const auto& [bk, block] : *blocks_) {
    for (int s = 0; s < Block::kVoxels; ++s) {
      if (block->hits[s] == 0) continue;
      out.emplace_back(Block::voxel_key(bk, s), block->read(s, n));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::vector<VoxelKey> MapSnapshot::keys() const {
  std::vector<VoxelKey> out;
  if (!blocks_) return out;
  out.reserve(size_);
  for (const auto& [bk, block] : *blocks_) {
    for (int s = 0; s < Block::kVoxels; ++s) {
      if (block->hits[s] != 0) out.push_back(Block::voxel_key(bk, s));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

VoxelMap::VoxelMap(semantics::Ontology ontology, MapOptions options)
    : ontology_(std::make_shared<const semantics::Ontology>(std::move(ontology))),
      options_(options) {
  if (!(options_.resolution > 0.0) || !std::isfinite(options_.resolution)) {
    throw ConfigurationError("map resolution must be positive, got " +
                             std::to_string(options_.resolution));
  }
  if (ontology_->size() == 0) {
    throw ConfigurationError("map ontology is empty");
  }
  if (options_.max_voxels && *options_.max_voxels == 0) {
    throw ConfigurationError("max_voxels must be positive when set");
  }
}

VoxelMap::VoxelMap(const VoxelMap& other) {
  std::lock_guard lock(other.mutex_);
  ontology_ = other.ontology_;
  options_ = other.options_;
  frame_ = other.frame_;
  size_ = other.size_;
  blocks_ = other.blocks_;
}

VoxelMap& VoxelMap::operator=(const VoxelMap& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  ontology_ = other.ontology_;
  options_ = other.options_;
  frame_ = other.frame_;
  size_ = other.size_;
  blocks_ = other.blocks_;
  return *this;
}

Block& VoxelMap::writable_block(const VoxelKey& block_key, bool* created) {
  auto [it, inserted] = blocks_.try_emplace(block_key);
  *created = inserted;
  if (inserted) {
    it->second = std::make_shared<Block>(ontology_->size());
  } else if (it->second.use_count() > 1) {
    // Shared with a snapshot or a copied map.
    it->second = std::make_shared<Block>(*it->second);
  }
  return *it->second;
}

namespace {

struct SlotRef {
  Block* block;
  int slot;
};

}  // namespace

FusionStats VoxelMap::fuse_cloud(const SemanticCloud& cloud) {
  if (cloud.num_classes() != ontology_->size()) {
    throw ConfigurationError(
        "cloud has " + std::to_string(cloud.num_classes()) +
        " classes but the map ontology has " +
        std::to_string(ontology_->size()));
  }
  std::lock_guard lock(mutex_);
  FusionStats stats;
  stats.points = cloud.size();
  if (options_.strategy == FusionStrategy::kVote) {
    fuse_votes(cloud, stats);
  } else {
    fuse_pointwise(cloud, stats);
  }
  evict_if_needed(stats);
  return stats;
}

void VoxelMap::fuse_pointwise(const SemanticCloud& cloud, FusionStats& stats) {
  const std::size_t n = ontology_->size();
  const FusionStrategy strategy = options_.strategy;
  Block* cached = nullptr;
  VoxelKey cached_key{};
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const VoxelKey key = key_of(cloud.position(i));
    const VoxelKey bk = Block::key_of(key);
    if (cached == nullptr || bk != cached_key) {
      bool created = false;
      cached = &writable_block(bk, &created);
      cached_key = bk;
    }
    Block& b = *cached;
    const int s = Block::slot_of(key);
    VoxelView view = b.view(s, n);
    if (b.hits[s] == 0) {
      kernel::init(strategy, view);
      ++b.occupied;
      ++size_;
      ++stats.voxels_created;
    } else {
      ++stats.voxel_updates;
    }
    if (kernel::apply(strategy, view, cloud.scores(i), cloud.range(i))) {
      ++stats.semantic_replacements;
    }
    ++b.hits[s];
    b.last_update[s] = frame_;
    b.last_touched = frame_;
  }
}

void VoxelMap::fuse_votes(const SemanticCloud& cloud, FusionStats& stats) {
  const std::size_t n = ontology_->size();
  struct Tally {
    std::vector<float> sum;
    std::vector<std::uint32_t> count;
    std::uint32_t points = 0;
    float min_range = kNoRange;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> index;
  std::vector<std::pair<VoxelKey, Tally>> tallies;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const VoxelKey key = key_of(cloud.position(i));
    auto [it, inserted] = index.try_emplace(key, tallies.size());
    if (inserted) {
      tallies.emplace_back(key, Tally{std::vector<float>(n, 0.0f),
                                      std::vector<std::uint32_t>(n, 0), 0,
                                      kNoRange});
    }
    Tally& t = tallies[it->second].second;
    ++t.points;
    const auto scores = cloud.scores(i);
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!is_measured(scores[j])) continue;
      t.sum[j] += scores[j];
      ++t.count[j];
      any = true;
    }
    if (any) t.min_range = std::min(t.min_range, cloud.range(i));
  }
  std::vector<float> mean(n);
  for (const auto& [key, t] : tallies) {
    bool created = false;
    Block& b = writable_block(Block::key_of(key), &created);
    const int s = Block::slot_of(key);
    VoxelView view = b.view(s, n);
    if (b.hits[s] == 0) {
      kernel::init(FusionStrategy::kVote, view);
      ++b.occupied;
      ++size_;
      ++stats.voxels_created;
    } else {
      ++stats.voxel_updates;
    }
    for (std::size_t j = 0; j < n; ++j) {
      mean[j] = t.count[j] > 0 ? t.sum[j] / static_cast<float>(t.count[j])
                               : kNoMeasurement;
    }
    if (kernel::vote(view, mean, t.min_range)) ++stats.semantic_replacements;
    b.hits[s] += t.points;
    b.last_update[s] = frame_;
    b.last_touched = frame_;
  }
}

void VoxelMap::evict_if_needed(FusionStats& stats) {
  if (!options_.max_voxels || size_ <= *options_.max_voxels) return;
  std::vector<std::pair<std::uint32_t, VoxelKey>> order;
  order.reserve(blocks_.size());
  for (const auto& [k, b] : blocks_) order.emplace_back(b->last_touched, k);
  std::sort(order.begin(), order.end());
  for (const auto& [touched, k] : order) {
    if (size_ <= *options_.max_voxels) break;
    const auto it = blocks_.find(k);
    size_ -= it->second->occupied;
    stats.voxels_evicted += it->second->occupied;
    blocks_.erase(it);
  }
}

std::size_t VoxelMap::inject_water_plane(const geometry::Plane& plane,
                                         std::span<const ColumnKey> footprint,
                                         const Vec3& sensor_origin) {
  const auto water = ontology_->find("water");
  if (!water) {
    throw ConfigurationError("map ontology has no 'water' class");
  }
  if (std::abs(plane.normal.z()) < 1e-9) {
    throw ConfigurationError("cannot inject a vertical plane");
  }
  const std::size_t n = ontology_->size();
  const auto one_hot = ClassConfidence::one_hot(n, *water, 1.0f);
  std::lock_guard lock(mutex_);
  std::size_t written = 0;
  const double res = options_.resolution;
  for (const ColumnKey& c : footprint) {
    const double x = (c.x + 0.5) * res;
    const double y = (c.y + 0.5) * res;
    const Vec3 p(x, y, plane.height_at(x, y));
    const VoxelKey key = key_of(p);
    bool created = false;
    Block& b = writable_block(Block::key_of(key), &created);
    const int s = Block::slot_of(key);
    VoxelView view = b.view(s, n);
    if (b.hits[s] == 0) {
      kernel::init(options_.strategy, view);
      b.hits[s] = 1;
      ++b.occupied;
      ++size_;
    }
    const float range =
        std::max(static_cast<float>((p - sensor_origin).norm()),
                 std::numeric_limits<float>::min());
    kernel::apply(options_.strategy, view, one_hot.scores(), range);
    b.last_update[s] = frame_;
    b.last_touched = frame_;
    ++written;
  }
  return written;
}

std::optional<Voxel> VoxelMap::query(const VoxelKey& key) const {
  std::lock_guard lock(mutex_);
  const auto it = blocks_.find(Block::key_of(key));
  if (it == blocks_.end()) return std::nullopt;
  const int s = Block::slot_of(key);
  if (it->second->hits[s] == 0) return std::nullopt;
  return it->second->read(s, ontology_->size());
}

MapSnapshot VoxelMap::snapshot() const {
  auto table = std::make_shared<detail::BlockTable>();
  MapSnapshot snap;
  std::lock_guard lock(mutex_);
  table->reserve(blocks_.size());
  for (const auto& [k, b] : blocks_) table->emplace(k, b);
  snap.ontology_ = ontology_;
  snap.resolution_ = options_.resolution;
  snap.strategy_ = options_.strategy;
  snap.frame_ = frame_;
  snap.size_ = size_;
  snap.blocks_ = std::move(table);
  return snap;
}

std::uint32_t VoxelMap::frame() const {
  std::lock_guard lock(mutex_);
  return frame_;
}

void VoxelMap::set_frame(std::uint32_t frame) {
  std::lock_guard lock(mutex_);
  frame_ = frame;
}

std::size_t VoxelMap::size() const {
  std::lock_guard lock(mutex_);
  return size_;
}

}  // namespace semvox::map
