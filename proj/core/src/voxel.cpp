#include "semvox/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace semvox::map {
namespace {

bool same_float(float a, float b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

void note_range(VoxelView v, float range) {
  if (range < v.range) v.range = range;
}

}  // namespace

std::string_view to_string(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::kRangeBased: return "range_based";
    case FusionStrategy::kBayesian: return "bayesian";
    case FusionStrategy::kVote: return "vote";
    case FusionStrategy::kAverage: return "average";
  }
  return "unknown";
}

std::optional<FusionStrategy> parse_strategy(std::string_view name) {
  for (FusionStrategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

bool operator==(const Voxel& a, const Voxel& b) {
  if (!(a.confidence == b.confidence)) return false;
  if (a.evidence.size() != b.evidence.size()) return false;
  for (std::size_t j = 0; j < a.evidence.size(); ++j) {
    if (!same_float(a.evidence[j], b.evidence[j])) return false;
  }
  return same_float(a.range, b.range) && a.hits == b.hits &&
         a.last_update == b.last_update;
}

namespace kernel {

void init(FusionStrategy strategy, VoxelView v) {
  std::fill(v.confidence.begin(), v.confidence.end(), kNoMeasurement);
  float e = 0.0f;
  switch (strategy) {
    case FusionStrategy::kRangeBased: e = kNoRange; break;
    case FusionStrategy::kBayesian: e = kNoMeasurement; break;
    case FusionStrategy::kVote:
    case FusionStrategy::kAverage: e = 0.0f; break;
  }
  std::fill(v.evidence.begin(), v.evidence.end(), e);
  v.range = kNoRange;
  v.hits = 0;
}

bool range_based(VoxelView v, std::span<const float> incoming, float range) {
  bool changed = false;
  bool any = false;
  for (std::size_t j = 0; j < incoming.size(); ++j) {
    const float c = incoming[j];
    if (!is_measured(c)) continue;
    any = true;
    // Keep the held value when it was captured at the same or a closer range.
    if (range < v.evidence[j]) {
      changed |= !(v.confidence[j] == c);
      v.confidence[j] = c;
      v.evidence[j] = range;
    }
  }
  if (any) note_range(v, range);
  return changed;
}

bool bayesian(VoxelView v, std::span<const float> incoming, float range) {
  bool changed = false;
  bool any = false;
  for (std::size_t j = 0; j < incoming.size(); ++j) {
    if (!is_measured(incoming[j])) continue;
    any = true;
    const float p = std::clamp(incoming[j], kBayesProbabilityClamp,
                               1.0f - kBayesProbabilityClamp);
    const float prior = is_measured(v.evidence[j]) ? v.evidence[j] : 0.0f;
    const float l = std::clamp(prior + std::log(p / (1.0f - p)),
                               -kBayesLogOddsClamp, kBayesLogOddsClamp);
    const float c = 1.0f / (1.0f + std::exp(-l));
    changed |= !(v.confidence[j] == c);
    v.evidence[j] = l;
    v.confidence[j] = c;
  }
  if (any) note_range(v, range);
  return changed;
}

bool vote(VoxelView v, std::span<const float> incoming, float range) {
  std::optional<std::size_t> winner;
  for (std::size_t j = 0; j < incoming.size(); ++j) {
    if (!is_measured(incoming[j])) continue;
    if (!winner || incoming[j] > incoming[*winner]) winner = j;
  }
  if (!winner) return false;
  v.evidence[*winner] += 1.0f;
  float total = 0.0f;
  for (float e : v.evidence) total += e;
  bool changed = false;
  for (std::size_t j = 0; j < v.confidence.size(); ++j) {
    const float c = v.evidence[j] / total;
    changed |= !(v.confidence[j] == c);
    v.confidence[j] = c;
  }
  note_range(v, range);
  return changed;
}

bool average(VoxelView v, std::span<const float> incoming, float range) {
  bool changed = false;
  bool any = false;
  for (std::size_t j = 0; j < incoming.size(); ++j) {
    if (!is_measured(incoming[j])) continue;
    any = true;
    const float n = v.evidence[j];
    const float mean = n > 0.0f ? v.confidence[j] : 0.0f;
    const float c = mean + (incoming[j] - mean) / (n + 1.0f);
    changed |= !(v.confidence[j] == c);
    v.confidence[j] = c;
    v.evidence[j] = n + 1.0f;
  }
  if (any) note_range(v, range);
  return changed;
}

bool apply(FusionStrategy strategy, VoxelView v,
           std::span<const float> incoming, float range) {
  switch (strategy) {
    case FusionStrategy::kRangeBased: return range_based(v, incoming, range);
    case FusionStrategy::kBayesian: return bayesian(v, incoming, range);
    case FusionStrategy::kVote: return vote(v, incoming, range);
    case FusionStrategy::kAverage: return average(v, incoming, range);
  }
  return false;
}

}  // namespace kernel

Voxel fuse_point(FusionStrategy strategy, const std::optional<Voxel>& voxel,
                 const ClassConfidence& incoming, float incoming_range) {
  if (!(incoming_range > 0.0f) || std::isnan(incoming_range)) {
    throw InvalidMeasurementError("measurement range must be positive, got " +
                                  std::to_string(incoming_range));
  }
  const std::size_t n = incoming.size();
  Voxel out;
  std::vector<float> conf;
  if (voxel) {
    if (voxel->confidence.size() != n || voxel->evidence.size() != n) {
      throw InvalidMeasurementError("confidence length does not match voxel");
    }
    out = *voxel;
    conf.assign(out.confidence.scores().begin(), out.confidence.scores().end());
  } else {
    conf.resize(n);
    out.evidence.resize(n);
    kernel::init(strategy, VoxelView{conf, out.evidence, out.range, out.hits});
  }
  kernel::apply(strategy, VoxelView{conf, out.evidence, out.range, out.hits},
                incoming.scores(), incoming_range);
  out.confidence = ClassConfidence(std::move(conf));
  out.hits += 1;
  return out;
}

Voxel fuse_point_range_based(const std::optional<Voxel>& voxel,
                             const ClassConfidence& incoming,
                             float incoming_range) {
  return fuse_point(FusionStrategy::kRangeBased, voxel, incoming,
                    incoming_range);
}

Voxel fuse_point_bayesian(const std::optional<Voxel>& voxel,
                          const ClassConfidence& incoming,
                          float incoming_range) {
  return fuse_point(FusionStrategy::kBayesian, voxel, incoming,
                    incoming_range);
}

Voxel fuse_point_vote(const std::optional<Voxel>& voxel,
                      const ClassConfidence& incoming, float incoming_range) {
  return fuse_point(FusionStrategy::kVote, voxel, incoming, incoming_range);
}

Voxel fuse_point_average(const std::optional<Voxel>& voxel,
                         const ClassConfidence& incoming,
                         float incoming_range) {
  return fuse_point(FusionStrategy::kAverage, voxel, incoming,
                    incoming_range);
}

std::optional<ClassIndex> argmax_class(const Voxel& voxel, float threshold) {
  return thresholded_argmax(voxel.confidence.scores(), threshold);
}

}  // namespace semvox::map
