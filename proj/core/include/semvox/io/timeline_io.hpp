#pragma once

#include <filesystem>

#include "semvox/sim/scenario.hpp"

namespace semvox::io {

/// Writes a timeline directory:
///   manifest.json          configuration echo, ontology and per-frame records
///   trace.csv              per-frame voxel trace rows
///   maps/frame_NNNNNN.csv  map dump of the voxels updated since the previous
///                          published frame, for every published frame
///   final_map.csv          the final map
///   clouds/frame_NNNNNN.csv  LiDAR points with truth and fused label, when
///                          sensor data was recorded
/// Output depends only on the timeline (no clock values).
void write_timeline(const sim::ScenarioTimeline& timeline, const std::filesystem::path& dir);

/// Reads a directory written by write_timeline. Published snapshots are
/// rebuilt from the incremental dumps; sensor data is not reloaded.
sim::ScenarioTimeline read_timeline(const std::filesystem::path& dir);

}  // namespace semvox::io
