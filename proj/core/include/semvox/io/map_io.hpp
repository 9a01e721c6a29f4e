#pragma once

#include <filesystem>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semvox/voxel_map.hpp"

namespace semvox::io {

/// Delimiter-separated map dump: a `#` comment line carrying resolution and
/// strategy, a header `ix,iy,iz,<class names>,range,hits`, then one row per
/// voxel sorted by key. Floats use %.9g, so values round-trip exactly.
void write_map_dump(std::ostream& os, const semantics::Ontology& ontology, double resolution,
                    map::FusionStrategy strategy,
                    std::span<const std::pair<map::VoxelKey, map::Voxel>> voxels);
void write_map_dump(std::ostream& os, const map::MapSnapshot& snapshot);
void write_map_dump(const std::filesystem::path& path, const map::MapSnapshot& snapshot);

/// Strategy evidence and update frames are not part of the dump and load as
/// NaN / 0.
map::MapSnapshot read_map_dump(std::istream& is);
map::MapSnapshot read_map_dump(const std::filesystem::path& path);

enum class PlyFormat { kAscii, kBinary };

/// One vertex per voxel centre with colour, class (255 when unclassified),
/// the class confidence, range and hits.
void write_ply(std::ostream& os, const map::MapSnapshot& snapshot, PlyFormat format);
void write_ply(const std::filesystem::path& path, const map::MapSnapshot& snapshot,
               PlyFormat format);

/// Display colour of a canonical class.
std::array<std::uint8_t, 3> class_color(std::optional<ClassIndex> cls);

}  // namespace semvox::io
