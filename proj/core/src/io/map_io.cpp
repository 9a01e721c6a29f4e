#include "semvox/io/map_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "format.hpp"

namespace semvox::io {
namespace {

using detail::format_float;

constexpr std::string_view kDumpTag = "# semvox map dump";

std::string header_value(const std::string& line, const std::string& key) {
  const std::string needle = " " + key + "=";
  const auto pos = line.find(needle);
  if (pos == std::string::npos) {
    throw ConfigurationError("map dump header lacks '" + key + "'");
  }
  const auto start = pos + needle.size();
  return line.substr(start, line.find(' ', start) - start);
}

float voxel_confidence(const map::Voxel& v, std::optional<ClassIndex> cls) {
  if (!cls) return kNoMeasurement;
  return v.confidence.scores()[*cls];
}

template <class T>
void put(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little, "PLY writer assumes little endian");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  os.write(buf, sizeof(T));
}

}  // namespace

void write_map_dump(std::ostream& os, const semantics::Ontology& ontology, double resolution,
                    map::FusionStrategy strategy,
                    std::span<const std::pair<map::VoxelKey, map::Voxel>> voxels) {
  os << kDumpTag << " resolution=" << format_float(resolution)
     << " strategy=" << map::to_string(strategy) << '\n';
  os << "ix,iy,iz";
  for (const auto& n : ontology.names()) os << ',' << n;
  os << ",range,hits\n";
  std::string row;
  for (const auto& [k, v] : voxels) {
    row.clear();
    row += std::to_string(k.x) + ',' + std::to_string(k.y) + ',' + std::to_string(k.z);
    for (float c : v.confidence.scores()) row += ',' + format_float(c);
    row += ',' + format_float(v.range) + ',' + std::to_string(v.hits) + '\n';
    os << row;
  }
}

void write_map_dump(std::ostream& os, const map::MapSnapshot& snapshot) {
  const auto voxels = snapshot.voxels();
  write_map_dump(os, snapshot.ontology(), snapshot.resolution(), snapshot.strategy(), voxels);
}

void write_map_dump(const std::filesystem::path& path, const map::MapSnapshot& snapshot) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write '" + path.string() + "'");
  write_map_dump(out, snapshot);
  if (!out) throw ConfigurationError("failed writing '" + path.string() + "'");
}

map::MapSnapshot read_map_dump(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind(kDumpTag, 0) != 0) {
    throw ConfigurationError("not a map dump: missing '" + std::string(kDumpTag) + "' line");
  }
  const double resolution =
      detail::parse_double(header_value(line, "resolution"), "map dump resolution");
  const std::string strategy_name = header_value(line, "strategy");
  const auto strategy = map::parse_strategy(strategy_name);
  if (!strategy) throw ConfigurationError("map dump: unknown strategy '" + strategy_name + "'");

  if (!std::getline(is, line)) throw ConfigurationError("map dump: missing column header");
  const auto cols = detail::split(line, ',');
  if (cols.size() < 7 || cols[0] != "ix" || cols[1] != "iy" || cols[2] != "iz" ||
      cols[cols.size() - 2] != "range" || cols.back() != "hits") {
    throw ConfigurationError("map dump: malformed column header");
  }
  std::vector<std::string> names(cols.begin() + 3, cols.end() - 2);
  semantics::Ontology ontology(std::move(names));
  const std::size_t n = ontology.size();

  std::vector<std::pair<map::VoxelKey, map::Voxel>> voxels;
  std::size_t line_no = 2;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "map dump line " + std::to_string(line_no);
    const auto f = detail::split(line, ',');
    if (f.size() != cols.size()) {
      throw ConfigurationError(where + ": expected " + std::to_string(cols.size()) + " fields");
    }
    map::VoxelKey k{static_cast<std::int32_t>(detail::parse_int(f[0], where)),
                    static_cast<std::int32_t>(detail::parse_int(f[1], where)),
                    static_cast<std::int32_t>(detail::parse_int(f[2], where))};
    std::vector<float> scores(n);
    for (std::size_t c = 0; c < n; ++c) scores[c] = detail::parse_float(f[3 + c], where);
    map::Voxel v;
    try {
      v.confidence = ClassConfidence(std::move(scores));
    } catch (const InvalidMeasurementError& e) {
      throw ConfigurationError(where + ": " + e.what());
    }
    v.evidence.assign(n, kNoMeasurement);
    v.range = detail::parse_float(f[3 + n], where);
    const long long hits = detail::parse_int(f[4 + n], where);
    if (hits <= 0) throw ConfigurationError(where + ": hits must be positive");
    v.hits = static_cast<std::uint32_t>(hits);
    voxels.emplace_back(k, std::move(v));
  }
  return map::MapSnapshot::from_voxels(std::move(ontology), resolution, *strategy, voxels);
}

map::MapSnapshot read_map_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read '" + path.string() + "'");
  try {
    return read_map_dump(in);
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
}

std::array<std::uint8_t, 3> class_color(std::optional<ClassIndex> cls) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 10> kPalette = {{
      {139, 115, 85},   // ground
      {205, 170, 125},  // trail
      {124, 252, 0},    // grass
      {189, 183, 107},  // dry vegetation
      {34, 139, 34},    // lush vegetation
      {101, 67, 33},    // trunk
      {160, 82, 45},    // log
      {255, 0, 0},      // obstacle / rock
      {0, 105, 255},    // water
      {135, 206, 235},  // sky
  }};
  if (!cls) return {128, 128, 128};
  return kPalette[*cls % kPalette.size()];
}

void write_ply(std::ostream& os, const map::MapSnapshot& snapshot, PlyFormat format) {
  const auto voxels = snapshot.voxels();
  os << "ply\n"
     << (format == PlyFormat::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n")
     << "comment semvox voxel map resolution=" << format_float(snapshot.resolution())
     << " strategy=" << map::to_string(snapshot.strategy()) << '\n';
  for (std::size_t c = 0; c < snapshot.ontology().size(); ++c) {
    os << "comment class " << c << ' ' << snapshot.ontology().name(static_cast<ClassIndex>(c))
       << '\n';
  }
  os << "element vertex " << voxels.size() << '\n'
     << "property float x\nproperty float y\nproperty float z\n"
     << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
     << "property uchar class\nproperty float confidence\nproperty float range\n"
     << "property uint hits\nend_header\n";
  for (const auto& [k, v] : voxels) {
    const Vec3 c = snapshot.center_of(k);
    const auto cls = map::argmax_class(v);
    const auto rgb = class_color(cls);
    const std::uint8_t cls_byte = cls ? *cls : 255;
    const float conf = voxel_confidence(v, cls);
    if (format == PlyFormat::kAscii) {
      os << format_float(static_cast<float>(c.x())) << ' '
         << format_float(static_cast<float>(c.y())) << ' '
         << format_float(static_cast<float>(c.z())) << ' ' << int(rgb[0]) << ' ' << int(rgb[1])
         << ' ' << int(rgb[2]) << ' ' << int(cls_byte) << ' ' << format_float(conf) << ' '
         << format_float(v.range) << ' ' << v.hits << '\n';
    } else {
      put(os, static_cast<float>(c.x()));
      put(os, static_cast<float>(c.y()));
      put(os, static_cast<float>(c.z()));
      put(os, rgb[0]);
      put(os, rgb[1]);
      put(os, rgb[2]);
      put(os, cls_byte);
      put(os, conf);
      put(os, v.range);
      put(os, v.hits);
    }
  }
}

void write_ply(const std::filesystem::path& path, const map::MapSnapshot& snapshot,
               PlyFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write '" + path.string() + "'");
  write_ply(out, snapshot, format);
  if (!out) throw ConfigurationError("failed writing '" + path.string() + "'");
}

}  // namespace semvox::io
