#include "semvox/io/timeline_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "format.hpp"
#include "json_node.hpp"
#include "semvox/io/config_io.hpp"
#include "semvox/io/map_io.hpp"

namespace semvox::io {
namespace {

namespace fs = std::filesystem;
using detail::format_float;
using detail::Json;
using detail::Node;

constexpr const char* kTraceHeader =
    "frame,ix,iy,iz,obs_class,obs_range,range_before,range_after,class_before,class_after,"
    "hits_after,injected";

std::string frame_file(std::uint32_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06u.csv", index);
  return buf;
}

std::string opt_class(const std::optional<ClassIndex>& c) {
  return c ? std::to_string(*c) : std::string();
}

std::optional<ClassIndex> parse_class(std::string_view s, const std::string& where) {
  if (s.empty()) return std::nullopt;
  const long long v = detail::parse_int(s, where);
  if (v < 0 || v >= kMaxClasses) throw ConfigurationError(where + ": class index out of range");
  return static_cast<ClassIndex>(v);
}

Json frame_json(const sim::FrameRecord& f, const std::optional<std::string>& dump) {
  Json j;
  j["index"] = f.index;
  j["time"] = f.time;
  j["segment"] = std::string(sim::to_string(f.segment));
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(f.pose.rotation(r, c));
  }
  j["pose"] = {{"translation", Json::array({f.pose.translation.x(), f.pose.translation.y(),
                                            f.pose.translation.z()})},
               {"rotation", rot}};
  j["published"] = f.published;
  j["fired"] = f.fired;
  Json water;
  water["status"] = std::string(sim::to_string(f.water.status));
  water["support"] = f.water.support;
  if (f.water.plane) {
    const auto& p = *f.water.plane;
    water["plane"] = {{"normal", Json::array({p.normal.x(), p.normal.y(), p.normal.z()})},
                      {"offset", p.offset}};
  } else {
    water["plane"] = nullptr;
  }
  Json fp = Json::array();
  for (const auto& c : f.water.footprint) fp.push_back(Json::array({c.x, c.y}));
  water["footprint"] = fp;
  water["injected"] = f.water.injected;
  j["water"] = water;
  j["stats"] = {{"lidar_points", f.stats.lidar_points},
                {"semantic_points", f.stats.semantic_points},
                {"stereo_points", f.stats.stereo_points},
                {"voxels_created", f.stats.voxels_created},
                {"voxel_updates", f.stats.voxel_updates},
                {"semantic_replacements", f.stats.semantic_replacements},
                {"map_size", f.stats.map_size}};
  j["trace_rows"] = f.trace.size();
  j["map_dump"] = dump ? Json(*dump) : Json(nullptr);
  return j;
}

sim::FrameRecord frame_from(const Node& n) {
  sim::FrameRecord f;
  f.index = static_cast<std::uint32_t>(n.unsigned_integer("index"));
  f.time = n.number("time");
  const auto seg = sim::parse_segment(n.string("segment"));
  if (!seg) n.fail("segment", "unknown segment");
  f.segment = *seg;
  const Node pose = n.object("pose");
  const auto t = pose.vec3("translation");
  const auto r = pose.numbers("rotation");
  if (r.size() != 9) pose.fail("rotation", "expected 9 numbers");
  Mat3 rot;
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 3; ++c) rot(i, c) = r[static_cast<std::size_t>(i * 3 + c)];
  }
  pose.finish();
  f.pose = geometry::Pose(rot, t, "world");
  f.published = n.boolean("published", false);
  const Json& fired = n.raw("fired");
  if (!fired.is_array()) n.fail("fired", "expected an array of names");
  for (const Json& s : fired) f.fired.push_back(s.get<std::string>());
  const Node w = n.object("water");
  const auto status = sim::parse_water_status(w.string("status"));
  if (!status) w.fail("status", "unknown status");
  f.water.status = *status;
  f.water.support = static_cast<std::size_t>(w.unsigned_integer("support"));
  if (w.has("plane")) {
    const Node p = w.object("plane");
    f.water.plane = geometry::Plane{p.vec3("normal"), p.number("offset")};
    p.finish();
  } else {
    w.raw("plane");
  }
  for (const Json& c : w.raw("footprint")) {
    f.water.footprint.push_back({c.at(0).get<std::int32_t>(), c.at(1).get<std::int32_t>()});
  }
  f.water.injected = static_cast<std::size_t>(w.unsigned_integer("injected"));
  w.finish();
  const Node s = n.object("stats");
  f.stats.lidar_points = s.unsigned_integer("lidar_points");
  f.stats.semantic_points = s.unsigned_integer("semantic_points");
  f.stats.stereo_points = s.unsigned_integer("stereo_points");
  f.stats.voxels_created = s.unsigned_integer("voxels_created");
  f.stats.voxel_updates = s.unsigned_integer("voxel_updates");
  f.stats.semantic_replacements = s.unsigned_integer("semantic_replacements");
  f.stats.map_size = s.unsigned_integer("map_size");
  s.finish();
  n.unsigned_integer("trace_rows");
  n.raw("map_dump");
  n.finish();
  return f;
}

void open_out(std::ofstream& out, const fs::path& p) {
  out.open(p, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write '" + p.string() + "'");
}

}  // namespace

void write_timeline(const sim::ScenarioTimeline& timeline, const fs::path& dir) {
  fs::create_directories(dir / "maps");
  const auto& ontology = timeline.config.scene.ontology();

  Json frames = Json::array();
  std::optional<std::uint32_t> prev_published;
  for (const auto& f : timeline.frames) {
    std::optional<std::string> dump;
    if (f.published && f.snapshot) {
      dump = "maps/" + frame_file(f.index);
      std::vector<std::pair<map::VoxelKey, map::Voxel>> changed;
      for (auto& kv : f.snapshot->voxels()) {
        if (!prev_published || kv.second.last_update > *prev_published) {
          changed.push_back(std::move(kv));
        }
      }
      std::ofstream out;
      open_out(out, dir / *dump);
      write_map_dump(out, ontology, f.snapshot->resolution(), f.snapshot->strategy(), changed);
      prev_published = f.index;
    }
    frames.push_back(frame_json(f, dump));
    if (f.sensors) {
      fs::create_directories(dir / "clouds");
      std::ofstream out;
      open_out(out, dir / "clouds" / frame_file(f.index));
      out << "x,y,z,truth,label\n";
      for (std::size_t i = 0; i < f.sensors->points.size(); ++i) {
        const Vec3& p = f.sensors->points[i];
        out << format_float(p.x()) << ',' << format_float(p.y()) << ',' << format_float(p.z())
            << ',' << int(f.sensors->truth[i]) << ',' << opt_class(f.sensors->label[i]) << '\n';
      }
    }
  }

  Json manifest;
  manifest["format"] = "semvox-timeline";
  manifest["version"] = 1;
  manifest["config"] = detail::parse_json(scenario_to_json(timeline.config), "config");
  manifest["ontology"] = ontology.names();
  manifest["base_rate_hz"] = timeline.base_rate_hz;
  manifest["frame_count"] = timeline.frames.size();
  manifest["final_map"] = "final_map.csv";
  manifest["trace"] = "trace.csv";
  manifest["frames"] = frames;
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  std::ofstream trace;
  open_out(trace, dir / "trace.csv");
  trace << kTraceHeader << '\n';
  std::string row;
  for (const auto& f : timeline.frames) {
    for (const auto& r : f.trace) {
      row.clear();
      row += std::to_string(f.index) + ',' + std::to_string(r.key.x) + ',' +
             std::to_string(r.key.y) + ',' + std::to_string(r.key.z) + ',' +
             opt_class(r.obs_class) + ',' + format_float(r.obs_range) + ',' +
             format_float(r.range_before) + ',' + format_float(r.range_after) + ',' +
             opt_class(r.class_before) + ',' + opt_class(r.class_after) + ',' +
             std::to_string(r.hits_after) + ',' + (r.injected ? "1" : "0") + '\n';
      trace << row;
    }
  }
  if (!trace) throw ConfigurationError("failed writing trace.csv");
  write_map_dump(dir / "final_map.csv", timeline.final_map);
}

sim::ScenarioTimeline read_timeline(const fs::path& dir) {
  const Json manifest =
      detail::parse_json(read_text_file(dir / "manifest.json"), (dir / "manifest.json").string());
  const Node root(manifest, "manifest");
  if (root.string("format") != "semvox-timeline") {
    root.fail("format", "not a semvox timeline");
  }
  if (root.integer("version") != 1) root.fail("version", "unsupported version");

  sim::ScenarioTimeline tl;
  tl.config = scenario_from_json(root.raw("config").dump());
  tl.base_rate_hz = static_cast<int>(root.integer("base_rate_hz"));
  root.raw("ontology");
  root.unsigned_integer("frame_count");
  root.string("final_map");
  root.string("trace");

  std::map<std::uint32_t, std::size_t> by_index;
  std::vector<std::optional<std::string>> dumps;
  for (const Node& n : root.objects("frames")) {
    tl.frames.push_back(frame_from(n));
    by_index[tl.frames.back().index] = tl.frames.size() - 1;
    const Json& d = n.json().at("map_dump");
    dumps.push_back(d.is_string() ? std::optional<std::string>(d.get<std::string>())
                                  : std::nullopt);
  }
  root.finish();

  std::ifstream trace(dir / "trace.csv", std::ios::binary);
  if (!trace) throw ConfigurationError("cannot read '" + (dir / "trace.csv").string() + "'");
  std::string line;
  std::getline(trace, line);
  if (line != kTraceHeader) throw ConfigurationError("trace.csv: unexpected header");
  std::size_t line_no = 1;
  while (std::getline(trace, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "trace.csv line " + std::to_string(line_no);
    const auto f = detail::split(line, ',');
    if (f.size() != 12) throw ConfigurationError(where + ": expected 12 fields");
    const auto frame = static_cast<std::uint32_t>(detail::parse_int(f[0], where));
    const auto it = by_index.find(frame);
    if (it == by_index.end()) throw ConfigurationError(where + ": unknown frame");
    sim::VoxelTrace r;
    r.key = {static_cast<std::int32_t>(detail::parse_int(f[1], where)),
             static_cast<std::int32_t>(detail::parse_int(f[2], where)),
             static_cast<std::int32_t>(detail::parse_int(f[3], where))};
    r.obs_class = parse_class(f[4], where);
    r.obs_range = detail::parse_float(f[5], where);
    r.range_before = detail::parse_float(f[6], where);
    r.range_after = detail::parse_float(f[7], where);
    r.class_before = parse_class(f[8], where);
    r.class_after = parse_class(f[9], where);
    r.hits_after = static_cast<std::uint32_t>(detail::parse_int(f[10], where));
    r.injected = f[11] == "1";
    tl.frames[it->second].trace.push_back(r);
  }

  std::map<map::VoxelKey, map::Voxel> state;
  for (std::size_t i = 0; i < tl.frames.size(); ++i) {
    if (!dumps[i]) continue;
    const auto part = read_map_dump(dir / *dumps[i]);
    for (auto& kv : part.voxels()) state[kv.first] = std::move(kv.second);
    const std::vector<std::pair<map::VoxelKey, map::Voxel>> all(state.begin(), state.end());
    tl.frames[i].snapshot = map::MapSnapshot::from_voxels(
        part.ontology(), part.resolution(), part.strategy(), all, tl.frames[i].index);
  }
  tl.final_map = read_map_dump(dir / "final_map.csv");
  return tl;
}

}  // namespace semvox::io
