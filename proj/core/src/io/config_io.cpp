#include "semvox/io/config_io.hpp"

#include <fstream>
#include <sstream>

#include "json_node.hpp"

namespace semvox::io {
namespace {

using detail::Json;
using detail::Node;
using sim::Vec2;

const semantics::Ontology& canon() { return semantics::Ontology::canonical(); }

Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json polygon_json(const sim::Polygon2& p) {
  Json a = Json::array();
  for (const Vec2& v : p.vertices) a.push_back(Json::array({v.x(), v.y()}));
  return a;
}

sim::Polygon2 polygon_from(const Node& n, const std::string& key) {
  const Json& a = n.raw(key);
  if (!a.is_array()) n.fail(key, "expected an array of [x, y] pairs");
  sim::Polygon2 p;
  for (const Json& v : a) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      n.fail(key, "expected an array of [x, y] pairs");
    }
    p.vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  if (p.vertices.size() < 3) n.fail(key, "needs at least 3 vertices");
  return p;
}

ClassIndex class_from(const Node& n, const std::string& key) {
  const std::string name = n.string(key);
  const auto c = canon().find(name);
  if (!c) n.fail(key, "unknown class '" + name + "'");
  return *c;
}

Json pose_json(const geometry::Pose& p) {
  const Mat4 m = p.matrix();
  Json a = Json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) a.push_back(m(r, c));
  }
  return a;
}

geometry::Pose pose_from(const Node& n, const std::string& key, const std::string& frame) {
  if (!n.has(key)) {
    n.raw(key);  // reports the missing field
  }
  const auto v = n.numbers(key);
  if (v.size() != 16) n.fail(key, "expected 16 numbers (row-major 4x4)");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
  }
  try {
    return geometry::Pose::from_matrix(m, frame);
  } catch (const ConfigurationError& e) {
    n.fail(key, e.what());
  }
}

// ---------------------------------------------------------------- scene

Json scene_json(const sim::Scene& s) {
  Json j;
  j["name"] = s.name;
  j["ground"] = {{"base", s.ground.base},
                 {"slope_x", s.ground.slope_x},
                 {"slope_y", s.ground.slope_y},
                 {"class", canon().name(s.ground_class)}};
  Json regions = Json::array();
  for (const auto& r : s.regions) {
    regions.push_back(
        {{"name", r.name}, {"class", canon().name(r.cls)}, {"polygon", polygon_json(r.polygon)}});
  }
  j["regions"] = regions;
  Json objects = Json::array();
  for (const auto& o : s.objects) {
    Json jo = {{"name", o.name},
               {"kind", std::string(sim::to_string(o.kind))},
               {"class", canon().name(o.cls)},
               {"min", vec3_json(o.box.min)},
               {"max", vec3_json(o.box.max)},
               {"hazard", o.hazard}};
    if (o.kind == sim::ObjectKind::kBush) jo["hit_probability"] = o.hit_probability;
    objects.push_back(jo);
  }
  j["objects"] = objects;
  Json water = Json::array();
  for (const auto& w : s.water) {
    water.push_back({{"name", w.name},
                     {"polygon", polygon_json(w.polygon)},
                     {"surface_height", w.surface_height}});
  }
  j["water"] = water;
  return j;
}

sim::Scene scene_from(const Node& n) {
  sim::Scene s;
  s.name = n.string("name", "");
  if (n.has("ground")) {
    const Node g = n.object("ground");
    s.ground.base = g.number("base", 0.0);
    s.ground.slope_x = g.number("slope_x", 0.0);
    s.ground.slope_y = g.number("slope_y", 0.0);
    s.ground_class = g.has("class") ? class_from(g, "class") : semantics::canonical::kGround;
    g.finish();
  } else if (n.json().contains("ground")) {
    n.raw("ground");
  }
  for (const Node& r : n.objects("regions")) {
    s.regions.push_back({r.string("name", ""), polygon_from(r, "polygon"), class_from(r, "class")});
    r.finish();
  }
  for (const Node& o : n.objects("objects")) {
    sim::SceneObject obj;
    obj.name = o.string("name");
    const std::string kind = o.string("kind", "box");
    if (kind == "box") {
      obj.kind = sim::ObjectKind::kBox;
    } else if (kind == "bush") {
      obj.kind = sim::ObjectKind::kBush;
    } else if (kind == "slab") {
      obj.kind = sim::ObjectKind::kSlab;
    } else {
      o.fail("kind", "expected box, bush or slab");
    }
    obj.cls = class_from(o, "class");
    obj.box = {o.vec3("min"), o.vec3("max")};
    obj.hazard = o.boolean("hazard", false);
    obj.hit_probability = o.number("hit_probability", 1.0);
    o.finish();
    s.objects.push_back(obj);
  }
  for (const Node& w : n.objects("water")) {
    s.water.push_back({w.string("name", ""), polygon_from(w, "polygon"),
                       w.number("surface_height")});
    w.finish();
  }
  n.finish();
  try {
    s.validate();
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(n.path() + ": " + e.what());
  }
  return s;
}

// ----------------------------------------------------------- trajectory

Json trajectory_json(const sim::Trajectory& t) {
  Json wps = Json::array();
  for (const auto& w : t.waypoints()) {
    wps.push_back({{"t", w.t},
                   {"position", vec3_json(w.position)},
                   {"yaw_deg", w.yaw_deg},
                   {"segment", std::string(sim::to_string(w.segment))}});
  }
  return {{"waypoints", wps}};
}

sim::Trajectory trajectory_from(const Node& n) {
  std::vector<sim::Waypoint> wps;
  if (!n.has("waypoints")) n.raw("waypoints");
  for (const Node& w : n.objects("waypoints")) {
    sim::Waypoint wp;
    wp.t = w.number("t");
    wp.position = w.vec3("position");
    wp.yaw_deg = w.number("yaw_deg", 0.0);
    const std::string seg = w.string("segment", "forward");
    const auto parsed = sim::parse_segment(seg);
    if (!parsed) w.fail("segment", "expected forward, reverse or double_back");
    wp.segment = *parsed;
    w.finish();
    wps.push_back(wp);
  }
  n.finish();
  try {
    return sim::Trajectory(std::move(wps));
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(n.path() + ".waypoints: " + e.what());
  }
}

// ------------------------------------------------------------------ rig

Json intrinsics_fields(Json j, const geometry::CameraIntrinsics& k) {
  j["fx"] = k.fx;
  j["fy"] = k.fy;
  j["cx"] = k.cx;
  j["cy"] = k.cy;
  j["width"] = k.width;
  j["height"] = k.height;
  return j;
}

geometry::CameraIntrinsics intrinsics_from(const Node& n) {
  geometry::CameraIntrinsics k;
  k.fx = n.number("fx");
  k.fy = n.number("fy");
  k.cx = n.number("cx");
  k.cy = n.number("cy");
  k.width = static_cast<int>(n.integer("width"));
  k.height = static_cast<int>(n.integer("height"));
  try {
    k.validate();
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(n.path() + ": " + e.what());
  }
  return k;
}

Json rig_json(const sim::SensorRig& rig) {
  Json j;
  Json lidars = Json::array();
  for (const auto& l : rig.lidars) {
    lidars.push_back({{"name", l.name},
                      {"rings", l.rings},
                      {"azimuth_steps", l.azimuth_steps},
                      {"min_elevation_deg", l.min_elevation_deg},
                      {"max_elevation_deg", l.max_elevation_deg},
                      {"min_azimuth_deg", l.min_azimuth_deg},
                      {"max_azimuth_deg", l.max_azimuth_deg},
                      {"max_range", l.max_range},
                      {"range_noise", l.range_noise},
                      {"rate_hz", l.rate_hz},
                      {"sensor_to_vehicle", pose_json(l.mount)}});
  }
  j["lidars"] = lidars;
  Json cams = Json::array();
  for (const auto& c : rig.cameras) {
    Json jc = {{"name", c.name}, {"rate_hz", c.rate_hz}};
    jc = intrinsics_fields(jc, c.intrinsics);
    jc["sensor_to_vehicle"] = pose_json(c.mount);
    cams.push_back(jc);
  }
  j["cameras"] = cams;
  if (rig.stereo) {
    const auto& s = *rig.stereo;
    j["stereo"] = {{"camera", s.camera},
                   {"max_range", s.max_range},
                   {"stride", s.stride},
                   {"water_holes", s.water_holes},
                   {"hole_fraction", s.hole_fraction},
                   {"reflect_fraction", s.reflect_fraction},
                   {"depth_noise", s.depth_noise}};
  } else {
    j["stereo"] = nullptr;
  }
  j["oracle"] = {{"confidence", rig.oracle.confidence},
                 {"noise", rig.oracle.noise},
                 {"bleed_px", rig.oracle.bleed_px}};
  j["map_rate_hz"] = rig.map_rate_hz;
  return j;
}

sim::SensorRig rig_from(const Node& n) {
  sim::SensorRig rig;
  for (const Node& l : n.objects("lidars")) {
    sim::LidarSpec s;
    s.name = l.string("name", s.name);
    s.rings = static_cast<int>(l.integer("rings", s.rings));
    s.azimuth_steps = static_cast<int>(l.integer("azimuth_steps", s.azimuth_steps));
    s.min_elevation_deg = l.number("min_elevation_deg", s.min_elevation_deg);
    s.max_elevation_deg = l.number("max_elevation_deg", s.max_elevation_deg);
    s.min_azimuth_deg = l.number("min_azimuth_deg", s.min_azimuth_deg);
    s.max_azimuth_deg = l.number("max_azimuth_deg", s.max_azimuth_deg);
    s.max_range = l.number("max_range", s.max_range);
    s.range_noise = l.number("range_noise", s.range_noise);
    s.rate_hz = l.number("rate_hz", s.rate_hz);
    s.mount = pose_from(l, "sensor_to_vehicle", "vehicle");
    l.finish();
    try {
      s.validate();
    } catch (const ConfigurationError& e) {
      throw ConfigurationError(l.path() + ": " + e.what());
    }
    rig.lidars.push_back(s);
  }
  for (const Node& c : n.objects("cameras")) {
    sim::CameraSpec s;
    s.name = c.string("name");
    s.rate_hz = c.number("rate_hz", s.rate_hz);
    s.intrinsics = intrinsics_from(c);
    s.mount = pose_from(c, "sensor_to_vehicle", "vehicle");
    c.finish();
    rig.cameras.push_back(s);
  }
  if (n.has("stereo")) {
    const Node s = n.object("stereo");
    sim::StereoSpec st;
    st.camera = s.string("camera");
    st.max_range = s.number("max_range", st.max_range);
    st.stride = static_cast<int>(s.integer("stride", st.stride));
    st.water_holes = s.boolean("water_holes", st.water_holes);
    st.hole_fraction = s.number("hole_fraction", st.hole_fraction);
    st.reflect_fraction = s.number("reflect_fraction", st.reflect_fraction);
    st.depth_noise = s.number("depth_noise", st.depth_noise);
    s.finish();
    rig.stereo = st;
  } else if (n.json().contains("stereo")) {
    n.raw("stereo");
  }
  if (n.has("oracle")) {
    const Node o = n.object("oracle");
    rig.oracle.confidence = static_cast<float>(o.number("confidence", rig.oracle.confidence));
    rig.oracle.noise = o.number("noise", rig.oracle.noise);
    rig.oracle.bleed_px = static_cast<int>(o.integer("bleed_px", rig.oracle.bleed_px));
    o.finish();
  }
  rig.map_rate_hz = n.number("map_rate_hz", rig.map_rate_hz);
  n.finish();
  try {
    rig.validate();
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(n.path() + ": " + e.what());
  }
  return rig;
}

Json scenario_json(const sim::ScenarioConfig& c) {
  Json j;
  j["scene"] = scene_json(c.scene);
  j["trajectory"] = trajectory_json(c.trajectory);
  j["rig"] = rig_json(c.rig);
  j["strategy"] = std::string(map::to_string(c.strategy));
  j["seed"] = c.seed;
  j["resolution"] = c.resolution;
  j["map_rate_hz"] = c.map_rate_hz ? Json(*c.map_rate_hz) : Json(nullptr);
  j["record_sensor_data"] = c.record_sensor_data;
  j["trace_margin"] = c.trace_margin;
  Json priors = Json::array();
  for (const auto& p : c.priors) {
    priors.push_back({{"object", p.object},
                      {"class", canon().name(p.cls)},
                      {"votes", p.votes},
                      {"range", p.range}});
  }
  j["priors"] = priors;
  return j;
}

sim::ScenarioConfig scenario_from(const Node& n) {
  sim::ScenarioConfig c;
  c.scene = scene_from(n.object("scene"));
  c.trajectory = trajectory_from(n.object("trajectory"));
  c.rig = rig_from(n.object("rig"));
  const std::string strategy = n.string("strategy");
  const auto s = map::parse_strategy(strategy);
  if (!s) n.fail("strategy", "expected range_based, bayesian, vote or average");
  c.strategy = *s;
  c.seed = n.unsigned_integer("seed");
  c.resolution = n.number("resolution", c.resolution);
  if (n.has("map_rate_hz")) {
    c.map_rate_hz = n.number("map_rate_hz");
  } else {
    n.number("map_rate_hz", 0.0);
  }
  c.record_sensor_data = n.boolean("record_sensor_data", false);
  c.trace_margin = n.number("trace_margin", c.trace_margin);
  for (const Node& p : n.objects("priors")) {
    c.priors.push_back({p.string("object"), class_from(p, "class"),
                        static_cast<int>(p.integer("votes", 1)), p.number("range", 30.0)});
    p.finish();
  }
  n.finish();
  c.validate();
  return c;
}

Json ontology_value(const semantics::Ontology& o) {
  for (const char* name : {"canonical", "evaluation", "yamaha", "rellis"}) {
    if (*semantics::Ontology::builtin(name) == o) return name;
  }
  return o.names();
}

semantics::Ontology ontology_value_from(const Node& n, const std::string& key) {
  const Json& v = n.raw(key);
  if (v.is_string()) {
    const auto o = semantics::Ontology::builtin(v.get<std::string>());
    if (!o) n.fail(key, "unknown built-in ontology '" + v.get<std::string>() + "'");
    return *o;
  }
  if (!v.is_array()) n.fail(key, "expected an ontology name or a class list");
  std::vector<std::string> names;
  for (const Json& e : v) {
    if (!e.is_string()) n.fail(key, "class names must be strings");
    names.push_back(e.get<std::string>());
  }
  try {
    return semantics::Ontology(std::move(names));
  } catch (const ConfigurationError& e) {
    n.fail(key, e.what());
  }
}

template <class F>
auto parse_root(const std::string& text, const std::string& what, F&& f) {
  const Json j = detail::parse_json(text, what);
  return f(Node(j, what));
}

}  // namespace

std::string scene_to_json(const sim::Scene& scene) { return scene_json(scene).dump(2) + "\n"; }
sim::Scene scene_from_json(const std::string& text) {
  return parse_root(text, "scene", scene_from);
}

std::string trajectory_to_json(const sim::Trajectory& t) {
  return trajectory_json(t).dump(2) + "\n";
}
sim::Trajectory trajectory_from_json(const std::string& text) {
  return parse_root(text, "trajectory", trajectory_from);
}

std::string rig_to_json(const sim::SensorRig& rig) { return rig_json(rig).dump(2) + "\n"; }
sim::SensorRig rig_from_json(const std::string& text) {
  return parse_root(text, "rig", rig_from);
}

std::string scenario_to_json(const sim::ScenarioConfig& config) {
  return scenario_json(config).dump(2) + "\n";
}
sim::ScenarioConfig scenario_from_json(const std::string& text) {
  return parse_root(text, "config", scenario_from);
}

std::string calibration_to_json(const Calibration& c) {
  Json j = intrinsics_fields(Json::object(), c.intrinsics);
  j["sensor_to_vehicle"] = pose_json(c.sensor_to_vehicle);
  return j.dump(2) + "\n";
}

Calibration calibration_from_json(const std::string& text) {
  return parse_root(text, "calibration", [](const Node& n) {
    Calibration c;
    c.intrinsics = intrinsics_from(n);
    c.sensor_to_vehicle = pose_from(n, "sensor_to_vehicle", "vehicle");
    n.finish();
    return c;
  });
}

std::string ontology_to_json(const semantics::Ontology& o) {
  return Json{{"classes", o.names()}}.dump(2) + "\n";
}

semantics::Ontology ontology_from_json(const std::string& text) {
  return parse_root(text, "ontology", [](const Node& n) {
    auto o = ontology_value_from(n, "classes");
    n.finish();
    return o;
  });
}

semantics::Ontology load_ontology(const std::string& name_or_path) {
  if (const auto o = semantics::Ontology::builtin(name_or_path)) return *o;
  return ontology_from_json(read_text_file(name_or_path));
}

std::string remap_table_to_json(const semantics::RemapTable& t) {
  Json groups = Json::array();
  for (const auto& [target, sources] : t.grouping()) {
    groups.push_back({{"target", target}, {"sources", sources}});
  }
  return Json{{"source", ontology_value(t.source())},
              {"target", ontology_value(t.target())},
              {"groups", groups}}
             .dump(2) +
         "\n";
}

semantics::RemapTable remap_table_from_json(const std::string& text) {
  return parse_root(text, "remap_table", [](const Node& n) {
    auto source = ontology_value_from(n, "source");
    auto target = ontology_value_from(n, "target");
    semantics::RemapTable::Grouping grouping;
    for (const Node& g : n.objects("groups")) {
      std::vector<std::string> sources;
      const Json& s = g.raw("sources");
      if (!s.is_array()) g.fail("sources", "expected an array of class names");
      for (const Json& e : s) {
        if (!e.is_string()) g.fail("sources", "expected an array of class names");
        sources.push_back(e.get<std::string>());
      }
      grouping.emplace_back(g.string("target"), std::move(sources));
      g.finish();
    }
    n.finish();
    try {
      return semantics::RemapTable(std::move(source), std::move(target), grouping);
    } catch (const ConfigurationError& e) {
      throw ConfigurationError(n.path() + ".groups: " + e.what());
    }
  });
}

semantics::RemapTable load_remap_table(const std::string& name_or_path) {
  if (name_or_path == "canonical_to_evaluation") {
    return semantics::RemapTable::canonical_to_evaluation();
  }
  if (name_or_path == "yamaha_to_evaluation") return semantics::RemapTable::yamaha_to_evaluation();
  if (name_or_path == "rellis_to_evaluation") return semantics::RemapTable::rellis_to_evaluation();
  return remap_table_from_json(read_text_file(name_or_path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigurationError("failed writing '" + path.string() + "'");
}

}  // namespace semvox::io
