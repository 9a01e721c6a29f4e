#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "semvox/eval.hpp"
#include "semvox/io/config_io.hpp"
#include "semvox/io/label_io.hpp"
#include "semvox/io/map_io.hpp"
#include "semvox/io/timeline_io.hpp"
#include "semvox/sim/fixtures.hpp"
#include "temp_dir.hpp"

namespace semvox::io {
namespace {

namespace fs = std::filesystem;
using namespace semantics::canonical;
using test::TempDir;

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigIo, FixturesRoundTrip) {
  for (const auto& name : sim::fixture_names()) {
    const auto f = sim::fixture(name);
    const std::string scene = scene_to_json(f.scene);
    EXPECT_EQ(scene_to_json(scene_from_json(scene)), scene) << name;
    const std::string traj = trajectory_to_json(f.trajectory);
    EXPECT_EQ(trajectory_to_json(trajectory_from_json(traj)), traj) << name;
    const std::string rig = rig_to_json(f.rig);
    EXPECT_EQ(rig_to_json(rig_from_json(rig)), rig) << name;
  }
}

TEST(ConfigIo, CheckedInFixturesMatchTheBuiltIns) {
  const fs::path root = fs::path(SEMVOX_SOURCE_DIR) / "data" / "fixtures";
  for (const auto& name : sim::fixture_names()) {
    const auto f = sim::fixture(name);
    EXPECT_EQ(read_text_file(root / name / "scene.json"), scene_to_json(f.scene) + "\n") << name;
    EXPECT_EQ(read_text_file(root / name / "trajectory.json"),
              trajectory_to_json(f.trajectory) + "\n")
        << name;
    EXPECT_EQ(read_text_file(root / name / "rig.json"), rig_to_json(f.rig) + "\n") << name;
  }
}

TEST(ConfigIo, ScenarioRoundTripKeepsPriors) {
  sim::ScenarioConfig c;
  const auto f = sim::popup_rock();
  c.scene = f.scene;
  c.trajectory = f.trajectory;
  c.rig = f.rig;
  c.strategy = map::FusionStrategy::kVote;
  c.seed = 99;
  c.map_rate_hz = 10.0;
  c.priors.push_back({"rock", kDryVegetation, 5, 30.0});
  const sim::ScenarioConfig back = scenario_from_json(scenario_to_json(c));
  EXPECT_EQ(back.strategy, map::FusionStrategy::kVote);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.map_rate_hz, 10.0);
  ASSERT_EQ(back.priors.size(), 1u);
  EXPECT_EQ(back.priors[0].votes, 5);
  EXPECT_EQ(scenario_to_json(back), scenario_to_json(c));
}

TEST(ConfigIo, ErrorsNameTheOffendingField) {
  const auto f = sim::popup_rock();
  std::string text = scene_to_json(f.scene);
  const auto pos = text.find("\"hazard\"");
  text.insert(pos, "\"colour\": 3, ");
  EXPECT_NE(error_of([&] { scene_from_json(text); }).find("objects[0].colour"),
            std::string::npos);

  std::string bad_class = scene_to_json(f.scene);
  bad_class.replace(bad_class.find("dry_vegetation"), 14, "shrubbery");
  const std::string msg = error_of([&] { scene_from_json(bad_class); });
  EXPECT_NE(msg.find("objects[0].class"), std::string::npos) << msg;

  EXPECT_NE(error_of([&] { rig_from_json("{\"lidars\": 3}"); }), "");
  EXPECT_NE(error_of([&] { trajectory_from_json("{\"waypoints\": [{\"t\": 0}]}"); })
                .find("waypoints[0]"),
            std::string::npos);
  EXPECT_NE(error_of([&] { scene_from_json("{not json"); }), "");
}

TEST(ConfigIo, RigValuesAreValidated) {
  sim::SensorRig rig = sim::SensorRig::default_rig();
  rig.cameras[1].intrinsics.fx = -1.0;
  const std::string msg = error_of([&] { rig_from_json(rig_to_json(rig)); });
  EXPECT_NE(msg.find("cameras[1]"), std::string::npos) << msg;
}

TEST(ConfigIo, CalibrationRoundTrip) {
  Calibration c;
  c.intrinsics = {100, 110, 64, 48, 128, 96};
  c.sensor_to_vehicle = geometry::Pose::from_xyz_ypr(Vec3(1, 2, 3), 0.3, -0.1, 0.05, "vehicle");
  const Calibration back = calibration_from_json(calibration_to_json(c));
  EXPECT_EQ(back.intrinsics.fx, 100);
  EXPECT_EQ(back.intrinsics.height, 96);
  EXPECT_TRUE(back.sensor_to_vehicle.matrix().isApprox(c.sensor_to_vehicle.matrix(), 1e-15));
  const std::string skewed =
      "{\"fx\":1,\"fy\":1,\"cx\":0,\"cy\":0,\"width\":2,\"height\":2,"
      "\"sensor_to_vehicle\":[2,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}";
  EXPECT_NE(error_of([&] { calibration_from_json(skewed); }).find("sensor_to_vehicle"),
            std::string::npos);
}

TEST(ConfigIo, OntologyAndRemapTables) {
  EXPECT_EQ(load_ontology("canonical"), semantics::Ontology::canonical());
  EXPECT_EQ(ontology_from_json(ontology_to_json(semantics::Ontology::evaluation())),
            semantics::Ontology::evaluation());
  for (const char* name : {"canonical_to_evaluation", "yamaha_to_evaluation",
                           "rellis_to_evaluation"}) {
    const auto t = load_remap_table(name);
    const auto back = remap_table_from_json(remap_table_to_json(t));
    EXPECT_EQ(back.mapping(), t.mapping()) << name;
    EXPECT_EQ(back.source(), t.source()) << name;
  }
  const std::string missing =
      "{\"source\":\"canonical\",\"target\":\"evaluation\",\"groups\":"
      "[{\"target\":\"ground\",\"sources\":[\"ground\"]}]}";
  EXPECT_THROW(remap_table_from_json(missing), ConfigurationError);
  EXPECT_THROW(load_ontology("no_such_ontology"), ConfigurationError);
}

map::MapSnapshot sample_map() {
  map::VoxelMap m(semantics::Ontology::canonical(), {0.2, map::FusionStrategy::kRangeBased, {}});
  SemanticCloud c(10);
  c.push_back(Vec3(0.1, 0.1, 0.1), ClassConfidence::one_hot(10, kTrail, 0.9f).scores(), 3.25f);
  std::vector<float> partial(10, kNoMeasurement);
  partial[kWater] = 0.123456789f;
  c.push_back(Vec3(-1.3, 2.1, 0.5), partial, 7.0f);
  c.push_back(Vec3(4.0, 4.0, 4.0), ClassConfidence::none(10).scores(), 1.5f);
  m.fuse_cloud(c);
  return m.snapshot();
}

void expect_same_content(const map::MapSnapshot& a, const map::MapSnapshot& b) {
  const auto va = a.voxels();
  const auto vb = b.voxels();
  ASSERT_EQ(va.size(), vb.size());
  for (std::size_t i = 0; i < va.size(); ++i) {
    EXPECT_EQ(va[i].first, vb[i].first);
    EXPECT_EQ(va[i].second.confidence, vb[i].second.confidence);
    EXPECT_EQ(va[i].second.hits, vb[i].second.hits);
    EXPECT_EQ(std::bit_cast<std::uint32_t>(va[i].second.range),
              std::bit_cast<std::uint32_t>(vb[i].second.range));
  }
}

TEST(MapIo, DumpRoundTripsExactly) {
  const auto snap = sample_map();
  std::stringstream ss;
  write_map_dump(ss, snap);
  const auto back = read_map_dump(ss);
  EXPECT_EQ(back.resolution(), 0.2);
  EXPECT_EQ(back.strategy(), map::FusionStrategy::kRangeBased);
  expect_same_content(snap, back);
}

TEST(MapIo, DumpRejectsMalformedRows) {
  std::stringstream ss;
  write_map_dump(ss, sample_map());
  std::string text = ss.str();
  text += "1,2,3,not,a,row\n";
  std::istringstream in(text);
  EXPECT_THROW(read_map_dump(in), ConfigurationError);
}

TEST(MapIo, PlyHeaderAndSize) {
  const auto snap = sample_map();
  std::ostringstream ascii;
  write_ply(ascii, snap, PlyFormat::kAscii);
  const std::string a = ascii.str();
  EXPECT_EQ(a.rfind("ply\nformat ascii 1.0\n", 0), 0u);
  EXPECT_NE(a.find("element vertex 3\n"), std::string::npos);
  std::ostringstream bin;
  write_ply(bin, snap, PlyFormat::kBinary);
  const std::string b = bin.str();
  const auto end = b.find("end_header\n");
  ASSERT_NE(end, std::string::npos);
  // x y z (float) r g b class (uchar) confidence range (float) hits (uint).
  EXPECT_EQ(b.size() - end - 11, 3u * (3 * 4 + 4 + 2 * 4 + 4));
}

TEST(LabelIo, MaskRoundTrip) {
  TempDir dir;
  semantics::LabelMask m(7, 5);
  for (int v = 0; v < 5; ++v) {
    for (int u = 0; u < 7; ++u) {
      if ((u + v) % 3) m.set(u, v, static_cast<ClassIndex>((u * v) % 10));
    }
  }
  write_mask(dir / "m.png", m);
  EXPECT_EQ(read_mask(dir / "m.png"), m);
}

TEST(LabelIo, RejectsColourAndMissingMasks) {
  TempDir dir;
  cv::Mat rgb(4, 4, CV_8UC3, cv::Scalar(1, 2, 3));
  cv::imwrite((dir / "rgb.png").string(), rgb);
  EXPECT_THROW(read_mask(dir / "rgb.png"), CorruptMaskError);
  EXPECT_THROW(read_mask(dir / "absent.png"), CorruptMaskError);
  std::ofstream(dir / "junk.png") << "not a png";
  EXPECT_THROW(read_mask(dir / "junk.png"), CorruptMaskError);
}

TEST(LabelIo, NpyRoundTrip) {
  TempDir dir;
  ConfidenceImage img(3, 2, 4, 0.0f);
  for (int v = 0; v < 2; ++v) {
    for (int u = 0; u < 3; ++u) {
      std::vector<float> s{0.1f * u, 0.2f * v, 0.3f, kNoMeasurement};
      img.set(u, v, ClassConfidence(s));
    }
  }
  write_npy_confidence(dir / "c.npy", img);
  const auto back = read_npy_confidence(dir / "c.npy");
  ASSERT_EQ(back.width(), 3);
  ASSERT_EQ(back.height(), 2);
  ASSERT_EQ(back.num_classes(), 4u);
  for (int v = 0; v < 2; ++v) {
    for (int u = 0; u < 3; ++u) {
      const auto a = back.at(u, v);
      const auto b = img.at(u, v);
      EXPECT_EQ(ClassConfidence({a.begin(), a.end()}), ClassConfidence({b.begin(), b.end()}));
    }
  }
}

TEST(LabelIo, NpyRejectsWrongDtypeAndShape) {
  TempDir dir;
  const auto write_npy = [&](const std::string& name, const std::string& header,
                             std::size_t payload) {
    std::string h = header;
    while ((10 + h.size() + 1) % 64 != 0) h += ' ';
    h += '\n';
    std::ofstream out(dir / name, std::ios::binary);
    out.write("\x93NUMPY\x01\x00", 8);
    const std::uint16_t len = static_cast<std::uint16_t>(h.size());
    out.write(reinterpret_cast<const char*>(&len), 2);
    out << h << std::string(payload, '\0');
  };
  write_npy("f8.npy", "{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2, 2), }", 64);
  EXPECT_THROW(read_npy_confidence(dir / "f8.npy"), ConfigurationError);
  write_npy("2d.npy", "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2), }", 16);
  EXPECT_THROW(read_npy_confidence(dir / "2d.npy"), ConfigurationError);
  write_npy("short.npy", "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2, 2), }", 8);
  EXPECT_THROW(read_npy_confidence(dir / "short.npy"), ConfigurationError);
  write_npy("ok.npy", "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2, 2), }", 32);
  EXPECT_NO_THROW(read_npy_confidence(dir / "ok.npy"));
}

TEST(TimelineIo, RoundTripPreservesRecordsAndSnapshots) {
  TempDir dir;
  sim::ScenarioConfig c;
  const auto f = sim::flat_empty();
  c.scene = f.scene;
  c.trajectory = f.trajectory;
  c.rig = f.rig;
  c.seed = 4;
  c.record_sensor_data = true;
  c.scene.objects.push_back({"rock", sim::ObjectKind::kBox, {Vec3(4, -0.5, 0), Vec3(5, 0.5, 1)},
                             kObstacleRock, true, 1.0});
  const auto tl = sim::run_scenario(c);
  write_timeline(tl, dir / "tl");
  EXPECT_TRUE(fs::exists(dir / "tl" / "clouds" / "frame_000000.csv"));
  const auto back = read_timeline(dir / "tl");

  EXPECT_EQ(back.base_rate_hz, tl.base_rate_hz);
  EXPECT_EQ(scenario_to_json(back.config), scenario_to_json(tl.config));
  ASSERT_EQ(back.frames.size(), tl.frames.size());
  std::size_t trace_rows = 0;
  for (std::size_t i = 0; i < tl.frames.size(); ++i) {
    const auto& a = tl.frames[i];
    const auto& b = back.frames[i];
    EXPECT_EQ(a.index, b.index);
    EXPECT_EQ(a.time, b.time);
    EXPECT_EQ(a.segment, b.segment);
    EXPECT_EQ(a.fired, b.fired);
    EXPECT_EQ(a.published, b.published);
    EXPECT_TRUE(a.pose.matrix() == b.pose.matrix());
    EXPECT_EQ(a.stats.map_size, b.stats.map_size);
    EXPECT_EQ(a.water.status, b.water.status);
    ASSERT_EQ(a.trace.size(), b.trace.size());
    trace_rows += a.trace.size();
    for (std::size_t r = 0; r < a.trace.size(); ++r) {
      EXPECT_EQ(a.trace[r].key, b.trace[r].key);
      EXPECT_EQ(a.trace[r].class_after, b.trace[r].class_after);
      EXPECT_EQ(a.trace[r].obs_class, b.trace[r].obs_class);
      EXPECT_EQ(a.trace[r].range_before, b.trace[r].range_before);
      EXPECT_EQ(a.trace[r].hits_after, b.trace[r].hits_after);
    }
    ASSERT_EQ(a.snapshot.has_value(), b.snapshot.has_value());
    if (a.snapshot) expect_same_content(*a.snapshot, *b.snapshot);
  }
  EXPECT_GT(trace_rows, 0u);
  expect_same_content(tl.final_map, back.final_map);
  EXPECT_EQ(eval::to_json(eval::evaluate(back)), eval::to_json(eval::evaluate(tl)));
}

TEST(TimelineIo, RejectsForeignManifest) {
  TempDir dir;
  write_text_file(dir / "manifest.json", "{\"format\": \"other\", \"version\": 1}");
  EXPECT_THROW(read_timeline(dir.path()), ConfigurationError);
  EXPECT_THROW(read_timeline(dir / "missing"), ConfigurationError);
}

}  // namespace
}  // namespace semvox::io
