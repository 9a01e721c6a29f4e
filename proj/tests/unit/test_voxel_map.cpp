#include <algorithm>
#include <atomic>
#include <random>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "semvox/ontology.hpp"
#include "semvox/voxel_map.hpp"

namespace semvox::map {
namespace {

using namespace semantics::canonical;
using semantics::Ontology;
constexpr std::size_t kN = 10;

VoxelMap make_map(FusionStrategy s = FusionStrategy::kRangeBased, double res = 0.2) {
  return VoxelMap(Ontology::canonical(), {res, s, std::nullopt});
}

SemanticCloud cloud_of(std::initializer_list<std::tuple<Vec3, ClassIndex, float>> pts) {
  SemanticCloud c(kN);
  for (const auto& [p, cls, r] : pts) {
    c.push_back(p, ClassConfidence::one_hot(kN, cls, 1.0f).scores(), r);
  }
  return c;
}

TEST(VoxelMap, RejectsBadOptions) {
  MapOptions o;
  o.resolution = 0.0;
  EXPECT_THROW(VoxelMap(Ontology::canonical(), o), ConfigurationError);
  o.resolution = -1.0;
  EXPECT_THROW(VoxelMap(Ontology::canonical(), o), ConfigurationError);
  o.resolution = 0.2;
  o.max_voxels = 0;
  EXPECT_THROW(VoxelMap(Ontology::canonical(), o), ConfigurationError);
}

TEST(Binning, HandComputedKey) {
  const VoxelMap m = make_map(FusionStrategy::kRangeBased, 0.5);
  EXPECT_EQ(m.key_of({0.74, -0.2, 1.0}), (VoxelKey{1, -1, 2}));
  EXPECT_EQ(m.key_of({0.0, 0.0, 0.0}), (VoxelKey{0, 0, 0}));
}

TEST(Binning, CenterRoundTrip) {
  const VoxelMap m = make_map(FusionStrategy::kRangeBased, 0.2);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> d(-100000, 100000);
  for (int i = 0; i < 10000; ++i) {
    const VoxelKey k{d(rng), d(rng), d(rng)};
    EXPECT_EQ(m.key_of(m.center_of(k)), k);
  }
}

TEST(FuseCloud, EmptyCloud) {
  VoxelMap m = make_map();
  const FusionStats s = m.fuse_cloud(SemanticCloud(kN));
  EXPECT_EQ(s.points, 0u);
  EXPECT_EQ(s.voxels_created, 0u);
  EXPECT_EQ(s.voxel_updates, 0u);
  EXPECT_EQ(s.semantic_replacements, 0u);
  EXPECT_EQ(m.size(), 0u);
}

TEST(FuseCloud, OntologyMismatch) {
  VoxelMap m = make_map();
  EXPECT_THROW(m.fuse_cloud(SemanticCloud(6)), ConfigurationError);
}

TEST(FuseCloud, ClosestRangeWinsInEitherOrder) {
  const Vec3 p(1.01, 1.01, 0.05);
  for (bool near_first : {true, false}) {
    VoxelMap m = make_map();
    if (near_first) {
      m.fuse_cloud(cloud_of({{p, kGrass, 4.0f}, {p, kLog, 9.0f}}));
    } else {
      m.fuse_cloud(cloud_of({{p, kLog, 9.0f}, {p, kGrass, 4.0f}}));
    }
    const auto v = m.query(m.key_of(p));
    ASSERT_TRUE(v);
    EXPECT_EQ(argmax_class(*v), kGrass);
    EXPECT_EQ(v->range, 4.0f);
    EXPECT_EQ(v->hits, 2u);
  }
}

TEST(FuseCloud, StatsCountCreationsAndUpdates) {
  VoxelMap m = make_map();
  const Vec3 a(0.1, 0.1, 0.1), b(5.1, 0.1, 0.1);
  auto s = m.fuse_cloud(cloud_of({{a, kGrass, 5.0f}, {a, kGrass, 6.0f}, {b, kLog, 3.0f}}));
  EXPECT_EQ(s.points, 3u);
  EXPECT_EQ(s.voxels_created, 2u);
  EXPECT_EQ(s.voxel_updates, 1u);
  EXPECT_EQ(s.semantic_replacements, 2u);
  s = m.fuse_cloud(cloud_of({{a, kLog, 1.0f}}));
  EXPECT_EQ(s.semantic_replacements, 1u);
  EXPECT_EQ(m.size(), 2u);
}

TEST(Query, NeverWrittenKeyIsAbsent) {
  VoxelMap m = make_map();
  EXPECT_FALSE(m.query({3, 4, 5}));
  m.fuse_cloud(cloud_of({{Vec3(0.1, 0.1, 0.1), kGrass, 1.0f}}));
  EXPECT_FALSE(m.query({1, 0, 0}));
  EXPECT_TRUE(m.query({0, 0, 0}));
}

TEST(Snapshot, IsolatedFromLaterFusion) {
  VoxelMap m = make_map();
  const Vec3 p(0.3, 0.3, 0.3);
  m.fuse_cloud(cloud_of({{p, kDryVegetation, 10.0f}}));
  const MapSnapshot snap = m.snapshot();
  const auto before = snap.voxels();
  m.fuse_cloud(cloud_of({{p, kObstacleRock, 2.0f}, {Vec3(9, 9, 9), kSky, 3.0f}}));
  EXPECT_EQ(snap.size(), 1u);
  EXPECT_EQ(snap.voxels(), before);
  EXPECT_EQ(argmax_class(*snap.query(snap.key_of(p))), kDryVegetation);
  EXPECT_EQ(argmax_class(*m.query(m.key_of(p))), kObstacleRock);
  EXPECT_EQ(m.size(), 2u);
}

TEST(Snapshot, CopiedMapIsIndependent) {
  VoxelMap m = make_map();
  const Vec3 p(0.3, 0.3, 0.3);
  m.fuse_cloud(cloud_of({{p, kDryVegetation, 10.0f}}));
  VoxelMap copy = m;
  copy.fuse_cloud(cloud_of({{p, kObstacleRock, 2.0f}}));
  EXPECT_EQ(argmax_class(*m.query(m.key_of(p))), kDryVegetation);
  EXPECT_EQ(argmax_class(*copy.query(copy.key_of(p))), kObstacleRock);
}

TEST(Snapshot, FromVoxelsRoundTrip) {
  VoxelMap m = make_map();
  std::mt19937_64 rng(3);
  const auto log = testing::random_log(rng, 2000, kN, 0.2, 10);
  m.fuse_cloud(testing::to_cloud(log, 0, log.size(), kN));
  const MapSnapshot a = m.snapshot();
  const auto voxels = a.voxels();
  const MapSnapshot b = MapSnapshot::from_voxels(Ontology::canonical(), 0.2,
                                                 FusionStrategy::kRangeBased, voxels);
  EXPECT_EQ(b.size(), a.size());
  EXPECT_EQ(b.voxels(), voxels);
  EXPECT_TRUE(std::is_sorted(voxels.begin(), voxels.end(),
                             [](const auto& x, const auto& y) { return x.first < y.first; }));
}

TEST(OracleEquivalence, RandomSequencesMatchMinRangeOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto log = testing::random_log(rng, 5000, kN, 0.2, 6);
    VoxelMap m = make_map();
    // Feed the log as a few clouds of uneven size.
    std::size_t begin = 0;
    while (begin < log.size()) {
      const std::size_t end = std::min(log.size(), begin + 1 + rng() % 1500);
      m.fuse_cloud(testing::to_cloud(log, begin, end, kN));
      begin = end;
    }
    const auto oracle = testing::min_range_oracle(log, 0.2, kN);
    const auto diff = testing::compare_with_oracle(m.snapshot(), oracle);
    EXPECT_FALSE(diff) << *diff;
  }
}

TEST(OrderIndependence, DistinctRangesGiveIdenticalMaps) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    auto log = testing::random_log(rng, 3000, kN, 0.2, 4);
    // Make all ranges distinct.
    for (std::size_t i = 0; i < log.size(); ++i) log[i].range = 0.5f + 0.001f * i;
    std::shuffle(log.begin(), log.end(), rng);
    VoxelMap a = make_map();
    a.fuse_cloud(testing::to_cloud(log, 0, log.size(), kN));
    std::shuffle(log.begin(), log.end(), rng);
    VoxelMap b = make_map();
    b.fuse_cloud(testing::to_cloud(log, 0, log.size(), kN));
    const auto va = a.snapshot().voxels();
    const auto vb = b.snapshot().voxels();
    ASSERT_EQ(va.size(), vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
      EXPECT_EQ(va[i].first, vb[i].first);
      EXPECT_EQ(va[i].second.confidence, vb[i].second.confidence);
      EXPECT_EQ(va[i].second.range, vb[i].second.range);
      EXPECT_EQ(va[i].second.hits, vb[i].second.hits);
    }
  }
}

TEST(Hits, EqualPointsBinnedPerVoxel) {
  std::mt19937_64 rng(5);
  const auto log = testing::random_log(rng, 4000, kN, 0.2, 3);
  for (FusionStrategy s : kAllStrategies) {
    VoxelMap m = make_map(s);
    m.fuse_cloud(testing::to_cloud(log, 0, 1234, kN));
    m.fuse_cloud(testing::to_cloud(log, 1234, log.size(), kN));
    std::map<VoxelKey, std::uint32_t> want;
    for (const auto& p : log) ++want[m.key_of(p.position)];
    const auto snap = m.snapshot();
    ASSERT_EQ(snap.size(), want.size()) << to_string(s);
    for (const auto& [k, v] : snap.voxels()) EXPECT_EQ(v.hits, want[k]);
  }
}

TEST(VoteStrategy, OneVotePerVoxelPerCloud) {
  VoxelMap m = make_map(FusionStrategy::kVote);
  const Vec3 p(0.1, 0.1, 0.1);
  m.fuse_cloud(cloud_of({{p, kDryVegetation, 9.0f}, {p, kDryVegetation, 9.0f},
                         {p, kDryVegetation, 9.0f}}));
  auto v = m.query(m.key_of(p));
  EXPECT_EQ(v->evidence[kDryVegetation], 1.0f);
  EXPECT_EQ(v->hits, 3u);
  m.fuse_cloud(cloud_of({{p, kObstacleRock, 2.0f}}));
  v = m.query(m.key_of(p));
  // 1:1 tie, lowest index keeps the cell.
  EXPECT_EQ(argmax_class(*v), kDryVegetation);
  m.fuse_cloud(cloud_of({{p, kObstacleRock, 2.0f}}));
  EXPECT_EQ(argmax_class(*m.query(m.key_of(p))), kObstacleRock);
}

TEST(InjectWaterPlane, FlatPlaneColumns) {
  VoxelMap m = make_map(FusionStrategy::kRangeBased, 0.5);
  const geometry::Plane plane{Vec3::UnitZ(), 1.5};
  const std::vector<ColumnKey> cols{{0, 0}, {1, 0}, {0, 1}, {-3, 2}};
  EXPECT_EQ(m.inject_water_plane(plane, cols, Vec3(0, 0, 3)), 4u);
  EXPECT_EQ(m.size(), 4u);
  for (const ColumnKey& c : cols) {
    const auto v = m.query({c.x, c.y, 3});
    ASSERT_TRUE(v);
    EXPECT_EQ(argmax_class(*v), kWater);
    EXPECT_EQ(v->confidence[kWater], 1.0f);
    EXPECT_EQ(v->hits, 1u);
  }
}

TEST(InjectWaterPlane, EmptyFootprintIsNoOp) {
  VoxelMap m = make_map();
  EXPECT_EQ(m.inject_water_plane({Vec3::UnitZ(), 0.0}, {}, Vec3::Zero()), 0u);
  EXPECT_EQ(m.size(), 0u);
}

TEST(InjectWaterPlane, RepeatedInjectionIsIdempotent) {
  VoxelMap m = make_map();
  const geometry::Plane plane{Vec3::UnitZ(), 0.1};
  std::vector<ColumnKey> cols;
  for (int i = 0; i < 10; ++i) cols.push_back({i, -i});
  m.inject_water_plane(plane, cols, Vec3(-2, 0, 1.5));
  const auto once = m.snapshot().voxels();
  m.inject_water_plane(plane, cols, Vec3(-2, 0, 1.5));
  EXPECT_EQ(m.snapshot().voxels(), once);
}

TEST(InjectWaterPlane, NeedsWaterClass) {
  VoxelMap m(Ontology({"a", "b"}));
  const std::vector<ColumnKey> cols{{0, 0}};
  EXPECT_THROW(m.inject_water_plane({Vec3::UnitZ(), 0.0}, cols, Vec3::Zero()),
               ConfigurationError);
}

TEST(Eviction, CapsLiveVoxelsByLeastRecentBlock) {
  MapOptions o;
  o.max_voxels = 100;
  VoxelMap m(Ontology::canonical(), o);
  for (int frame = 0; frame < 10; ++frame) {
    m.set_frame(frame);
    SemanticCloud cloud(kN);
    for (int i = 0; i < 64; ++i) {
      const Vec3 p((frame * 4 + i % 4) * 0.2 + 0.1, (i / 4 % 4) * 0.2 + 0.1,
                   (i / 16) * 0.2 + 0.1);
      cloud.push_back(p, ClassConfidence::one_hot(kN, kGrass, 1.0f).scores(), 1.0f);
    }
    const auto stats = m.fuse_cloud(cloud);
    EXPECT_LE(m.size(), 100u);
    EXPECT_EQ(stats.voxels_evicted, frame >= 1 ? 64u : 0u);
  }
  // Only the newest block survives.
  EXPECT_TRUE(m.query(m.key_of({36 * 0.2 + 0.1, 0.1, 0.1})));
  EXPECT_FALSE(m.query(m.key_of({0.1, 0.1, 0.1})));
}

TEST(Concurrency, SnapshotsDuringFusionStayConsistent) {
  std::mt19937_64 rng(77);
  const auto log = testing::random_log(rng, 60000, kN, 0.2, 8);
  VoxelMap m = make_map();
  std::atomic<bool> done{false};
  std::atomic<int> snapshots{0};
  std::thread reader([&] {
    std::size_t last = 0;
    while (!done.load()) {
      const MapSnapshot s = m.snapshot();
      std::size_t counted = 0;
      for (const auto& [k, v] : s.voxels()) {
        counted += v.hits > 0;
      }
      EXPECT_EQ(counted, s.size());
      EXPECT_GE(s.size(), last);
      last = s.size();
      ++snapshots;
    }
  });
  for (std::size_t b = 0; b < log.size(); b += 2000) {
    m.fuse_cloud(testing::to_cloud(log, b, std::min(log.size(), b + 2000), kN));
  }
  done = true;
  reader.join();
  EXPECT_GT(snapshots.load(), 0);
  const auto diff = testing::compare_with_oracle(m.snapshot(),
                                                 testing::min_range_oracle(log, 0.2, kN));
  EXPECT_FALSE(diff) << *diff;
}

}  // namespace
}  // namespace semvox::map
