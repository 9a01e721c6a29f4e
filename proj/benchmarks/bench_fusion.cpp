#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "semvox/geometry.hpp"
#include "semvox/sim/fixtures.hpp"
#include "semvox/sim/sensors.hpp"
#include "semvox/voxel_map.hpp"

namespace {

using namespace semvox;

constexpr std::size_t kClasses = 10;
constexpr double kRes = 0.2;

/// Points spread over a 100^3-cell block with mixed ranges; a fifth carry no
/// measurement.
SemanticCloud random_cloud(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> pos(0.0, 100 * kRes);
  std::uniform_real_distribution<float> score(0.0f, 1.0f);
  std::uniform_real_distribution<float> range(0.5f, 50.0f);
  SemanticCloud c(kClasses);
  c.reserve(n);
  std::vector<float> s(kClasses);
  for (std::size_t i = 0; i < n; ++i) {
    const bool empty = i % 5 == 0;
    for (float& x : s) x = empty ? kNoMeasurement : score(rng);
    c.push_back(Vec3(pos(rng), pos(rng), pos(rng)), s, range(rng));
  }
  return c;
}

map::VoxelMap prefilled_map(map::FusionStrategy strategy, std::size_t voxels) {
  map::VoxelMap m(semantics::Ontology::canonical(), {kRes, strategy, {}});
  std::mt19937_64 rng(1);
  const std::size_t batch = 100000;
  for (std::size_t done = 0; done < voxels * 3; done += batch) m.fuse_cloud(random_cloud(rng, batch));
  return m;
}

void BM_FuseCloud(benchmark::State& state) {
  const auto strategy = map::kAllStrategies[state.range(0)];
  map::VoxelMap m = prefilled_map(strategy, 200000);
  std::mt19937_64 rng(2);
  const SemanticCloud cloud = random_cloud(rng, 100000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.fuse_cloud(cloud));
  }
  state.SetLabel(std::string(map::to_string(strategy)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.size()));
}
BENCHMARK(BM_FuseCloud)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_Snapshot(benchmark::State& state) {
  map::VoxelMap m = prefilled_map(map::FusionStrategy::kRangeBased,
                                  static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(3);
  const SemanticCloud touch = random_cloud(rng, 1000);
  for (auto _ : state) {
    // Touch a few blocks so each snapshot has copy-on-write work to do.
    state.PauseTiming();
    m.fuse_cloud(touch);
    state.ResumeTiming();
    benchmark::DoNotOptimize(m.snapshot());
  }
  state.counters["voxels"] = static_cast<double>(m.size());
}
BENCHMARK(BM_Snapshot)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_RaycastLidar(benchmark::State& state) {
  const sim::Fixture f = sim::fixture("popup_rock");
  const sim::LidarSpec spec = sim::SensorRig::default_rig().lidars.front();
  const auto pose = geometry::Pose::from_xyz_ypr(Vec3(0, 0, 1.8), 0, 0, 0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::raycast_lidar(f.scene, pose, spec, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(spec.ray_count()));
}
BENCHMARK(BM_RaycastLidar)->Unit(benchmark::kMillisecond);

void BM_Backproject(benchmark::State& state) {
  const sim::Fixture f = sim::fixture("popup_rock");
  const auto rig = sim::SensorRig::default_rig();
  const auto vehicle = geometry::Pose::from_xyz_ypr(Vec3(0, 0, 0), 0, 0, 0);
  const auto lidar_pose = vehicle * rig.lidars.front().mount;
  const auto& cam = rig.cameras.front();
  const auto cam_pose = vehicle * cam.mount;
  const auto scan = sim::raycast_lidar(f.scene, lidar_pose, rig.lidars.front(), 1);
  const auto image = sim::render_semantic_image(f.scene, cam_pose, cam.intrinsics, rig.oracle, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        geometry::backproject_cloud(scan.points, lidar_pose, cam_pose, cam.intrinsics, image));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scan.points.size()));
}
BENCHMARK(BM_Backproject)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
