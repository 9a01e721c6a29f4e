// Acceptance checks for the primary criteria. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "oracles.hpp"
#include "semvox/cli.hpp"
#include "semvox/eval.hpp"
#include "semvox/io/config_io.hpp"
#include "semvox/metrics.hpp"
#include "semvox/sim/fixtures.hpp"
#include "semvox/voxel_map.hpp"

namespace {

using namespace semvox;
using namespace semvox::semantics::canonical;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

constexpr std::size_t kN = 10;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240611);
  std::size_t total_points = 0;
  const std::size_t sequences = 100;
  for (std::size_t s = 0; s < sequences; ++s) {
    const std::size_t points = 10000 + s * 909;  // 10^4 .. 10^5
    const auto log = testing::random_log(rng, points, kN, 0.2, 12 + static_cast<int>(s % 20));
    map::VoxelMap m(semantics::Ontology::canonical(), {0.2, map::FusionStrategy::kRangeBased, {}});
    std::uniform_int_distribution<std::size_t> chunk(1, 8000);
    for (std::size_t b = 0; b < log.size();) {
      const std::size_t e = std::min(log.size(), b + chunk(rng));
      m.fuse_cloud(testing::to_cloud(log, b, e, kN));
      b = e;
    }
    const auto oracle = testing::min_range_oracle(log, 0.2, kN);
    if (const auto diff = testing::compare_with_oracle(m.snapshot(), oracle)) {
      return {false, "sequence " + std::to_string(s) + ": " + *diff};
    }
    total_points += points;
  }
  const double secs = seconds_since(t0);
  return {secs < 60.0, std::to_string(sequences) + " sequences, " + std::to_string(total_points) +
                           " points bit-equal to the min-range oracle in " +
                           fmt("%.1f", secs) + " s (limit 60 s)"};
}

// ---------------------------------------------------------------------------

Outcome branch_table() {
  // Stored voxel: class 0 at range 4 (conf 0.6), class 1 at range 4
  // (conf 0.3), remaining classes never measured.
  const float stored_range = 4.0f;
  std::vector<float> stored(kN, kNoMeasurement);
  stored[0] = 0.6f;
  stored[1] = 0.3f;
  const map::Voxel base = map::fuse_point_range_based(std::nullopt, ClassConfidence(stored),
                                                      stored_range);
  struct Case {
    const char* name;
    float incoming_range;
    bool incoming_nan;
    std::size_t cls;
    bool expect_replace;
  };
  const Case cases[] = {
      {"R<R' finite", 6.0f, false, 0, false},
      {"R<R' NaN", 6.0f, true, 0, false},
      {"R>R' finite", 2.0f, false, 0, true},
      {"R>R' NaN", 2.0f, true, 0, false},
      {"R=R' finite (tie keeps)", 4.0f, false, 0, false},
      {"R=R' NaN", 4.0f, true, 0, false},
      {"unmeasured class, finite", 9.0f, false, 5, true},
      {"unmeasured class, NaN", 9.0f, true, 5, false},
  };
  std::size_t passed = 0;
  std::string failed;
  for (const Case& c : cases) {
    std::vector<float> in(kN, kNoMeasurement);
    const float value = 0.875f;
    if (!c.incoming_nan) in[c.cls] = value;
    const map::Voxel out =
        map::fuse_point_range_based(base, ClassConfidence(in), c.incoming_range);
    // Same measurement through the map.
    map::VoxelMap m(semantics::Ontology::canonical(), {1.0, map::FusionStrategy::kRangeBased, {}});
    SemanticCloud cloud(kN);
    cloud.push_back(Vec3(0.5, 0.5, 0.5), stored, stored_range);
    cloud.push_back(Vec3(0.5, 0.5, 0.5), in, c.incoming_range);
    m.fuse_cloud(cloud);
    const auto via_map = m.query({0, 0, 0});

    const float want = c.expect_replace ? value : base.confidence[c.cls];
    bool ok = testing::same_bits(out.confidence[c.cls], want) && via_map &&
              testing::same_bits(via_map->confidence[c.cls], want);
    for (std::size_t j = 0; j < kN; ++j) {
      if (j == c.cls) continue;
      ok = ok && testing::same_bits(out.confidence[j], base.confidence[j]);
    }
    const float want_range =
        c.incoming_nan ? stored_range : std::min(stored_range, c.incoming_range);
    ok = ok && out.range == want_range && via_map->range == want_range;
    if (ok) {
      ++passed;
    } else {
      failed += std::string(failed.empty() ? "" : ", ") + c.name;
    }
  }
  const std::size_t total = std::size(cases);
  return {passed == total, std::to_string(passed) + "/" + std::to_string(total) +
                               " branch cases match" + (failed.empty() ? "" : "; failed: " + failed)};
}

// ---------------------------------------------------------------------------

sim::ScenarioConfig fixture_config(const std::string& name, map::FusionStrategy s) {
  const sim::Fixture f = sim::fixture(name);
  sim::ScenarioConfig c;
  c.scene = f.scene;
  c.trajectory = f.trajectory;
  c.rig = f.rig;
  c.strategy = s;
  c.seed = 7;
  return c;
}

eval::LatencyResult popup_of(const sim::ScenarioTimeline& tl) {
  const auto& cfg = tl.config;
  const auto hazards = eval::hazard_cells(cfg.scene, cfg.resolution);
  const auto gt = eval::build_hindsight_map(cfg.scene, hazards, cfg.resolution);
  return eval::popup_latency(tl, hazards, gt);
}

std::string latency_text(const eval::LatencyResult& r) {
  if (!r.frames) return std::string(eval::to_string(r.status));
  return std::to_string(*r.frames) + " frames";
}

Outcome popup() {
  const int k = 5;
  auto t0 = Clock::now();
  const auto range = popup_of(sim::run_scenario(
      fixture_config("popup_rock", map::FusionStrategy::kRangeBased)));
  const double range_secs = seconds_since(t0);

  auto vote_cfg = fixture_config("popup_rock", map::FusionStrategy::kVote);
  vote_cfg.priors.push_back({"rock", kDryVegetation, k, 30.0});
  t0 = Clock::now();
  const auto vote = popup_of(sim::run_scenario(vote_cfg));
  const double vote_secs = seconds_since(t0);

  const bool ok = range.frames && *range.frames == 0 && vote.frames &&
                  *vote.frames >= static_cast<std::uint32_t>(k) && range_secs < 10.0 &&
                  vote_secs < 10.0;
  return {ok, "range_based latency " + latency_text(range) + " (want 0), vote primed with " +
                  std::to_string(k) + " latency " + latency_text(vote) + " (want >= " +
                  std::to_string(k) + "); runs " + fmt("%.1f", range_secs) + " s / " +
                  fmt("%.1f", vote_secs) + " s (limit 10 s)"};
}

Outcome reverse() {
  const auto range =
      eval::evaluate(sim::run_scenario(fixture_config("reverse_doubleback",
                                                      map::FusionStrategy::kRangeBased)));
  const auto average = eval::evaluate(
      sim::run_scenario(fixture_config("reverse_doubleback", map::FusionStrategy::kAverage)));
  const std::size_t rv = range.reverse->violations;
  const std::size_t av = average.reverse->violations;
  return {rv == 0 && av >= 1, "range_based " + std::to_string(rv) + " violations (want 0), average " +
                                  std::to_string(av) + " (want >= 1), " +
                                  std::to_string(range.reverse->protected_keys) +
                                  " protected voxels"};
}

const sim::ScenarioTimeline& overhang_timeline() {
  static const sim::ScenarioTimeline tl =
      sim::run_scenario(fixture_config("overhang_water", map::FusionStrategy::kRangeBased));
  return tl;
}

Outcome water() {
  const auto w = eval::water_handling(overhang_timeline());
  const bool ok = w.first_injection_frame && w.occupied_before == 0 && w.coverage &&
                  *w.coverage >= 0.99 && w.max_offset_error && *w.max_offset_error <= 0.02;
  return {ok, "occupied before injection " + std::to_string(w.occupied_before) +
                  " (want 0), coverage " + std::to_string(w.covered_after) + "/" +
                  std::to_string(w.footprint_columns) + " = " +
                  (w.coverage ? fmt("%.4f", *w.coverage) : "none") + " (want >= 0.99), " +
                  "max offset error " +
                  (w.max_offset_error ? fmt("%.5f", *w.max_offset_error) : "none") +
                  " m over " + std::to_string(w.fits) + " fits (want <= 0.02)"};
}

Outcome overhang() {
  const auto& tl = overhang_timeline();
  const auto o = eval::overhang_separation(tl.final_map, tl.config.scene);
  const bool ok = o.slab_voxels > 0 && o.slab_vegetation == o.slab_voxels &&
                  o.floor_voxels > 0 && o.floor_ground == o.floor_voxels;
  return {ok, "slab " + std::to_string(o.slab_vegetation) + "/" + std::to_string(o.slab_voxels) +
                  " vegetation, floor " + std::to_string(o.floor_ground) + "/" +
                  std::to_string(o.floor_voxels) + " ground/trail (want 100% each)"};
}

// ---------------------------------------------------------------------------

semantics::LabelMask to_mask(int w, int h, const std::vector<int>& labels) {
  semantics::LabelMask m(w, h);
  for (int i = 0; i < w * h; ++i) {
    if (labels[i] >= 0) m.set(i % w, i / w, static_cast<ClassIndex>(labels[i]));
  }
  return m;
}

Outcome metrics() {
  std::vector<std::string> problems;
  std::mt19937_64 rng(99);

  // IoU / mIoU against a pixel-loop oracle.
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 2 + rng() % 7;
    const int w = 1 + static_cast<int>(rng() % 32);
    const int h = 1 + static_cast<int>(rng() % 32);
    std::vector<int> gt(w * h);
    std::vector<int> pred(w * h);
    for (int i = 0; i < w * h; ++i) {
      gt[i] = rng() % 4 == 0 ? -1 : static_cast<int>(rng() % n);
      pred[i] = rng() % 5 == 0 ? -1 : static_cast<int>(rng() % n);
    }
    const auto cm = semantics::accumulate_confusion(to_mask(w, h, gt), to_mask(w, h, pred), n);
    const auto want_cm = testing::brute_confusion(gt, pred, n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (cm.at(a, b) != want_cm[a][b]) problems.push_back("confusion case " + std::to_string(c));
      }
    }
    const auto iou = semantics::iou_per_class(cm);
    const auto want = testing::brute_iou(gt, pred, n);
    double sum = 0;
    int present = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (iou[j].has_value() != want[j].has_value() ||
          (want[j] && std::abs(*iou[j] - *want[j]) > 1e-9)) {
        problems.push_back("iou case " + std::to_string(c));
      }
      if (want[j]) {
        sum += *want[j];
        ++present;
      }
    }
    const auto mi = semantics::miou(cm);
    if (present == 0 ? mi.has_value() : (!mi || std::abs(*mi - sum / present) > 1e-9)) {
      problems.push_back("miou case " + std::to_string(c));
    }
  }

  // The 0.5-or-greater rule.
  const auto threshold_of = [](std::vector<float> s) {
    ConfidenceImage img(1, 1, s.size(), 0.0f);
    img.set(0, 0, ClassConfidence(std::move(s)));
    return semantics::threshold_prediction(img, 0.5f).at(0, 0);
  };
  if (threshold_of({0.7f, 0.3f, 0, 0}) != 0) problems.push_back("threshold 0.7");
  if (threshold_of({0.5f, 0.5f, 0, 0}) != 0) problems.push_back("threshold tie");
  if (threshold_of({0.0f, 0.0f, 0.5f, 0}) != 2) problems.push_back("threshold exactly 0.5");
  if (threshold_of({0.2f, 0.2f, 0.2f, 0.2f})) problems.push_back("threshold all 0.2");
  if (threshold_of({std::nextafter(0.5f, 0.0f), 0.1f})) problems.push_back("threshold below 0.5");

  // Remapping reproduces the published grouping.
  using Groups = std::map<std::string, std::vector<std::string>>;
  const std::vector<std::pair<const semantics::RemapTable*, Groups>> tables = {
      {&semantics::RemapTable::canonical_to_evaluation(),
       {{"ground", {"ground", "trail"}},
        {"grass", {"grass"}},
        {"vegetation", {"trunk", "dry_vegetation", "lush_vegetation"}},
        {"obstacle", {"obstacle_rock", "log"}},
        {"water", {"water"}},
        {"sky", {"sky"}}}},
      {&semantics::RemapTable::yamaha_to_evaluation(),
       {{"ground", {"trail", "rough_trail"}},
        {"grass", {"grass", "non_traversable_low_vegetation"}},
        {"vegetation", {"high_vegetation"}},
        {"obstacle", {"obstacle"}},
        {"water", {"puddle"}},
        {"sky", {"sky"}}}},
      {&semantics::RemapTable::rellis_to_evaluation(),
       {{"ground", {"asphalt", "mud", "concrete"}},
        {"grass", {"grass"}},
        {"vegetation", {"tree", "bush"}},
        {"obstacle", {"log", "container", "vehicle", "pole", "barrier", "rubble", "fence",
                      "person", "building"}},
        {"water", {"water", "puddle"}},
        {"sky", {"sky"}}}},
  };
  for (const auto& [table, groups] : tables) {
    const auto& src = table->source();
    const auto& dst = table->target();
    // One synthetic mask holding (index + 1) pixels of every source class
    // plus unlabeled pixels.
    std::vector<int> labels;
    for (std::size_t s = 0; s < src.size(); ++s) labels.insert(labels.end(), s + 1, int(s));
    labels.insert(labels.end(), 7, -1);
    const int w = static_cast<int>(labels.size());
    const auto out = semantics::remap_mask(to_mask(w, 1, labels), *table);
    std::vector<std::uint64_t> got(dst.size(), 0);
    std::size_t unlabeled = 0;
    for (int u = 0; u < w; ++u) {
      if (const auto c = out.at(u, 0)) {
        ++got[*c];
      } else {
        ++unlabeled;
      }
    }
    std::vector<std::uint64_t> want(dst.size(), 0);
    for (const auto& [target, sources] : groups) {
      for (const auto& s : sources) want[dst.index_of(target)] += src.index_of(s) + 1;
    }
    if (got != want || unlabeled != 7) problems.push_back("remap grouping " + dst.name(0));
  }

  // Dataset statistics: hand-computed fixtures and the 100% identity.
  {
    std::vector<int> one(100, -1);
    std::fill(one.begin(), one.begin() + 25, int(kGround));
    const std::vector<semantics::LabelMask> a{to_mask(10, 10, one)};
    const auto s = semantics::dataset_stats(a, kN);
    if (s.labeled_percent() != 25.0 || s.class_share_percent()[kGround] != 100.0) {
      problems.push_back("stats single mask");
    }
    std::vector<int> g(100, -1);
    std::fill(g.begin(), g.begin() + 30, int(kGrass));
    std::vector<int> d(100, -1);
    std::fill(d.begin(), d.begin() + 10, int(kGround));
    const std::vector<semantics::LabelMask> b{to_mask(10, 10, g), to_mask(10, 10, d)};
    const auto t = semantics::dataset_stats(b, kN);
    if (t.labeled_percent() != 20.0 || t.class_share_percent()[kGrass] != 75.0 ||
        t.class_share_percent()[kGround] != 25.0) {
      problems.push_back("stats two masks");
    }
    for (int c = 0; c < 100; ++c) {
      std::vector<semantics::LabelMask> masks;
      for (int m = 0; m < 1 + c % 4; ++m) {
        std::vector<int> l(16 * 9);
        for (int& x : l) x = rng() % 3 == 0 ? -1 : static_cast<int>(rng() % kN);
        masks.push_back(to_mask(16, 9, l));
      }
      const auto shares = semantics::dataset_stats(masks, kN).class_share_percent();
      const double total = std::accumulate(shares.begin(), shares.end(), 0.0);
      if (std::abs(total - 100.0) > 1e-6) problems.push_back("share sum");
    }
  }

  std::string detail = "100 random IoU/mIoU cases, threshold rule, 3 remap tables, stats fixtures";
  if (!problems.empty()) {
    detail += "; " + std::to_string(problems.size()) + " mismatches, first: " + problems.front();
  }
  return {problems.empty(), detail};
}

// ---------------------------------------------------------------------------

/// Random cloud over an nx x ny x nz block of cells: mixed ranges and
/// full, partial and empty score vectors.
SemanticCloud random_cloud(std::mt19937_64& rng, std::size_t points, int nx, int ny, int nz,
                           double res) {
  std::uniform_int_distribution<int> ix(0, nx - 1);
  std::uniform_int_distribution<int> iy(0, ny - 1);
  std::uniform_int_distribution<int> iz(0, nz - 1);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  std::uniform_int_distribution<int> range_step(1, 400);
  std::uniform_real_distribution<float> score(0.0f, 1.0f);
  std::uniform_int_distribution<int> kind(0, 9);
  SemanticCloud c(kN);
  c.reserve(points);
  std::vector<float> s(kN);
  for (std::size_t i = 0; i < points; ++i) {
    const Vec3 p((ix(rng) + frac(rng)) * res, (iy(rng) + frac(rng)) * res,
                 (iz(rng) + frac(rng)) * res);
    const int k = kind(rng);
    for (std::size_t j = 0; j < kN; ++j) {
      s[j] = (k < 2 || (k < 5 && frac(rng) < 0.5)) ? kNoMeasurement : score(rng);
    }
    c.push_back(p, s, 0.125f * static_cast<float>(range_step(rng)));
  }
  return c;
}

/// Every cell of an nx x ny x nz block once, at the cell centre.
SemanticCloud grid_cloud(std::mt19937_64& rng, int x0, int x1, int ny, int nz, double res) {
  SemanticCloud c(kN);
  c.reserve(static_cast<std::size_t>(x1 - x0) * ny * nz);
  std::uniform_int_distribution<int> cls(0, kN - 1);
  std::uniform_int_distribution<int> range_step(1, 400);
  for (int x = x0; x < x1; ++x) {
    for (int y = 0; y < ny; ++y) {
      for (int z = 0; z < nz; ++z) {
        c.push_back(Vec3((x + 0.5) * res, (y + 0.5) * res, (z + 0.5) * res),
                    ClassConfidence::one_hot(kN, static_cast<ClassIndex>(cls(rng)), 0.9f).scores(),
                    0.125f * static_cast<float>(range_step(rng)));
      }
    }
  }
  return c;
}

std::uint64_t total_hits(const map::MapSnapshot& s) {
  std::uint64_t h = 0;
  for (const auto& [k, v] : s.voxels()) h += v.hits;
  return h;
}

Outcome throughput() {
  const double res = 0.2;
  const int nx = 100;
  const int ny = 100;
  const int nz = 100;
  const std::size_t points = 100000;
  const std::size_t timed_clouds = 20;
  std::mt19937_64 rng(4242);

  map::VoxelMap m(semantics::Ontology::canonical(), {res, map::FusionStrategy::kRangeBased, {}});
  std::vector<SemanticCloud> prefill;
  for (int x = 0; x < nx; x += 10) prefill.push_back(grid_cloud(rng, x, x + 10, ny, nz, res));
  for (const auto& c : prefill) m.fuse_cloud(c);
  const std::size_t live = m.size();

  std::vector<SemanticCloud> clouds;
  for (std::size_t i = 0; i < timed_clouds; ++i) {
    // A tenth of the block lies outside the prefilled cells, so new voxels
    // keep being created.
    clouds.push_back(random_cloud(rng, points, nx + nx / 10, ny, nz, res));
  }

  std::atomic<bool> done{false};
  std::vector<map::MapSnapshot> kept;
  std::size_t snapshots = 0;
  std::mutex mu;
  std::condition_variable cv;
  std::thread snapper([&] {
    std::unique_lock lock(mu);
    while (!done) {
      map::MapSnapshot s = m.snapshot();
      ++snapshots;
      if (kept.size() < 2 && snapshots >= 2) kept.push_back(std::move(s));
      cv.wait_for(lock, std::chrono::milliseconds(200), [&] { return done.load(); });
    }
  });

  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    m.set_frame(static_cast<std::uint32_t>(i + 1));
    m.fuse_cloud(clouds[i]);
  }
  const double secs = seconds_since(t0);
  {
    std::lock_guard lock(mu);
    done = true;
  }
  cv.notify_all();
  snapper.join();
  const double rate = static_cast<double>(timed_clouds) / secs;

  // Correctness: the final map and the kept concurrent snapshots equal the
  // oracle over the corresponding prefix of clouds.
  const std::uint64_t prefill_points =
      std::accumulate(prefill.begin(), prefill.end(), std::uint64_t{0},
                      [](std::uint64_t a, const SemanticCloud& c) { return a + c.size(); });
  std::vector<std::pair<std::size_t, const map::MapSnapshot*>> checks;
  for (const auto& s : kept) {
    const std::uint64_t h = total_hits(s);
    if (h < prefill_points || (h - prefill_points) % points != 0) {
      return {false, "snapshot observed a partially fused cloud"};
    }
    checks.emplace_back(static_cast<std::size_t>((h - prefill_points) / points), &s);
  }
  const map::MapSnapshot final_snap = m.snapshot();
  checks.emplace_back(timed_clouds, &final_snap);
  std::sort(checks.begin(), checks.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  testing::MinRangeOracle oracle(res, kN);
  for (const auto& c : prefill) oracle.add(c);
  std::size_t fed = 0;
  for (const auto& [prefix, snap] : checks) {
    while (fed < prefix) oracle.add(clouds[fed++]);
    if (const auto diff = testing::compare_with_oracle(*snap, oracle.voxels())) {
      return {false, "after " + std::to_string(prefix) + " clouds: " + *diff};
    }
  }

  const bool ok = rate >= 10.0 && live >= 1000000;
  return {ok, fmt("%.1f", rate) + " clouds/s at " + std::to_string(points) +
                  " points/cloud into " + std::to_string(live) + " -> " +
                  std::to_string(final_snap.size()) + " live voxels (want >= 10 clouds/s, >= 1e6 " +
                  "voxels), " + std::to_string(snapshots) + " concurrent snapshots at 5 Hz, " +
                  std::to_string(checks.size()) + " states oracle-equal"};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), root).string()] = io::read_text_file(e.path());
    }
  }
  return files;
}

Outcome determinism() {
  const fs::path tmp =
      fs::temp_directory_path() / ("semvox_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  const fs::path fixtures = fs::path(SEMVOX_SOURCE_DIR) / "data" / "fixtures" / "popup_rock";
  cli::RunConfig rc;
  rc.scene = fixtures / "scene.json";
  rc.trajectory = fixtures / "trajectory.json";
  rc.rig = fixtures / "rig.json";
  rc.seed = 7;
  rc.out = tmp / "a";
  cli::cmd_simulate(rc);
  rc.out = tmp / "b";
  cli::cmd_simulate(rc);
  const auto a = tree(tmp / "a");
  const auto b = tree(tmp / "b");
  std::size_t bytes = 0;
  for (const auto& [name, text] : a) bytes += text.size();
  fs::remove_all(tmp);
  return {a == b && !a.empty(), "two popup_rock simulations (seed 7): " + std::to_string(a.size()) +
                                    " files, " + std::to_string(bytes) + " bytes, " +
                                    (a == b ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
  report("fusion-oracle equivalence", oracle_equivalence);
  report("range-based branch table", branch_table);
  report("pop-up latency (popup_rock)", popup);
  report("reverse stability (reverse_doubleback)", reverse);
  report("water handling (overhang_water)", water);
  report("overhang geometry (overhang_water)", overhang);
  report("metrics machinery", metrics);
  report("throughput contract", throughput);
  report("determinism (simulate)", determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
