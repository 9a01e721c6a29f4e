#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semvox/eval.hpp"
#include "semvox/metrics.hpp"
#include "semvox/sim/scenario.hpp"

/// Subcommands of the `semvox` tool, callable in-process. Every command
/// writes its outputs into a staging location next to the destination and
/// renames it into place only after all outputs were written, so a failed
/// run leaves nothing behind. Existing destinations are never overwritten.
namespace semvox::cli {

namespace fs = std::filesystem;

struct RunConfig {
  fs::path scene;
  fs::path trajectory;
  fs::path rig;
  std::string strategy = "range_based";
  /// Required; there is no clock-derived default.
  std::optional<std::uint64_t> seed;
  double resolution = 0.2;
  fs::path out;
  /// Overrides the rig's map rate when set.
  std::optional<double> map_rate_hz;
  /// Also write per-frame LiDAR clouds into the timeline.
  bool record_sensor_data = false;
};

/// Loads and validates the scenario. Errors are prefixed with the flag that
/// supplied the offending value, e.g. "--rig: cameras[1].fx: must be > 0".
sim::ScenarioConfig load_scenario(const RunConfig& config);

/// Runs the scenario and writes a timeline directory to `config.out`.
sim::ScenarioTimeline cmd_simulate(const RunConfig& config);

/// Evaluates a timeline directory, optionally against a replacement scene.
/// With `out` set, writes report.json and report.csv there.
eval::FusionReport cmd_eval(const fs::path& timeline_dir, const std::optional<fs::path>& scene,
                            const std::optional<fs::path>& out);

/// Runs the scenario once per strategy with the same seed. With
/// `config.out` set, writes compare.csv and one report JSON per strategy.
std::vector<eval::FusionReport> cmd_compare(const RunConfig& config,
                                            const std::vector<std::string>& strategies);

/// Label masks (*.png) of a directory in filename order.
std::vector<fs::path> list_masks(const fs::path& dir);

semantics::DatasetStats cmd_dataset_stats(const fs::path& mask_dir,
                                          const semantics::Ontology& ontology);
/// Header `images,px_labeled,<class>...` and one row of percentages.
std::string stats_csv(const semantics::DatasetStats& stats, const semantics::Ontology& ontology);

/// Writes every mask of `mask_dir`, remapped, under the same name in `out`.
std::size_t cmd_remap(const fs::path& mask_dir, const semantics::RemapTable& table,
                      const fs::path& out);

/// Pairs ground-truth masks with predictions by file stem. A prediction is a
/// float32 confidence array (.npy, thresholded here) or a label mask (.png,
/// used as is). Unpaired files on either side abort the run with
/// UnpairedFilesError listing them.
semantics::ConfusionMatrix cmd_miou(const fs::path& gt_dir, const fs::path& pred_dir,
                                    float threshold, const semantics::Ontology& ontology);
/// Header `class,iou,tp,fp,fn` with one row per class, then `mean`, then
/// `ignored`. Missing scores are empty fields.
std::string miou_csv(const semantics::ConfusionMatrix& cm, const semantics::Ontology& ontology);

/// Writes scene.json, trajectory.json and rig.json of a built-in fixture.
void cmd_fixture(const std::string& name, const fs::path& out);

void cmd_export_ply(const fs::path& map_dump, const fs::path& out, bool ascii);

class UnpairedFilesError : public Error {
 public:
  UnpairedFilesError(std::vector<std::string> gt_only, std::vector<std::string> pred_only);
  std::vector<std::string> gt_only;
  std::vector<std::string> pred_only;
};

/// Entry point of the `semvox` executable. Returns the process exit code:
/// 0 when every requested output was written, 1 on a runtime error, and the
/// argument parser's code for usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semvox::cli
