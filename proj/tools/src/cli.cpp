#include "semvox/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "semvox/io/config_io.hpp"
#include "semvox/io/label_io.hpp"
#include "semvox/io/map_io.hpp"
#include "semvox/io/timeline_io.hpp"
#include "semvox/sim/fixtures.hpp"

namespace semvox::cli {
namespace {

/// Output staged beside its destination and renamed into place on commit.
class Staging {
 public:
  Staging(const fs::path& destination, bool directory) : final_(destination) {
    if (destination.empty()) throw ConfigurationError("--out: an output path is required");
    if (fs::exists(destination)) {
      throw ConfigurationError("--out: '" + destination.string() + "' already exists");
    }
    const fs::path parent = destination.parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    tmp_ = parent / ("." + destination.filename().string() + ".partial");
    fs::remove_all(tmp_);
    if (directory) fs::create_directories(tmp_);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(tmp_, ec);
    }
  }

  const fs::path& path() const { return tmp_; }
  void commit() {
    fs::rename(tmp_, final_);
    committed_ = true;
  }

 private:
  fs::path final_;
  fs::path tmp_;
  bool committed_ = false;
};

template <class F>
auto with_flag(const char* flag, F&& load) {
  try {
    return load();
  } catch (const Error& e) {
    throw ConfigurationError(std::string(flag) + ": " + e.what());
  }
}

std::string read_flag_file(const char* flag, const fs::path& path) {
  if (path.empty()) throw ConfigurationError(std::string(flag) + ": a path is required");
  return with_flag(flag, [&] { return io::read_text_file(path); });
}

map::FusionStrategy parse_strategy_flag(const std::string& name) {
  const auto s = map::parse_strategy(name);
  if (!s) {
    throw ConfigurationError("--strategy: unknown strategy '" + name +
                             "' (expected range_based, bayesian, vote or average)");
  }
  return *s;
}

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(10);
  os << *v;
  return os.str();
}

std::string fmt(double v) { return fmt_opt(v); }

}  // namespace

UnpairedFilesError::UnpairedFilesError(std::vector<std::string> gt, std::vector<std::string> pred)
    : Error([&] {
        std::string msg = "unpaired files:";
        for (const auto& f : gt) msg += "\n  ground truth without prediction: " + f;
        for (const auto& f : pred) msg += "\n  prediction without ground truth: " + f;
        return msg;
      }()),
      gt_only(std::move(gt)),
      pred_only(std::move(pred)) {}

sim::ScenarioConfig load_scenario(const RunConfig& rc) {
  sim::ScenarioConfig c;
  const std::string scene = read_flag_file("--scene", rc.scene);
  c.scene = with_flag("--scene", [&] { return io::scene_from_json(scene); });
  const std::string trajectory = read_flag_file("--trajectory", rc.trajectory);
  c.trajectory = with_flag("--trajectory", [&] { return io::trajectory_from_json(trajectory); });
  const std::string rig = read_flag_file("--rig", rc.rig);
  c.rig = with_flag("--rig", [&] { return io::rig_from_json(rig); });
  c.strategy = parse_strategy_flag(rc.strategy);
  if (!rc.seed) throw ConfigurationError("--seed: a seed is required");
  c.seed = *rc.seed;
  if (!(rc.resolution > 0.0) || !std::isfinite(rc.resolution)) {
    throw ConfigurationError("--resolution: must be a positive number");
  }
  c.resolution = rc.resolution;
  if (rc.map_rate_hz) {
    if (!(*rc.map_rate_hz > 0.0) || !std::isfinite(*rc.map_rate_hz)) {
      throw ConfigurationError("--map-rate: must be a positive number");
    }
    c.map_rate_hz = rc.map_rate_hz;
  }
  c.record_sensor_data = rc.record_sensor_data;
  with_flag("--scene/--trajectory/--rig", [&] {
    c.validate();
    return 0;
  });
  return c;
}

sim::ScenarioTimeline cmd_simulate(const RunConfig& rc) {
  const sim::ScenarioConfig config = load_scenario(rc);
  Staging staging(rc.out, true);
  sim::ScenarioTimeline timeline = sim::run_scenario(config);
  io::write_timeline(timeline, staging.path());
  staging.commit();
  return timeline;
}

eval::FusionReport cmd_eval(const fs::path& timeline_dir, const std::optional<fs::path>& scene,
                            const std::optional<fs::path>& out) {
  std::optional<Staging> staging;
  if (out) staging.emplace(*out, true);
  sim::ScenarioTimeline timeline = io::read_timeline(timeline_dir);
  if (scene) {
    const std::string text = read_flag_file("--scene", *scene);
    timeline.config.scene = with_flag("--scene", [&] { return io::scene_from_json(text); });
    with_flag("--scene", [&] {
      timeline.config.scene.validate();
      return 0;
    });
  }
  eval::FusionReport report = eval::evaluate(timeline);
  if (staging) {
    io::write_text_file(staging->path() / "report.json", eval::to_json(report) + "\n");
    io::write_text_file(staging->path() / "report.csv",
                        eval::csv_header() + "\n" + eval::to_csv_row(report) + "\n");
    staging->commit();
  }
  return report;
}

std::vector<eval::FusionReport> cmd_compare(const RunConfig& rc,
                                            const std::vector<std::string>& strategies) {
  if (strategies.empty()) throw ConfigurationError("--strategy: no strategies given");
  const sim::ScenarioConfig base = load_scenario(rc);
  std::vector<map::FusionStrategy> parsed;
  for (const auto& s : strategies) parsed.push_back(parse_strategy_flag(s));
  std::optional<Staging> staging;
  if (!rc.out.empty()) staging.emplace(rc.out, true);

  std::vector<eval::FusionReport> reports;
  for (const auto s : parsed) {
    sim::ScenarioConfig c = base;
    c.strategy = s;
    reports.push_back(eval::evaluate(sim::run_scenario(c)));
  }
  if (staging) {
    std::string csv = eval::csv_header() + "\n";
    for (const auto& r : reports) {
      csv += eval::to_csv_row(r) + "\n";
      io::write_text_file(staging->path() / ("report_" + r.strategy + ".json"),
                          eval::to_json(r) + "\n");
    }
    io::write_text_file(staging->path() / "compare.csv", csv);
    staging->commit();
  }
  return reports;
}

std::vector<fs::path> list_masks(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ConfigurationError("'" + dir.string() + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw InsufficientDataError("no label masks (*.png) in '" + dir.string() + "'");
  }
  return files;
}

semantics::DatasetStats cmd_dataset_stats(const fs::path& mask_dir,
                                          const semantics::Ontology& ontology) {
  std::vector<semantics::LabelMask> masks;
  for (const auto& f : list_masks(mask_dir)) masks.push_back(io::read_mask(f));
  try {
    return semantics::dataset_stats(masks, ontology.size());
  } catch (const CorruptMaskError& e) {
    throw CorruptMaskError(std::string(e.what()) + " (ontology has " +
                           std::to_string(ontology.size()) + " classes)");
  }
}

std::string stats_csv(const semantics::DatasetStats& stats, const semantics::Ontology& ontology) {
  std::string out = "images,px_labeled";
  for (const auto& n : ontology.names()) out += "," + n;
  out += "\n" + std::to_string(stats.images) + "," + fmt(stats.labeled_percent());
  for (const double s : stats.class_share_percent()) out += "," + fmt(s);
  return out + "\n";
}

std::size_t cmd_remap(const fs::path& mask_dir, const semantics::RemapTable& table,
                      const fs::path& out) {
  const auto files = list_masks(mask_dir);
  Staging staging(out, true);
  for (const auto& f : files) {
    semantics::LabelMask remapped;
    try {
      remapped = semantics::remap_mask(io::read_mask(f), table);
    } catch (const CorruptMaskError& e) {
      throw CorruptMaskError(f.filename().string() + ": " + e.what());
    }
    io::write_mask(staging.path() / f.filename(), remapped);
  }
  staging.commit();
  return files.size();
}

semantics::ConfusionMatrix cmd_miou(const fs::path& gt_dir, const fs::path& pred_dir,
                                    float threshold, const semantics::Ontology& ontology) {
  if (!(threshold >= 0.0f && threshold <= 1.0f)) {
    throw ConfigurationError("--threshold: must lie in [0, 1]");
  }
  const auto gt_files = list_masks(gt_dir);
  if (!fs::is_directory(pred_dir)) {
    throw ConfigurationError("'" + pred_dir.string() + "' is not a directory");
  }
  std::map<std::string, fs::path> preds;
  for (const auto& e : fs::directory_iterator(pred_dir)) {
    const auto ext = e.path().extension();
    if (!e.is_regular_file() || (ext != ".npy" && ext != ".png")) continue;
    const auto [it, fresh] = preds.emplace(e.path().stem().string(), e.path());
    if (!fresh) {
      throw ConfigurationError("ambiguous predictions for '" + it->first + "' in '" +
                               pred_dir.string() + "'");
    }
  }
  std::vector<std::string> gt_only;
  std::vector<std::pair<fs::path, fs::path>> pairs;
  for (const auto& g : gt_files) {
    const auto it = preds.find(g.stem().string());
    if (it == preds.end()) {
      gt_only.push_back(g.filename().string());
    } else {
      pairs.emplace_back(g, it->second);
      preds.erase(it);
    }
  }
  std::vector<std::string> pred_only;
  for (const auto& [stem, p] : preds) pred_only.push_back(p.filename().string());
  if (!gt_only.empty() || !pred_only.empty()) {
    throw UnpairedFilesError(std::move(gt_only), std::move(pred_only));
  }

  semantics::ConfusionMatrix total(ontology.size());
  for (const auto& [g, p] : pairs) {
    const semantics::LabelMask gt = io::read_mask(g);
    semantics::LabelMask pred;
    if (p.extension() == ".npy") {
      const ConfidenceImage conf = io::read_npy_confidence(p);
      if (conf.num_classes() != ontology.size()) {
        throw ConfigurationError(p.filename().string() + ": " +
                                 std::to_string(conf.num_classes()) +
                                 " channels, ontology has " + std::to_string(ontology.size()) +
                                 " classes");
      }
      pred = semantics::threshold_prediction(conf, threshold);
    } else {
      pred = io::read_mask(p);
    }
    try {
      total += semantics::accumulate_confusion(gt, pred, ontology.size());
    } catch (const Error& e) {
      throw ConfigurationError(g.filename().string() + ": " + e.what());
    }
  }
  return total;
}

std::string miou_csv(const semantics::ConfusionMatrix& cm, const semantics::Ontology& ontology) {
  const auto iou = semantics::iou_per_class(cm);
  std::string out = "class,iou,tp,fp,fn\n";
  const std::size_t n = cm.num_classes();
  for (std::size_t j = 0; j < n; ++j) {
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      fp += cm.at(k, j);
      fn += cm.at(j, k);
    }
    out += ontology.name(static_cast<ClassIndex>(j)) + "," + fmt_opt(iou[j]) + "," +
           std::to_string(cm.at(j, j)) + "," + std::to_string(fp) + "," + std::to_string(fn) +
           "\n";
  }
  out += "mean," + fmt_opt(semantics::miou(cm)) + ",,,\n";
  out += "ignored," + std::to_string(cm.ignored) + ",,,\n";
  return out;
}

void cmd_fixture(const std::string& name, const fs::path& out) {
  const sim::Fixture f = with_flag("name", [&] { return sim::fixture(name); });
  Staging staging(out, true);
  io::write_text_file(staging.path() / "scene.json", io::scene_to_json(f.scene) + "\n");
  io::write_text_file(staging.path() / "trajectory.json",
                      io::trajectory_to_json(f.trajectory) + "\n");
  io::write_text_file(staging.path() / "rig.json", io::rig_to_json(f.rig) + "\n");
  staging.commit();
}

void cmd_export_ply(const fs::path& map_dump, const fs::path& out, bool ascii) {
  const map::MapSnapshot snapshot = io::read_map_dump(map_dump);
  Staging staging(out, false);
  io::write_ply(staging.path(), snapshot, ascii ? io::PlyFormat::kAscii : io::PlyFormat::kBinary);
  staging.commit();
}

namespace {

void add_run_flags(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--scene", rc.scene, "Scene JSON")->required();
  cmd->add_option("--trajectory", rc.trajectory, "Trajectory JSON")->required();
  cmd->add_option("--rig", rc.rig, "Sensor rig JSON")->required();
  cmd->add_option("--seed", rc.seed, "Random seed")->required();
  cmd->add_option("--resolution", rc.resolution, "Voxel edge length (m)")->capture_default_str();
  cmd->add_option("--map-rate", rc.map_rate_hz, "Map publication rate (Hz)");
}

void write_or_print(const std::optional<fs::path>& out, const std::string& text,
                    std::ostream& os) {
  if (!out) {
    os << text;
    return;
  }
  Staging staging(*out, false);
  io::write_text_file(staging.path(), text);
  staging.commit();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic voxel mapping: simulation, evaluation and dataset tools", "semvox"};
  app.require_subcommand(1);

  RunConfig sim_rc;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its timeline");
  add_run_flags(simulate, sim_rc);
  simulate->add_option("--strategy", sim_rc.strategy, "Fusion strategy")->capture_default_str();
  simulate->add_option("--out", sim_rc.out, "Timeline directory")->required();
  simulate->add_flag("--record-sensors", sim_rc.record_sensor_data,
                     "Also write per-frame LiDAR clouds");

  fs::path eval_dir;
  std::optional<fs::path> eval_scene;
  std::optional<fs::path> eval_out;
  auto* evalc = app.add_subcommand("eval", "Evaluate a timeline directory");
  evalc->add_option("timeline", eval_dir, "Timeline directory")->required();
  evalc->add_option("--scene", eval_scene, "Evaluate against this scene instead");
  evalc->add_option("--out", eval_out, "Report directory");

  RunConfig cmp_rc;
  std::vector<std::string> cmp_strategies{"range_based", "bayesian", "vote", "average"};
  auto* compare = app.add_subcommand("compare", "Run one scenario under several strategies");
  add_run_flags(compare, cmp_rc);
  compare->add_option("--strategy", cmp_strategies, "Strategies (repeat or comma-separate)")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--out", cmp_rc.out, "Report directory");

  fs::path stats_dir;
  std::string stats_ontology = "canonical";
  std::optional<fs::path> stats_out;
  auto* stats = app.add_subcommand("stats", "Labeled-pixel shares of a mask directory");
  stats->add_option("masks", stats_dir, "Mask directory")->required();
  stats->add_option("--ontology", stats_ontology, "Built-in name or ontology JSON")
      ->capture_default_str();
  stats->add_option("--out", stats_out, "CSV file (default: stdout)");

  fs::path remap_dir;
  std::string remap_table;
  fs::path remap_out;
  auto* remap = app.add_subcommand("remap", "Remap a mask directory to another ontology");
  remap->add_option("masks", remap_dir, "Mask directory")->required();
  remap->add_option("--remap-table", remap_table, "Built-in name or table JSON")->required();
  remap->add_option("--out", remap_out, "Output directory")->required();

  fs::path miou_gt;
  fs::path miou_pred;
  float miou_threshold = 0.5f;
  std::string miou_ontology = "evaluation";
  std::optional<fs::path> miou_out;
  auto* miou = app.add_subcommand("miou", "IoU of predictions against sparse label masks");
  miou->add_option("gt", miou_gt, "Ground-truth mask directory")->required();
  miou->add_option("pred", miou_pred, "Prediction directory (.npy or .png)")->required();
  miou->add_option("--threshold", miou_threshold, "Minimum confidence")->capture_default_str();
  miou->add_option("--ontology", miou_ontology, "Built-in name or ontology JSON")
      ->capture_default_str();
  miou->add_option("--out", miou_out, "CSV file (default: stdout)");

  fs::path ply_dump;
  fs::path ply_out;
  bool ply_ascii = false;
  auto* ply = app.add_subcommand("export-ply", "Convert a map dump to PLY");
  ply->add_option("map", ply_dump, "Map dump CSV")->required();
  ply->add_option("--out", ply_out, "PLY file")->required();
  ply->add_flag("--ascii", ply_ascii, "Write ASCII instead of binary");

  std::string fixture_name;
  fs::path fixture_out;
  auto* fixture = app.add_subcommand("fixture", "Write the JSON files of a built-in scenario");
  fixture->add_option("name", fixture_name, "Fixture name")
      ->required()
      ->check(CLI::IsMember(sim::fixture_names()));
  fixture->add_option("--out", fixture_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (simulate->parsed()) {
      const auto tl = cmd_simulate(sim_rc);
      std::size_t published = 0;
      for (const auto& f : tl.frames) published += f.published ? 1 : 0;
      out << "frames," << tl.frames.size() << "\npublished," << published << "\nfinal_voxels,"
          << tl.final_map.size() << "\n";
    } else if (evalc->parsed()) {
      const auto report = cmd_eval(eval_dir, eval_scene, eval_out);
      out << eval::csv_header() << "\n" << eval::to_csv_row(report) << "\n";
    } else if (compare->parsed()) {
      const auto reports = cmd_compare(cmp_rc, cmp_strategies);
      out << eval::csv_header() << "\n";
      for (const auto& r : reports) out << eval::to_csv_row(r) << "\n";
    } else if (stats->parsed()) {
      const auto ontology = with_flag("--ontology", [&] { return io::load_ontology(stats_ontology); });
      write_or_print(stats_out, stats_csv(cmd_dataset_stats(stats_dir, ontology), ontology), out);
    } else if (remap->parsed()) {
      const auto table =
          with_flag("--remap-table", [&] { return io::load_remap_table(remap_table); });
      const std::size_t n = cmd_remap(remap_dir, table, remap_out);
      out << "remapped," << n << "\n";
    } else if (miou->parsed()) {
      const auto ontology = with_flag("--ontology", [&] { return io::load_ontology(miou_ontology); });
      write_or_print(miou_out,
                     miou_csv(cmd_miou(miou_gt, miou_pred, miou_threshold, ontology), ontology),
                     out);
    } else if (ply->parsed()) {
      cmd_export_ply(ply_dump, ply_out, ply_ascii);
    } else if (fixture->parsed()) {
      cmd_fixture(fixture_name, fixture_out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace semvox::cli
