#pragma once

#include <filesystem>
#include <string>

#include "semvox/geometry.hpp"
#include "semvox/ontology.hpp"
#include "semvox/sim/scenario.hpp"

/// JSON documents for scenes, trajectories, rigs, calibrations, ontologies
/// and remap tables. Parsers reject unknown fields and report the JSON path
/// of the offending field in the ConfigurationError message.
namespace semvox::io {

std::string scene_to_json(const sim::Scene& scene);
sim::Scene scene_from_json(const std::string& text);

std::string trajectory_to_json(const sim::Trajectory& trajectory);
sim::Trajectory trajectory_from_json(const std::string& text);

std::string rig_to_json(const sim::SensorRig& rig);
sim::SensorRig rig_from_json(const std::string& text);

/// Full scenario configuration (scene, trajectory and rig inlined).
std::string scenario_to_json(const sim::ScenarioConfig& config);
sim::ScenarioConfig scenario_from_json(const std::string& text);

/// Camera calibration: fx, fy, cx, cy, width, height and a row-major 4x4
/// `sensor_to_vehicle` transform.
struct Calibration {
  geometry::CameraIntrinsics intrinsics;
  geometry::Pose sensor_to_vehicle = geometry::Pose::identity("vehicle");
};
std::string calibration_to_json(const Calibration& calibration);
Calibration calibration_from_json(const std::string& text);

/// `{"classes": [...]}`.
std::string ontology_to_json(const semantics::Ontology& ontology);
semantics::Ontology ontology_from_json(const std::string& text);
/// A built-in ontology name or a path to an ontology document.
semantics::Ontology load_ontology(const std::string& name_or_path);

/// `{"source": <ontology>, "target": <ontology>, "groups": [{"target": t,
/// "sources": [...]}, ...]}`, where an ontology is a built-in name or an
/// inline class list.
std::string remap_table_to_json(const semantics::RemapTable& table);
semantics::RemapTable remap_table_from_json(const std::string& text);
/// A built-in table name ("canonical_to_evaluation", "yamaha_to_evaluation",
/// "rellis_to_evaluation") or a path to a table document.
semantics::RemapTable load_remap_table(const std::string& name_or_path);

/// Whole-file helpers; errors name the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace semvox::io
