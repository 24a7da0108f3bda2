#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vsl/calibration.hpp"
#include "vsl/design.hpp"
#include "vsl/geometry.hpp"
#include "vsl/joints.hpp"
#include "vsl/mechanics.hpp"
#include "vsl/pattern.hpp"
#include "vsl/scheduler.hpp"
#include "vsl/thermal.hpp"

namespace vsl {

using json = nlohmann::json;

inline constexpr const char* kToolkitVersion = "0.1.0";

/// FNV-1a 64 over the compact dump, as 16 hex digits.
std::string config_hash(const json& config);
/// Adds "version" and "config_hash" to an output document.
json stamp(json doc, const std::string& hash);

// Parsing throws ValidationError on missing fields, unknown keys or wrong types.
// Config structs (mechanics, thermal, heater, budget) accept partial objects over defaults;
// DesignParams must carry every field.

json to_json(const Address& a);
Address address_from_json(const json& j);
/// "r,c"
std::string address_key(const Address& a);
Address address_from_key(const std::string& key);

json to_json(const DesignParams& p);
DesignParams design_params_from_json(const json& j);

json to_json(const MechanicsConfig& c);
MechanicsConfig mechanics_config_from_json(const json& j, MechanicsConfig base = {});

json to_json(const ThermalParams& t);
ThermalParams thermal_params_from_json(const json& j, ThermalParams base = {});
json to_json(const HeaterParams& h);
HeaterParams heater_params_from_json(const json& j, HeaterParams base = {});

json to_json(const VoxelGrid& g);
VoxelGrid grid_from_json(const json& j);

json to_json(const JointSpec& s);
JointSpec joint_spec_from_json(const json& j);
json to_json(const ActivationPattern& p);
ActivationPattern pattern_from_json(const json& j);

json to_json(const StiffnessReport& r);
/// mode,value,unit,normalized (value per unit sheet area)
std::string stiffness_csv(const StiffnessReport& r);
json to_json(const JointReport& r);

json to_json(const CalibrationBatch& b);
CalibrationBatch calibration_from_json(const json& j);

json to_json(const PowerBudget& b);
PowerBudget budget_from_json(const json& j);
json to_json(const HeatJob& j);
HeatJob heat_job_from_json(const json& j);

/// Total heater power as a step function: (time, power from that time on).
std::vector<std::pair<double, double>> power_timeline(const Schedule& s);
json to_json(const Schedule& s);
/// t,voxel,duty,cumulative_power: one row per heat start and end, ends first at ties.
std::string schedule_csv(const Schedule& s);

json to_json(const SweepResult& r);
/// value,axial,shear,bending,torsion,k_area_axial,k_area_shear,k_area_bending,k_area_torsion
std::string sweep_csv(const SweepResult& r);

std::string trace_csv(const TransientTrace& trace);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace vsl
