#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsl/calibration.hpp"
#include "vsl/geometry.hpp"
#include "vsl/pattern.hpp"
#include "vsl/thermal.hpp"

namespace vsl {

struct ActivationRequest {
  ActivationPattern pattern;
  Phase target = Phase::Melted;  // melted or solid
  std::optional<double> deadline;
};

struct BranchLimit {
  std::vector<Address> addresses;
  double limit = 0.0;  // W
};

struct PowerBudget {
  double peak = 0.0;  // W
  std::vector<BranchLimit> branches;

  void validate() const;
};

/// One non-preemptive heating job.
struct HeatJob {
  Address address;
  double power = 0.0;     // W drawn while heating
  double duration = 0.0;  // s
  double duty = 1.0;
  double cool = 0.0;      // s of unpowered cooldown after the heat interval
  std::optional<double> deadline;

  double energy() const { return power * duration; }
};

struct Interval {
  double start = 0.0;
  double end = 0.0;
  double duty = 0.0;
  double power = 0.0;
  bool heating = true;
};

struct VoxelSchedule {
  Address address;
  std::vector<Interval> intervals;
};

struct Schedule {
  std::vector<VoxelSchedule> voxels;  // sorted by address
  double makespan = 0.0;              // end of the last heat interval
  double cycle_time = 0.0;            // end of the last cooldown
  std::vector<std::string> deadline_misses;
};

/// Heater and thermal model of one voxel as seen through its calibration record. Power
/// comes from the measured R_h, conductance from the slope of the inverse map, and heat
/// capacity from tau_th. Nominal values are used without a record.
struct VoxelModel {
  ThermalParams thermal;
  HeaterParams heater;
  double S_0 = 18.0;
};

VoxelModel voxel_model(const CalibrationRecord* record, const ThermalParams& nominal,
                       const HeaterParams& heater, double S_0);

/// Jobs for every live voxel in the requests. Melt targets heat at their duty (default 1)
/// for the simulated melt time; solid targets only cool.
std::vector<HeatJob> build_jobs(const std::vector<ActivationRequest>& requests,
                                const ThermalParams& thermal, const HeaterParams& heater,
                                double S_0, const CalibrationBatch* records = nullptr,
                                const std::map<Address, double>* duties = nullptr);

/// Longest-job-first by melt energy, each job placed at the earliest start where the
/// total and branch power stay within budget. Throws InfeasibleError when one voxel alone
/// exceeds a limit.
Schedule plan_schedule(const std::vector<HeatJob>& jobs, const PowerBudget& budget);
Schedule plan_schedule(const std::vector<ActivationRequest>& requests, const PowerBudget& budget,
                       const ThermalParams& thermal, const HeaterParams& heater, double S_0,
                       const CalibrationBatch* records = nullptr);

/// Minimum makespan over every job order with earliest-fit placement. At most 6 jobs.
Schedule brute_force_schedule(const std::vector<HeatJob>& jobs, const PowerBudget& budget);

struct Violation {
  std::string kind;  // power, branch_power, overlap, duty
  double time = 0.0;
  std::string detail;
};

std::vector<Violation> validate_schedule(const Schedule& schedule, const PowerBudget& budget);

enum class EqualizeMode {
  Formula,    // duty_i proportional to Q_melt / P_i(1), max duty 1
  Simulated,  // per-voxel lumped model, duty bisected to the slowest voxel's melt time
};

/// Per-voxel duties that make a group finish melting together. Throws InfeasibleError when
/// a voxel cannot melt at duty 1 and ValidationError when a voxel has no record.
std::map<Address, double> equalize_melt_fronts(const std::vector<Address>& group,
                                               const CalibrationBatch& records,
                                               const ThermalParams& thermal,
                                               const HeaterParams& heater, double S_0,
                                               EqualizeMode mode = EqualizeMode::Simulated);

/// Simulated melt completion time at a duty; negative when the duty cannot melt the voxel.
double melt_time_at_duty(const VoxelModel& model, double duty);

}  // namespace vsl
