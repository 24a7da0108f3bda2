#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vsl/geometry.hpp"
#include "vsl/thermal.hpp"

namespace vsl {

/// Simulated voxel with its true (perturbed) parameters and sensor noise.
struct PlantModel {
  Address address;
  ThermalParams thermal;
  HeaterParams heater;
  double S_0 = 18.0;
  double sensor_noise = 0.0;   // degC, std
  double current_noise = 0.0;  // A, std
  bool open_circuit = false;
  std::uint64_t seed = 0;

  double true_heater_resistance() const { return heater_resistance(heater, S_0); }
  /// Noise-free steady temperature at a duty (ignores the melt plateau).
  double steady_temperature_at(double duty) const;
};

/// Plants around a nominal design with uniform +-spread on R_h (via R_s), C_th and G_th.
/// Deterministic in the seed.
std::vector<PlantModel> make_plant_population(int count, const ThermalParams& thermal,
                                              const HeaterParams& heater, double S_0,
                                              double spread, double sensor_noise,
                                              std::uint64_t seed, int cols = 20);

struct CalibrationSettings {
  std::vector<double> duty_grid;  // empty: 0, 0.02, ..., 0.40
  double epsilon = 0.01;          // degC/s settle threshold
  double t_max = 300.0;           // s, per dwell
  double f_s = 200.0;             // Hz
  double tail_fraction = 0.1;     // of the dwell, for the steady mean
  double slope_window = 10.0;     // s, regression window for dT/dt
  double min_dwell = 10.0;        // s
  double guard_margin = 2.0;      // stop the sweep this far below T_m
  double R_ser_estimate = 3.0;    // ohm, subtracted from R_tot
  double probe_duty = 0.05;
  int resistance_samples = 7;
  double current_floor = 1e-3;    // A; below this the heater is open

  std::vector<double> grid() const;
};

struct ResistanceEstimate {
  double R_tot = 0.0;
  double R_h = 0.0;
  bool fault = false;
  std::string reason;
};

/// Median V/I over the samples, R_h = R_tot - R_ser. A current below the floor is an
/// open-circuit fault.
ResistanceEstimate resistance_from_samples(double V, const std::vector<double>& currents,
                                           double R_ser_estimate, double current_floor = 1e-3);
ResistanceEstimate measure_resistance(const PlantModel& plant, const CalibrationSettings& s = {});

struct SweepSample {
  double duty = 0.0;
  double T_mean = 0.0;
  bool settled = false;
  double dwell = 0.0;
};

/// Steps through the duty grid from ambient, holding each level until the regression slope
/// over the last slope_window seconds drops below epsilon or t_max elapses. The sweep ends
/// early when the voxel approaches T_m.
std::vector<SweepSample> duty_sweep(const PlantModel& plant, const std::vector<double>& duties,
                                    double epsilon, double t_max,
                                    const CalibrationSettings& s = {});

/// Increasing map T(d) from isotonic regression and piecewise-linear interpolation, with
/// its inverse d*(T) by bisection.
class InverseDutyMap {
 public:
  InverseDutyMap() = default;
  explicit InverseDutyMap(std::vector<std::pair<double, double>> duty_temperature);

  const std::vector<std::pair<double, double>>& points() const { return points_; }
  double temperature_for(double duty) const;
  /// Throws ValidationError outside the fitted temperature range.
  double duty_for(double T) const;
  double min_duty() const { return points_.front().first; }
  double max_duty() const { return points_.back().first; }
  double min_temperature() const { return points_.front().second; }
  double max_temperature() const { return points_.back().second; }

 private:
  std::vector<std::pair<double, double>> points_;  // (duty, T), strictly increasing in both
};

/// Uses settled samples only; needs at least 3.
InverseDutyMap fit_inverse_map(const std::vector<SweepSample>& samples);

/// Settles at d0, steps to d1 and fits T_inf + (T_0 - T_inf) exp(-t / tau) by least squares.
double step_identify(const PlantModel& plant, double d0, double d1, double f_s,
                     const CalibrationSettings& s = {});

struct CalibrationRecord {
  Address address;
  double R_h = 0.0;
  double R_tot = 0.0;
  double tau_th = 0.0;
  InverseDutyMap map;
};

struct CalibrationFault {
  Address address;
  std::string reason;
};

struct CalibrationBatch {
  std::vector<CalibrationRecord> records;
  std::vector<CalibrationFault> faults;

  const CalibrationRecord* find(const Address& a) const;
};

CalibrationRecord calibrate_voxel(const PlantModel& plant, const CalibrationSettings& s = {});
/// One record per plant; failures are collected instead of aborting the batch.
CalibrationBatch calibrate_all(const std::vector<PlantModel>& plants,
                               const CalibrationSettings& s = {});

}  // namespace vsl
