#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vsl {

struct HeaterParams {
  double R_s = 25.0 / 30.0;  // ohm per square
  double kappa = 1.2;        // meander factor
  double omega = 2.0;        // trace width, mm
  double R_ser = 3.0;        // harness and switch resistance, ohm
  double V = 12.0;           // drive voltage
  double f_pwm = 1000.0;     // Hz

  void validate() const;
};

/// Lumped voxel: one heat capacity, one conductance to ambient, one latent reservoir.
/// Defaults give a ~30 s melt from ambient and ~45 s solidification with the default heater
/// on an 18 mm voxel.
struct ThermalParams {
  double C_th = 1.125;   // J/K
  double G_th = 0.025;   // W/K
  double Q_melt = 40.0;  // J
  double T_m = 62.0;     // degC
  double eta = 0.8;
  double T_amb = 25.0;   // degC

  void validate() const;
  double time_constant() const { return C_th / G_th; }
};

double heater_resistance(const HeaterParams& h, double S_0);
/// Average heater dissipation under PWM.
double joule_power(const HeaterParams& h, double S_0, double duty);
/// Temperature the voxel would settle at with no phase change.
double steady_temperature(const ThermalParams& t, double heater_power);

/// Piecewise-constant duty. Segment i holds duty[i] from start[i] until the next start.
/// Before the first start the duty is zero.
struct DutySchedule {
  std::vector<double> start;
  std::vector<double> duty;

  static DutySchedule constant(double d) { return {{0.0}, {d}}; }
  void validate() const;
  double at(double time) const;
};

struct ThermalState {
  double T = 25.0;
  double phase_fraction = 0.0;
};

/// Enthalpy state of one lumped voxel; advance with explicit Euler steps.
class LumpedVoxel {
 public:
  LumpedVoxel(const ThermalParams& t, const ThermalState& initial);

  ThermalState state() const;
  /// Advances by dt with the given heater dissipation (W).
  void step(double heater_power, double dt);

 private:
  ThermalParams t_;
  double E_ = 0.0;  // relative to solid at T_m
};

struct TraceSample {
  double t = 0.0;
  double T = 0.0;
  double phase_fraction = 0.0;
  double P_in = 0.0;  // heater dissipation, W
};

struct TransientTrace {
  std::vector<TraceSample> samples;
  double dt = 0.0;

  /// Interpolated time at which the phase fraction first reaches `level` moving upward
  /// (rising) or downward. Negative when it never does.
  double first_crossing(double level, bool rising) const;
  double max_phase_fraction() const;
  void write_csv(std::ostream& os) const;
};

/// Explicit enthalpy integration of the lumped voxel. dt must not exceed
/// min(C_th/G_th, 1)/20.
TransientTrace simulate_transient(const ThermalParams& t, const HeaterParams& h, double S_0,
                                  const DutySchedule& schedule, double dt, double horizon,
                                  const ThermalState& initial);
TransientTrace simulate_transient(const ThermalParams& t, const HeaterParams& h, double S_0,
                                  const DutySchedule& schedule, double dt, double horizon);

/// Largest stable step for the given parameters.
double max_stable_dt(const ThermalParams& t);

struct EnergyAudit {
  double input = 0.0;     // integral of eta * P_in
  double loss = 0.0;      // integral of G_th (T - T_amb)
  double stored = 0.0;    // C_th dT + Q_melt d(phase_fraction)
  double residual() const { return input - loss - stored; }
  /// |residual| relative to the input energy (or to the stored magnitude if no input).
  double relative_error() const;
};

EnergyAudit energy_audit(const TransientTrace& trace, const ThermalParams& t);

struct MeltTime {
  double closed_form = 0.0;  // Q_melt (R_h + R_ser) / (eta V^2)
  double simulated = 0.0;    // duty 1 from ambient until fully liquid
};

/// Throws InfeasibleError when duty 1 cannot hold the voxel above T_m; the message names
/// the minimum drive voltage.
MeltTime melt_time(const ThermalParams& t, const HeaterParams& h, double S_0);

struct CoolTime {
  double time_constant = 0.0;  // C_th / G_th
  double simulated = 0.0;      // duty 0 from fully liquid at T_m until fully solid
};

CoolTime cool_time(const ThermalParams& t);

/// Minimum drive voltage that holds the voxel at T_m at duty 1.
double minimum_voltage(const ThermalParams& t, const HeaterParams& h, double S_0);

}  // namespace vsl
