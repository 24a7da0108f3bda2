#include "vsl/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "vsl/errors.hpp"

namespace vsl {

void HeaterParams::validate() const {
  if (!(R_s > 0.0) || !(omega > 0.0) || !(V > 0.0) || !(f_pwm > 0.0)) {
    throw ValidationError("heater parameters must be positive");
  }
  if (!(R_ser >= 0.0)) throw ValidationError("series resistance R_ser must be non-negative");
  if (!(kappa >= 1.0)) throw ValidationError("heater meander factor kappa must be >= 1");
}

void ThermalParams::validate() const {
  if (!(C_th > 0.0) || !(G_th > 0.0) || !(Q_melt > 0.0) || !(eta > 0.0)) {
    throw ValidationError("thermal parameters must be positive");
  }
  if (eta > 1.0) throw ValidationError("heating efficiency eta must be <= 1");
  if (!std::isfinite(T_m) || !std::isfinite(T_amb)) {
    throw ValidationError("temperatures must be finite");
  }
  if (!(T_m > T_amb)) throw ValidationError("melt temperature must exceed ambient");
}

double heater_resistance(const HeaterParams& h, double S_0) {
  return h.kappa * h.R_s * (3.0 * S_0 / h.omega);
}

double joule_power(const HeaterParams& h, double S_0, double duty) {
  if (!(duty >= 0.0 && duty <= 1.0)) throw ValidationError("duty must lie in [0, 1]");
  const double R_h = heater_resistance(h, S_0);
  const double R_tot = R_h + h.R_ser;
  return duty * h.V * h.V * R_h / (R_tot * R_tot);
}

double steady_temperature(const ThermalParams& t, double heater_power) {
  return t.T_amb + t.eta * heater_power / t.G_th;
}

void DutySchedule::validate() const {
  if (start.size() != duty.size()) throw ValidationError("duty schedule arrays differ in length");
  for (std::size_t i = 0; i < start.size(); ++i) {
    if (!(duty[i] >= 0.0 && duty[i] <= 1.0)) throw ValidationError("duty must lie in [0, 1]");
    if (!std::isfinite(start[i])) throw ValidationError("duty schedule start must be finite");
    if (i > 0 && !(start[i] > start[i - 1])) {
      throw ValidationError("duty schedule starts must increase");
    }
  }
}

double DutySchedule::at(double time) const {
  const auto it = std::upper_bound(start.begin(), start.end(), time);
  if (it == start.begin()) return 0.0;
  return duty[static_cast<std::size_t>(it - start.begin()) - 1];
}

double TransientTrace::first_crossing(double level, bool rising) const {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double a = samples[i - 1].phase_fraction;
    const double b = samples[i].phase_fraction;
    const bool hit = rising ? (a < level && b >= level) : (a > level && b <= level);
    if (!hit) continue;
    const double s = (level - a) / (b - a);
    return samples[i - 1].t + s * (samples[i].t - samples[i - 1].t);
  }
  return -1.0;
}

double TransientTrace::max_phase_fraction() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.phase_fraction);
  return m;
}

void TransientTrace::write_csv(std::ostream& os) const {
  os << "t,T,phase_fraction,P_in\n";
  for (const auto& s : samples) {
    char line[128];
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.6f\n", s.t, s.T, s.phase_fraction, s.P_in);
    os << line;
  }
}

double max_stable_dt(const ThermalParams& t) {
  return std::min(t.time_constant(), 1.0) / 20.0;
}

LumpedVoxel::LumpedVoxel(const ThermalParams& t, const ThermalState& initial) : t_(t) {
  E_ = initial.phase_fraction > 0.0
           ? t.Q_melt * initial.phase_fraction + t.C_th * std::max(0.0, initial.T - t.T_m)
           : t.C_th * (initial.T - t.T_m);
}

ThermalState LumpedVoxel::state() const {
  if (E_ < 0.0) return {t_.T_m + E_ / t_.C_th, 0.0};
  if (E_ <= t_.Q_melt) return {t_.T_m, E_ / t_.Q_melt};
  return {t_.T_m + (E_ - t_.Q_melt) / t_.C_th, 1.0};
}

void LumpedVoxel::step(double heater_power, double dt) {
  const double T = state().T;
  E_ += (t_.eta * heater_power - t_.G_th * (T - t_.T_amb)) * dt;
  if (!std::isfinite(E_)) throw ValidationError("thermal integration produced a non-finite state");
}

TransientTrace simulate_transient(const ThermalParams& t, const HeaterParams& h, double S_0,
                                  const DutySchedule& schedule, double dt, double horizon,
                                  const ThermalState& initial) {
  t.validate();
  h.validate();
  schedule.validate();
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (dt > max_stable_dt(t) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "unstable time step " << dt << " s exceeds " << max_stable_dt(t) << " s";
    throw ValidationError(msg.str());
  }
  if (!(horizon >= 0.0)) throw ValidationError("horizon must be non-negative");
  if (!(initial.phase_fraction >= 0.0 && initial.phase_fraction <= 1.0)) {
    throw ValidationError("initial phase fraction must lie in [0, 1]");
  }
  const bool mushy = initial.phase_fraction > 0.0 && initial.phase_fraction < 1.0;
  if (mushy && std::abs(initial.T - t.T_m) > 1e-9) {
    throw ValidationError("a partially melted voxel must start at the melt temperature");
  }

  LumpedVoxel voxel(t, initial);
  TransientTrace trace;
  trace.dt = dt;
  const auto steps = static_cast<long long>(std::ceil(horizon / dt - 1e-9));
  trace.samples.reserve(static_cast<std::size_t>(steps) + 1);
  for (long long k = 0;; ++k) {
    const double time = static_cast<double>(k) * dt;
    const ThermalState s = voxel.state();
    const double P = k < steps ? joule_power(h, S_0, schedule.at(time)) : 0.0;
    trace.samples.push_back({time, s.T, s.phase_fraction, P});
    if (k == steps) break;
    voxel.step(P, dt);
  }
  return trace;
}

TransientTrace simulate_transient(const ThermalParams& t, const HeaterParams& h, double S_0,
                                  const DutySchedule& schedule, double dt, double horizon) {
  return simulate_transient(t, h, S_0, schedule, dt, horizon, ThermalState{t.T_amb, 0.0});
}

double EnergyAudit::relative_error() const {
  const double scale = input > 0.0 ? input : std::max(std::abs(stored), 1e-300);
  return std::abs(residual()) / scale;
}

EnergyAudit energy_audit(const TransientTrace& trace, const ThermalParams& t) {
  EnergyAudit a;
  const auto& s = trace.samples;
  if (s.size() < 2) return a;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double step = s[i + 1].t - s[i].t;
    a.input += t.eta * s[i].P_in * step;
    a.loss += t.G_th * (s[i].T - t.T_amb) * step;
  }
  a.stored = t.C_th * (s.back().T - s.front().T) +
             t.Q_melt * (s.back().phase_fraction - s.front().phase_fraction);
  return a;
}

double minimum_voltage(const ThermalParams& t, const HeaterParams& h, double S_0) {
  const double R_h = heater_resistance(h, S_0);
  return (R_h + h.R_ser) * std::sqrt(t.G_th * (t.T_m - t.T_amb) / (t.eta * R_h));
}

MeltTime melt_time(const ThermalParams& t, const HeaterParams& h, double S_0) {
  t.validate();
  h.validate();
  if (!(S_0 > 0.0)) throw ValidationError("voxel edge S_0 must be positive");
  const double R_h = heater_resistance(h, S_0);
  const double P = joule_power(h, S_0, 1.0);
  const double surplus = t.eta * P - t.G_th * (t.T_m - t.T_amb);
  if (!(surplus > 0.0)) {
    std::ostringstream msg;
    msg << "insufficient power: duty 1 settles at " << steady_temperature(t, P)
        << " degC below T_m " << t.T_m << " degC; minimum drive voltage "
        << minimum_voltage(t, h, S_0) << " V";
    throw InfeasibleError(msg.str());
  }
  MeltTime out;
  out.closed_form = t.Q_melt * (R_h + h.R_ser) / (t.eta * h.V * h.V);
  // Losses never exceed their value at T_m before melting completes, which bounds the time.
  const double bound = (t.C_th * std::max(0.0, t.T_m - t.T_amb) + t.Q_melt) / surplus;
  const double dt = max_stable_dt(t) / 5.0;
  const TransientTrace trace =
      simulate_transient(t, h, S_0, DutySchedule::constant(1.0), dt, 1.05 * bound + 2.0 * dt);
  out.simulated = trace.first_crossing(1.0, true);
  return out;
}

CoolTime cool_time(const ThermalParams& t) {
  t.validate();
  CoolTime out;
  out.time_constant = t.time_constant();
  // With no input the plateau releases Q_melt at a constant loss rate.
  const double plateau = t.Q_melt / (t.G_th * (t.T_m - t.T_amb));
  const double dt = max_stable_dt(t) / 5.0;
  const HeaterParams idle;
  const TransientTrace trace = simulate_transient(t, idle, 1.0, DutySchedule::constant(0.0), dt,
                                                  1.05 * plateau + 2.0 * dt,
                                                  ThermalState{t.T_m, 1.0});
  out.simulated = trace.first_crossing(0.0, false);
  return out;
}

}  // namespace vsl
