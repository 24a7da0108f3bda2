#include "vsl/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "vsl/errors.hpp"

namespace vsl {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Salts keep the noise streams of different procedures on one plant independent.
constexpr std::uint64_t kResistanceSalt = 1;
constexpr std::uint64_t kSweepSalt = 2;
constexpr std::uint64_t kStepSalt = 3;

class PlantSession {
 public:
  PlantSession(const PlantModel& plant, std::uint64_t salt, double dt)
      : plant_(plant),
        voxel_(plant.thermal, ThermalState{plant.thermal.T_amb, 0.0}),
        rng_(splitmix(plant.seed ^ splitmix(salt))),
        dt_(dt) {
    substeps_ = std::max(1, static_cast<int>(std::ceil(dt / max_stable_dt(plant.thermal))));
  }

  /// Advances one sample period and returns the noisy temperature reading.
  double advance(double duty) {
    const double P = plant_.open_circuit ? 0.0 : joule_power(plant_.heater, plant_.S_0, duty);
    for (int i = 0; i < substeps_; ++i) voxel_.step(P, dt_ / substeps_);
    return read();
  }

  double read() {
    const double T = voxel_.state().T;
    return plant_.sensor_noise > 0.0 ? T + plant_.sensor_noise * normal_(rng_) : T;
  }

  double current() {
    if (plant_.open_circuit) return 0.0;
    const double I = plant_.heater.V / (plant_.true_heater_resistance() + plant_.heater.R_ser);
    return plant_.current_noise > 0.0 ? I + plant_.current_noise * normal_(rng_) : I;
  }

 private:
  const PlantModel& plant_;
  LumpedVoxel voxel_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double dt_;
  int substeps_ = 1;
};

double regression_slope(const std::vector<double>& y, std::size_t first, double dt) {
  const std::size_t n = y.size() - first;
  if (n < 2) return std::numeric_limits<double>::infinity();
  const double tbar = 0.5 * static_cast<double>(n - 1) * dt;
  double ybar = 0.0;
  for (std::size_t i = first; i < y.size(); ++i) ybar += y[i];
  ybar /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = first; i < y.size(); ++i) {
    const double t = static_cast<double>(i - first) * dt - tbar;
    sxy += t * (y[i] - ybar);
    sxx += t * t;
  }
  return sxy / sxx;
}

struct Dwell {
  double mean = 0.0;
  double window_mean = 0.0;
  bool settled = false;
  bool guard_tripped = false;
  double duration = 0.0;
  std::vector<double> readings;
};

// Holds one duty until the slope settles, t_max passes, or the guard temperature is reached.
Dwell hold(PlantSession& session, double duty, double epsilon, double t_max, double guard,
           const CalibrationSettings& s) {
  const double dt = 1.0 / s.f_s;
  const auto per_second = static_cast<std::size_t>(std::llround(s.f_s));
  const auto window = static_cast<std::size_t>(std::llround(s.slope_window * s.f_s));
  const auto max_samples = static_cast<std::size_t>(std::llround(t_max * s.f_s));
  Dwell d;
  while (d.readings.size() < max_samples) {
    d.readings.push_back(session.advance(duty));
    const std::size_t n = d.readings.size();
    if (n % per_second != 0) continue;
    const std::size_t first = n > window ? n - window : 0;
    double wm = 0.0;
    for (std::size_t i = first; i < n; ++i) wm += d.readings[i];
    d.window_mean = wm / static_cast<double>(n - first);
    if (d.window_mean > guard) {
      d.guard_tripped = true;
      break;
    }
    if (static_cast<double>(n) * dt >= s.min_dwell && n >= window &&
        std::abs(regression_slope(d.readings, first, dt)) < epsilon) {
      d.settled = true;
      break;
    }
  }
  d.duration = static_cast<double>(d.readings.size()) * dt;
  const std::size_t n = d.readings.size();
  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(s.tail_fraction * static_cast<double>(n))));
  double sum = 0.0;
  for (std::size_t i = n - std::min(tail, n); i < n; ++i) sum += d.readings[i];
  d.mean = n > 0 ? sum / static_cast<double>(std::min(tail, n)) : 0.0;
  return d;
}

}  // namespace

double PlantModel::steady_temperature_at(double duty) const {
  if (open_circuit) return thermal.T_amb;
  return steady_temperature(thermal, joule_power(heater, S_0, duty));
}

std::vector<PlantModel> make_plant_population(int count, const ThermalParams& thermal,
                                              const HeaterParams& heater, double S_0,
                                              double spread, double sensor_noise,
                                              std::uint64_t seed, int cols) {
  if (count < 0) throw ValidationError("plant count must be non-negative");
  if (!(spread >= 0.0 && spread < 1.0)) throw ValidationError("spread must lie in [0, 1)");
  if (cols <= 0) throw ValidationError("population columns must be positive");
  std::vector<PlantModel> plants;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(splitmix(seed + static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> u(1.0 - spread, 1.0 + spread);
    PlantModel p;
    p.address = {i / cols, i % cols};
    p.thermal = thermal;
    p.heater = heater;
    p.S_0 = S_0;
    p.heater.R_s *= u(rng);
    p.thermal.C_th *= u(rng);
    p.thermal.G_th *= u(rng);
    p.sensor_noise = sensor_noise;
    p.seed = splitmix(seed ^ (0x5bd1e995ULL * static_cast<std::uint64_t>(i + 1)));
    plants.push_back(p);
  }
  return plants;
}

std::vector<double> CalibrationSettings::grid() const {
  if (!duty_grid.empty()) return duty_grid;
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(0.02 * i);
  return g;
}

ResistanceEstimate resistance_from_samples(double V, const std::vector<double>& currents,
                                           double R_ser_estimate, double current_floor) {
  ResistanceEstimate r;
  if (currents.empty()) throw ValidationError("no current samples");
  std::vector<double> R;
  for (double I : currents) {
    if (!(I > current_floor)) {
      r.fault = true;
      r.reason = "open circuit: current below floor";
      return r;
    }
    R.push_back(V / I);
  }
  std::sort(R.begin(), R.end());
  const std::size_t n = R.size();
  r.R_tot = n % 2 ? R[n / 2] : 0.5 * (R[n / 2 - 1] + R[n / 2]);
  r.R_h = r.R_tot - R_ser_estimate;
  if (!(r.R_h > 0.0)) {
    r.fault = true;
    r.reason = "measured resistance does not exceed the series estimate";
  }
  return r;
}

ResistanceEstimate measure_resistance(const PlantModel& plant, const CalibrationSettings& s) {
  if (s.resistance_samples < 5) throw ValidationError("resistance needs at least 5 samples");
  PlantSession session(plant, kResistanceSalt, 1.0 / s.f_s);
  std::vector<double> I;
  for (int k = 0; k < s.resistance_samples; ++k) {
    session.advance(s.probe_duty);
    I.push_back(session.current());
  }
  return resistance_from_samples(plant.heater.V, I, s.R_ser_estimate, s.current_floor);
}

std::vector<SweepSample> duty_sweep(const PlantModel& plant, const std::vector<double>& duties,
                                    double epsilon, double t_max, const CalibrationSettings& s) {
  if (!(epsilon > 0.0) || !(t_max > 0.0) || !(s.f_s > 0.0)) {
    throw ValidationError("sweep epsilon, t_max and f_s must be positive");
  }
  for (std::size_t i = 0; i < duties.size(); ++i) {
    if (!(duties[i] >= 0.0 && duties[i] <= 1.0)) throw ValidationError("duty must lie in [0, 1]");
    if (i > 0 && !(duties[i] > duties[i - 1])) throw ValidationError("duty grid must be sorted");
  }
  PlantSession session(plant, kSweepSalt, 1.0 / s.f_s);
  const double guard = plant.thermal.T_m - s.guard_margin;
  std::vector<SweepSample> out;
  for (double d : duties) {
    const Dwell dw = hold(session, d, epsilon, t_max, guard, s);
    if (dw.guard_tripped) break;
    out.push_back({d, dw.mean, dw.settled, dw.duration});
  }
  return out;
}

InverseDutyMap::InverseDutyMap(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  // Pool-adjacent-violators on T, then collapse tied blocks to one point at the mean duty.
  struct Block {
    double sum_d, sum_T;
    int n;
  };
  std::vector<Block> blocks;
  for (const auto& [d, T] : pts) {
    blocks.push_back({d, T, 1});
    while (blocks.size() > 1) {
      const Block& b = blocks.back();
      const Block& a = blocks[blocks.size() - 2];
      if (a.sum_T / a.n < b.sum_T / b.n) break;
      const Block merged{a.sum_d + b.sum_d, a.sum_T + b.sum_T, a.n + b.n};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  for (const auto& b : blocks) points_.emplace_back(b.sum_d / b.n, b.sum_T / b.n);
  if (points_.size() < 2) throw ValidationError("inverse map needs an increasing response");
}

double InverseDutyMap::temperature_for(double duty) const {
  if (points_.empty()) throw ValidationError("empty inverse map");
  if (duty <= points_.front().first) return points_.front().second;
  if (duty >= points_.back().first) return points_.back().second;
  const auto it = std::lower_bound(points_.begin(), points_.end(), std::make_pair(duty, -1e300));
  const auto& [d1, T1] = *it;
  const auto& [d0, T0] = *(it - 1);
  return T0 + (T1 - T0) * (duty - d0) / (d1 - d0);
}

double InverseDutyMap::duty_for(double T) const {
  if (points_.empty()) throw ValidationError("empty inverse map");
  if (T < min_temperature() - 1e-12 || T > max_temperature() + 1e-12) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "target %.3f degC outside calibrated range [%.3f, %.3f]", T,
                  min_temperature(), max_temperature());
    throw ValidationError(buf);
  }
  double lo = min_duty(), hi = max_duty();
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    (temperature_for(mid) < T ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

InverseDutyMap fit_inverse_map(const std::vector<SweepSample>& samples) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : samples) {
    if (s.settled) pts.emplace_back(s.duty, s.T_mean);
  }
  if (pts.size() < 3) throw ValidationError("inverse map needs at least 3 settled samples");
  return InverseDutyMap(std::move(pts));
}

double step_identify(const PlantModel& plant, double d0, double d1, double f_s,
                     const CalibrationSettings& s) {
  if (!(std::abs(d1 - d0) > 1e-12)) throw ValidationError("degenerate step: d0 equals d1");
  if (!(d1 > d0)) throw ValidationError("step identification needs d1 > d0");
  CalibrationSettings cfg = s;
  cfg.f_s = f_s;
  PlantSession session(plant, kStepSalt, 1.0 / f_s);
  const double guard = plant.thermal.T_m - s.guard_margin;
  const Dwell before = hold(session, d0, s.epsilon, s.t_max, guard, cfg);
  if (before.guard_tripped) throw InfeasibleError("step start exceeds the calibrated range");
  const Dwell after = hold(session, d1, s.epsilon, s.t_max, guard, cfg);
  if (after.guard_tripped) throw InfeasibleError("step target exceeds the calibrated range");

  const std::vector<double>& y = after.readings;
  const double dt = 1.0 / f_s;
  const auto n = y.size();
  auto fit = [&](double tau, double* a_out, double* b_out) {
    // y = a + b * e with e = exp(-t / tau), t measured from the step.
    double se = 0, see = 0, sy = 0, sey = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double e = std::exp(-static_cast<double>(k + 1) * dt / tau);
      se += e;
      see += e * e;
      sy += y[k];
      sey += e * y[k];
    }
    const double nn = static_cast<double>(n);
    const double det = nn * see - se * se;
    const double b = det > 0 ? (nn * sey - se * sy) / det : 0.0;
    const double a = (sy - b * se) / nn;
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = y[k] - a - b * std::exp(-static_cast<double>(k + 1) * dt / tau);
      sse += r * r;
    }
    if (a_out) *a_out = a;
    if (b_out) *b_out = b;
    return sse;
  };
  // Coarse log scan, then golden-section refinement around the best point.
  const double lmin = std::log(0.1), lmax = std::log(1e4);
  constexpr int scan = 120;
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan; ++i) {
    const double sse = fit(std::exp(lmin + (lmax - lmin) * i / scan), nullptr, nullptr);
    if (sse < best_sse) best_sse = sse, best = i;
  }
  double lo = lmin + (lmax - lmin) * std::max(0, best - 1) / scan;
  double hi = lmin + (lmax - lmin) * std::min(scan, best + 1) / scan;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = fit(std::exp(x1), nullptr, nullptr), f2 = fit(std::exp(x2), nullptr, nullptr);
  for (int i = 0; i < 100 && hi - lo > 1e-10; ++i) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = fit(std::exp(x1), nullptr, nullptr);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = fit(std::exp(x2), nullptr, nullptr);
    }
  }
  const double tau = std::exp(0.5 * (lo + hi));
  double a = 0, b = 0;
  const double sse = fit(tau, &a, &b);
  const double rms = std::sqrt(sse / static_cast<double>(n));
  if (!(b < 0.0) || rms > 3.0 * std::max(plant.sensor_noise, 0.01) + 0.05) {
    throw InfeasibleError("step response fit quality too low for a first-order model");
  }
  return tau;
}

CalibrationRecord calibrate_voxel(const PlantModel& plant, const CalibrationSettings& s) {
  const ResistanceEstimate r = measure_resistance(plant, s);
  if (r.fault) throw InfeasibleError(r.reason);
  const auto samples = duty_sweep(plant, s.grid(), s.epsilon, s.t_max, s);
  CalibrationRecord rec;
  rec.address = plant.address;
  rec.R_tot = r.R_tot;
  rec.R_h = r.R_h;
  rec.map = fit_inverse_map(samples);
  const auto& pts = rec.map.points();
  const double d0 = pts[pts.size() / 4].first;
  const double d1 = pts[(3 * pts.size()) / 4].first;
  rec.tau_th = step_identify(plant, d0, d1, s.f_s, s);
  return rec;
}

const CalibrationRecord* CalibrationBatch::find(const Address& a) const {
  for (const auto& r : records) {
    if (r.address == a) return &r;
  }
  return nullptr;
}

CalibrationBatch calibrate_all(const std::vector<PlantModel>& plants,
                               const CalibrationSettings& s) {
  CalibrationBatch batch;
  for (const auto& p : plants) {
    try {
      batch.records.push_back(calibrate_voxel(p, s));
    } catch (const Error& e) {
      batch.faults.push_back({p.address, e.what()});
    }
  }
  return batch;
}

}  // namespace vsl
