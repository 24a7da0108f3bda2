#include "vsl/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "vsl/errors.hpp"

namespace vsl {

namespace {

constexpr double kPowerTol = 1e-9;
constexpr std::size_t kMaxBreakpoints = 4096;

struct Placed {
  std::size_t job;
  double start;
  double end;
};

bool in_branch(const BranchLimit& b, const Address& a) {
  return std::find(b.addresses.begin(), b.addresses.end(), a) != b.addresses.end();
}

// Highest summed power over [s, e) among the placed jobs selected by `counts`.
template <typename Pred>
double peak_load(const std::vector<Placed>& placed, const std::vector<HeatJob>& jobs, double s,
                 double e, Pred counts) {
  std::vector<double> probes{s};
  for (const auto& p : placed) {
    if (p.start > s && p.start < e) probes.push_back(p.start);
  }
  double worst = 0.0;
  for (double t : probes) {
    double load = 0.0;
    for (const auto& p : placed) {
      if (p.start <= t && t < p.end && counts(jobs[p.job])) load += jobs[p.job].power;
    }
    worst = std::max(worst, load);
  }
  return worst;
}

void check_single(const HeatJob& j, const PowerBudget& budget) {
  char buf[160];
  if (j.power > budget.peak + kPowerTol) {
    std::snprintf(buf, sizeof buf, "voxel %s draws %.4g W, above the %.4g W budget",
                  to_string(j.address).c_str(), j.power, budget.peak);
    throw InfeasibleError(buf);
  }
  for (const auto& b : budget.branches) {
    if (in_branch(b, j.address) && j.power > b.limit + kPowerTol) {
      std::snprintf(buf, sizeof buf, "voxel %s draws %.4g W, above its branch limit %.4g W",
                    to_string(j.address).c_str(), j.power, b.limit);
      throw InfeasibleError(buf);
    }
  }
}

std::vector<Placed> earliest_fit(const std::vector<HeatJob>& jobs,
                                 const std::vector<std::size_t>& order,
                                 const PowerBudget& budget) {
  std::vector<Placed> placed;
  for (std::size_t idx : order) {
    const HeatJob& j = jobs[idx];
    if (j.duration <= 0.0 || j.power <= 0.0) {
      placed.push_back({idx, 0.0, std::max(0.0, j.duration)});
      continue;
    }
    std::set<double> candidates{0.0};
    for (const auto& p : placed) candidates.insert(p.end);
    for (double s : candidates) {
      const double e = s + j.duration;
      bool ok = peak_load(placed, jobs, s, e, [](const HeatJob&) { return true; }) + j.power <=
                budget.peak + kPowerTol;
      for (const auto& b : budget.branches) {
        if (!ok || !in_branch(b, j.address)) continue;
        ok = peak_load(placed, jobs, s, e,
                       [&](const HeatJob& o) { return in_branch(b, o.address); }) +
                 j.power <=
             b.limit + kPowerTol;
      }
      if (ok) {
        placed.push_back({idx, s, e});
        break;
      }
    }
  }
  return placed;
}

double makespan_of(const std::vector<Placed>& placed) {
  double m = 0.0;
  for (const auto& p : placed) m = std::max(m, p.end);
  return m;
}

Schedule assemble(const std::vector<HeatJob>& jobs, const std::vector<Placed>& placed) {
  Schedule s;
  for (const auto& p : placed) {
    const HeatJob& j = jobs[p.job];
    VoxelSchedule v{j.address, {}};
    double t = p.start;
    if (j.duration > 0.0) {
      v.intervals.push_back({p.start, p.end, j.duty, j.power, true});
      t = p.end;
    }
    if (j.cool > 0.0) v.intervals.push_back({t, t + j.cool, 0.0, 0.0, false});
    if (j.duration > 0.0) s.makespan = std::max(s.makespan, p.end);
    s.cycle_time = std::max(s.cycle_time, t + j.cool);
    if (j.deadline && t > *j.deadline + 1e-9) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "voxel %s finishes heating at %.3f s after its %.3f s deadline",
                    to_string(j.address).c_str(), t, *j.deadline);
      s.deadline_misses.push_back(buf);
    }
    s.voxels.push_back(std::move(v));
  }
  std::sort(s.voxels.begin(), s.voxels.end(),
            [](const VoxelSchedule& a, const VoxelSchedule& b) { return a.address < b.address; });
  return s;
}

void check_jobs(const std::vector<HeatJob>& jobs, const PowerBudget& budget) {
  budget.validate();
  std::set<Address> seen;
  for (const auto& j : jobs) {
    if (!seen.insert(j.address).second) {
      throw ValidationError("voxel " + to_string(j.address) + " is requested twice");
    }
    if (!(j.duty >= 0.0 && j.duty <= 1.0)) throw ValidationError("job duty must lie in [0, 1]");
    if (!(j.power >= 0.0) || !(j.duration >= 0.0) || !(j.cool >= 0.0)) {
      throw ValidationError("job power and durations must be non-negative");
    }
    check_single(j, budget);
  }
}

}  // namespace

void PowerBudget::validate() const {
  if (!(peak > 0.0)) throw ValidationError("power budget must be positive");
  for (const auto& b : branches) {
    if (!(b.limit > 0.0)) throw ValidationError("branch limit must be positive");
  }
}

VoxelModel voxel_model(const CalibrationRecord* record, const ThermalParams& nominal,
                       const HeaterParams& heater, double S_0) {
  VoxelModel m{nominal, heater, S_0};
  if (!record) return m;
  m.heater.R_s = record->R_h / (heater.kappa * 3.0 * S_0 / heater.omega);
  const auto& map = record->map;
  const double slope =
      (map.max_temperature() - map.min_temperature()) / (map.max_duty() - map.min_duty());
  if (slope > 0.0) {
    m.thermal.G_th = nominal.eta * joule_power(m.heater, S_0, 1.0) / slope;
    if (record->tau_th > 0.0) m.thermal.C_th = record->tau_th * m.thermal.G_th;
  }
  return m;
}

double melt_time_at_duty(const VoxelModel& model, double duty) {
  const ThermalParams& t = model.thermal;
  const double P = joule_power(model.heater, model.S_0, duty);
  const double surplus = t.eta * P - t.G_th * (t.T_m - t.T_amb);
  if (!(surplus > 0.0)) return -1.0;
  const double bound = (t.C_th * (t.T_m - t.T_amb) + t.Q_melt) / surplus;
  const double dt = max_stable_dt(t) / 5.0;
  const TransientTrace trace = simulate_transient(t, model.heater, model.S_0,
                                                  DutySchedule::constant(duty), dt,
                                                  1.05 * bound + 2.0 * dt);
  return trace.first_crossing(1.0, true);
}

std::vector<HeatJob> build_jobs(const std::vector<ActivationRequest>& requests,
                                const ThermalParams& thermal, const HeaterParams& heater,
                                double S_0, const CalibrationBatch* records,
                                const std::map<Address, double>* duties) {
  std::vector<HeatJob> jobs;
  for (const auto& req : requests) {
    if (req.target != Phase::Melted && req.target != Phase::Solid) {
      throw ValidationError("activation target must be melted or solid");
    }
    for (const Address& a : req.pattern.addresses) {
      const CalibrationRecord* rec = records ? records->find(a) : nullptr;
      const VoxelModel model = voxel_model(rec, thermal, heater, S_0);
      HeatJob j;
      j.address = a;
      j.deadline = req.deadline;
      j.cool = cool_time(model.thermal).simulated;
      if (req.target == Phase::Melted) {
        if (duties) {
          const auto it = duties->find(a);
          if (it != duties->end()) j.duty = it->second;
        }
        j.power = joule_power(model.heater, S_0, j.duty);
        j.duration = melt_time_at_duty(model, j.duty);
        if (j.duration < 0.0) {
          throw InfeasibleError("voxel " + to_string(a) +
                                " cannot reach its melt temperature at the commanded duty");
        }
      } else {
        j.duty = 0.0;
      }
      jobs.push_back(j);
    }
  }
  return jobs;
}

Schedule plan_schedule(const std::vector<HeatJob>& jobs, const PowerBudget& budget) {
  check_jobs(jobs, budget);
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (jobs[a].energy() != jobs[b].energy()) return jobs[a].energy() > jobs[b].energy();
    return jobs[a].address < jobs[b].address;
  });
  // Greedy placement only changes where the peak crosses a subset sum of job powers, and a
  // plan that fits a lower peak fits this one, so keep the best plan over those breakpoints.
  double max_power = 0.0;
  for (const auto& j : jobs) max_power = std::max(max_power, j.power);
  std::set<double> sums{0.0};
  for (const auto& j : jobs) {
    std::vector<double> add;
    for (double s : sums) {
      const double v = s + j.power;
      if (v <= budget.peak + kPowerTol) add.push_back(v);
    }
    sums.insert(add.begin(), add.end());
    if (sums.size() > kMaxBreakpoints) {
      sums.clear();
      break;
    }
  }
  std::vector<Placed> best = earliest_fit(jobs, order, budget);
  double best_span = makespan_of(best);
  for (auto it = sums.rbegin(); it != sums.rend(); ++it) {
    if (*it < max_power - kPowerTol || *it >= budget.peak) continue;
    PowerBudget lower = budget;
    lower.peak = std::max(*it, max_power);
    auto placed = earliest_fit(jobs, order, lower);
    const double span = makespan_of(placed);
    if (span < best_span - 1e-12) {
      best_span = span;
      best = std::move(placed);
    }
  }
  return assemble(jobs, best);
}

Schedule plan_schedule(const std::vector<ActivationRequest>& requests, const PowerBudget& budget,
                       const ThermalParams& thermal, const HeaterParams& heater, double S_0,
                       const CalibrationBatch* records) {
  return plan_schedule(build_jobs(requests, thermal, heater, S_0, records), budget);
}

Schedule brute_force_schedule(const std::vector<HeatJob>& jobs, const PowerBudget& budget) {
  if (jobs.size() > 6) throw ValidationError("brute-force scheduling is limited to 6 voxels");
  check_jobs(jobs, budget);
  std::vector<std::size_t> order(jobs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Placed> best;
  double best_span = std::numeric_limits<double>::infinity();
  do {
    auto placed = earliest_fit(jobs, order, budget);
    const double span = makespan_of(placed);
    if (span < best_span - 1e-12) {
      best_span = span;
      best = std::move(placed);
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return assemble(jobs, best);
}

std::vector<Violation> validate_schedule(const Schedule& schedule, const PowerBudget& budget) {
  std::vector<Violation> out;
  struct Heat {
    Address address;
    Interval iv;
  };
  std::vector<Heat> heats;
  for (const auto& v : schedule.voxels) {
    std::vector<Interval> iv = v.intervals;
    std::sort(iv.begin(), iv.end(),
              [](const Interval& a, const Interval& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < iv.size(); ++i) {
      if (!(iv[i].duty >= 0.0 && iv[i].duty <= 1.0)) {
        out.push_back({"duty", iv[i].start, "voxel " + to_string(v.address) + " duty out of range"});
      }
      if (i > 0 && iv[i].start < iv[i - 1].end - 1e-12) {
        out.push_back({"overlap", iv[i].start,
                       "voxel " + to_string(v.address) + " has overlapping intervals"});
      }
      if (iv[i].heating) heats.push_back({v.address, iv[i]});
    }
  }
  std::set<double> events;
  for (const auto& h : heats) events.insert(h.iv.start);
  for (double t : events) {
    double total = 0.0;
    std::vector<double> branch(budget.branches.size(), 0.0);
    for (const auto& h : heats) {
      if (!(h.iv.start <= t && t < h.iv.end)) continue;
      total += h.iv.power;
      for (std::size_t b = 0; b < budget.branches.size(); ++b) {
        if (in_branch(budget.branches[b], h.address)) branch[b] += h.iv.power;
      }
    }
    char buf[128];
    if (total > budget.peak + kPowerTol) {
      std::snprintf(buf, sizeof buf, "%.4g W exceeds the %.4g W budget", total, budget.peak);
      out.push_back({"power", t, buf});
    }
    for (std::size_t b = 0; b < budget.branches.size(); ++b) {
      if (branch[b] > budget.branches[b].limit + kPowerTol) {
        std::snprintf(buf, sizeof buf, "branch %zu draws %.4g W over its %.4g W limit", b,
                      branch[b], budget.branches[b].limit);
        out.push_back({"branch_power", t, buf});
      }
    }
  }
  return out;
}

std::map<Address, double> equalize_melt_fronts(const std::vector<Address>& group,
                                               const CalibrationBatch& records,
                                               const ThermalParams& thermal,
                                               const HeaterParams& heater, double S_0,
                                               EqualizeMode mode) {
  std::map<Address, VoxelModel> models;
  for (const Address& a : group) {
    const CalibrationRecord* rec = records.find(a);
    if (!rec) throw ValidationError("voxel " + to_string(a) + " has no calibration record");
    models.emplace(a, voxel_model(rec, thermal, heater, S_0));
  }
  std::map<Address, double> duty;
  if (models.empty()) return duty;

  if (mode == EqualizeMode::Formula) {
    double top = 0.0;
    for (const auto& [a, m] : models) {
      const double P = joule_power(m.heater, S_0, 1.0);
      if (!(m.thermal.eta * P > m.thermal.G_th * (m.thermal.T_m - m.thermal.T_amb))) {
        throw InfeasibleError("voxel " + to_string(a) + " cannot melt at duty 1");
      }
      duty[a] = m.thermal.Q_melt / P;
      top = std::max(top, duty[a]);
    }
    for (auto& [a, d] : duty) d /= top;
    return duty;
  }

  std::map<Address, double> full;
  double target = 0.0;
  for (const auto& [a, m] : models) {
    const double t = melt_time_at_duty(m, 1.0);
    if (t < 0.0) throw InfeasibleError("voxel " + to_string(a) + " cannot melt at duty 1");
    full[a] = t;
    target = std::max(target, t);
  }
  for (const auto& [a, m] : models) {
    if (full[a] >= target) {
      duty[a] = 1.0;
      continue;
    }
    // Melt time falls monotonically with duty; bisect between the melt threshold and 1.
    const ThermalParams& t = m.thermal;
    const double P1 = joule_power(m.heater, S_0, 1.0);
    double lo = t.G_th * (t.T_m - t.T_amb) / (t.eta * P1);
    double hi = 1.0;
    for (int i = 0; i < 40; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double tm = melt_time_at_duty(m, mid);
      if (tm < 0.0 || tm > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    duty[a] = hi;
  }
  return duty;
}

}  // namespace vsl
