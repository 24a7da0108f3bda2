#include "vsl/voxel_state.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

#include "vsl/errors.hpp"

namespace vsl {

bool transition_allowed(Phase from, Phase to) {
  switch (from) {
    case Phase::Solid: return to == Phase::Melting;
    case Phase::Melting: return to == Phase::Melted;
    case Phase::Melted: return to == Phase::Cooling;
    case Phase::Cooling: return to == Phase::Solid;
  }
  return false;
}

bool transition_allowed(Health from, Health to) {
  switch (from) {
    case Health::Healthy: return to == Health::Fractured || to == Health::Trimmed;
    case Health::Fractured: return to == Health::Healthy || to == Health::Trimmed;
    case Health::Trimmed: return false;
  }
  return false;
}

VoxelRecord set_phase(VoxelRecord voxel, Phase to) {
  if (voxel.trimmed()) {
    throw ValidationError("voxel " + to_string(voxel.address) + " is trimmed");
  }
  if (!transition_allowed(voxel.phase, to)) {
    throw ValidationError("phase transition " + to_string(voxel.phase) + " -> " + to_string(to) +
                          " is not allowed");
  }
  voxel.phase = to;
  if (to == Phase::Solid) voxel.phase_fraction = 0.0;
  if (to == Phase::Melted) voxel.phase_fraction = 1.0;
  return voxel;
}

VoxelRecord apply_overload(VoxelRecord voxel, double load, const FailureEnvelope& envelope) {
  if (voxel.trimmed()) {
    throw ValidationError("voxel " + to_string(voxel.address) + " is trimmed");
  }
  if (voxel.phase != Phase::Solid) {
    throw ValidationError("overload rejected: voxel " + to_string(voxel.address) + " is " +
                          to_string(voxel.phase) + " and cannot fracture");
  }
  if (!(load >= 0.0)) throw ValidationError("overload must be a non-negative force");
  if (voxel.health == Health::Healthy && load > envelope.limit()) {
    voxel.health = Health::Fractured;
  }
  return voxel;
}

FailureEnvelope voxel_envelope(const VoxelGrid& grid, const Address& a,
                               const MechanicsConfig& cfg) {
  const DesignParams& p = grid.params();
  const VoxelRecord& v = grid.at(a);
  double t = p.t_f;
  double alpha = p.alpha;
  if (v.geometry_override) {
    t = v.geometry_override->t_f;
    alpha = v.geometry_override->alpha;
  }
  return failure_envelope(LigamentGeometry{p.S_0, alpha * p.S_0, t}, cfg.metal(),
                          cfg.buckling_end_factor);
}

ResetResult thermal_reset(const VoxelRecord& voxel, const TransientTrace& trace) {
  ResetResult out{voxel, false, {}};
  const double melted_at = trace.first_crossing(1.0, true);
  bool full_melt = melted_at >= 0.0;
  double solid_again = -1.0;
  if (full_melt) {
    for (const auto& s : trace.samples) {
      if (s.t > melted_at && s.phase_fraction <= 0.0) {
        solid_again = s.t;
        break;
      }
    }
  } else if (!trace.samples.empty() && trace.samples.front().phase_fraction >= 1.0) {
    // Trace starts fully liquid: the melt half of the cycle happened before it.
    full_melt = true;
    solid_again = trace.first_crossing(0.0, false);
  }
  out.cycle_completed = full_melt && solid_again >= 0.0;
  if (voxel.trimmed()) {
    out.diagnostic = "voxel " + to_string(voxel.address) + " is trimmed; reset ignored";
    return out;
  }
  if (!out.cycle_completed) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "reset incomplete for voxel %s: peak liquid fraction %.3f, solidified %s",
                  to_string(voxel.address).c_str(), trace.max_phase_fraction(),
                  full_melt ? "no" : "n/a");
    out.diagnostic = buf;
    return out;
  }
  out.voxel.health = Health::Healthy;
  out.voxel.phase = Phase::Solid;
  out.voxel.phase_fraction = 0.0;
  if (!trace.samples.empty()) out.voxel.temperature = trace.samples.back().T;
  return out;
}

TransientTrace reset_cycle_trace(const ThermalParams& t, const HeaterParams& h, double S_0) {
  const MeltTime melt = melt_time(t, h, S_0);
  const CoolTime cool = cool_time(t);
  const double heat_end = melt.simulated + 1.0;
  DutySchedule schedule{{0.0, heat_end}, {1.0, 0.0}};
  const double dt = max_stable_dt(t) / 5.0;
  return simulate_transient(t, h, S_0, schedule, dt, heat_end + 1.2 * cool.simulated + 5.0);
}

std::vector<std::vector<Address>> live_components(const VoxelGrid& grid) {
  const auto n = grid.cells().size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& v : grid.cells()) {
    if (v.trimmed()) continue;
    for (const Address& nb : grid.edge_neighbors(v.address)) {
      if (grid.at(nb).trimmed()) continue;
      const auto a = find(grid.index(v.address));
      const auto b = find(grid.index(nb));
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<std::vector<Address>> groups;
  std::vector<int> slot(n, -1);
  for (const auto& v : grid.cells()) {
    if (v.trimmed()) continue;
    const auto root = find(grid.index(v.address));
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[root])].push_back(v.address);
  }
  return groups;
}

TrimResult trim(const VoxelGrid& grid, const std::vector<Address>& region) {
  for (const Address& a : region) {
    if (!grid.contains(a)) {
      throw ValidationError("trim address " + to_string(a) + " is outside the grid");
    }
  }
  TrimResult out{grid, {}, {}};
  for (const Address& a : region) out.grid.at(a).health = Health::Trimmed;
  out.components = live_components(out.grid);
  if (out.components.size() >= 2) {
    std::string msg = "trim disconnects the lattice into " +
                      std::to_string(out.components.size()) + " components:";
    for (const auto& c : out.components) {
      msg += " [" + to_string(c.front()) + " .. " + to_string(c.back()) + ", " +
             std::to_string(c.size()) + " voxels]";
    }
    out.warnings.push_back(msg);
  }
  return out;
}

}  // namespace vsl
