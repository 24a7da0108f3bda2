#pragma once

#include <string>
#include <vector>

#include "vsl/geometry.hpp"
#include "vsl/mechanics.hpp"
#include "vsl/thermal.hpp"

namespace vsl {

bool transition_allowed(Phase from, Phase to);
bool transition_allowed(Health from, Health to);

/// Moves a voxel to a new phase; throws ValidationError for a disallowed transition or a
/// trimmed voxel. Keeps phase_fraction consistent with the solid and melted end states.
VoxelRecord set_phase(VoxelRecord voxel, Phase to);

/// Fractures a solid, healthy voxel when the load strictly exceeds the envelope limit.
/// Throws ValidationError for melted or trimmed voxels.
VoxelRecord apply_overload(VoxelRecord voxel, double load, const FailureEnvelope& envelope);

/// Ligament envelope of one voxel, honoring its geometry override.
FailureEnvelope voxel_envelope(const VoxelGrid& grid, const Address& a,
                               const MechanicsConfig& cfg = {});

struct ResetResult {
  VoxelRecord voxel;
  bool cycle_completed = false;
  std::string diagnostic;  // empty when nothing to report
};

/// Heals a fractured voxel once the trace shows a full melt (fraction reaches 1) followed by
/// full solidification (back to 0). Without a full cycle the voxel is returned unchanged.
ResetResult thermal_reset(const VoxelRecord& voxel, const TransientTrace& trace);

/// Melt-then-cool schedule for one voxel that a reset can use.
TransientTrace reset_cycle_trace(const ThermalParams& t, const HeaterParams& h, double S_0);

struct TrimResult {
  VoxelGrid grid;
  std::vector<std::vector<Address>> components;  // live components after trimming
  std::vector<std::string> warnings;
};

/// Marks the region trimmed. Addresses and calibration of survivors are untouched.
/// Throws ValidationError for addresses outside the grid.
TrimResult trim(const VoxelGrid& grid, const std::vector<Address>& region);

/// Live voxels grouped into edge-connected components, in address order.
std::vector<std::vector<Address>> live_components(const VoxelGrid& grid);

}  // namespace vsl
