#pragma once

#include <array>
#include <string>
#include <vector>

#include "vsl/geometry.hpp"
#include "vsl/mechanics.hpp"
#include "vsl/pattern.hpp"

namespace vsl {

/// Address set for a joint. Bands are counted in rows for bend/hinge kinds and in columns
/// for twist/shear; a large magnitude doubles the band (and the twist diagonals), so a large
/// pattern always contains the small one with the same anchor. Twist diagonals wrap around
/// the circumference; every other kind must fit inside the grid.
ActivationPattern synthesize_pattern(const JointSpec& spec, const VoxelGrid& grid);

struct JointPreset {
  std::string label;  // bend_small, bend_large, hinge_small, hinge_large, twist, shear
  JointSpec spec;
};

/// The six canonical joints placed on a grid of at least 4 rows.
std::vector<JointPreset> joint_presets(const VoxelGrid& grid);

struct JointReport {
  StiffnessReport before;
  StiffnessReport after;
  std::array<double, 4> relative_drop{};  // 1 - after/before per mode
  Mode dominant = Mode::Bending;
  /// Bending stiffness (N*mm/deg) of the activated state, reported for hinge kinds.
  double rotational_stiffness = 0.0;
};

JointReport evaluate_pattern(const VoxelGrid& grid, const ActivationPattern& pattern,
                             const MechanicsConfig& cfg = {});

/// Share of strain energy held by the pattern and its edge-adjacent ring under the given
/// mode, with the pattern activated.
double localization_metric(const VoxelGrid& grid, const ActivationPattern& pattern, Mode mode,
                           const MechanicsConfig& cfg = {});

/// Axial shortening fraction when `rows_activated` full rows collapse to their stroke.
double predict_compression(const DesignParams& p, int rows_activated);

/// Nested activation sets Zero, Two, Three, Four, Six, Twelve: the voxels nearest the
/// sheet centre, taken in a fixed order so each set contains the previous one.
inline constexpr std::array<const char*, 6> kModulationSets{"Zero", "Two",  "Three",
                                                            "Four", "Six",  "Twelve"};
ActivationPattern modulation_set(const VoxelGrid& grid, const std::string& name);

/// Two edge-adjacent voxels at the sheet centre. Aligned places them side by side along the
/// circumference, the direction of the shear load and of the bending moment axis;
/// orthogonal stacks them along the band height.
ActivationPattern two_pattern(const VoxelGrid& grid, bool aligned);

}  // namespace vsl
