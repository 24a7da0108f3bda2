#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace vsl {

/// Geometric and material design vector of a helical lattice band.
/// Lengths in mm. Field names mirror the serialized JSON keys.
struct DesignParams {
  double R = 0.0;        // cylinder radius
  int m = 1;             // helix turns
  int N_theta = 3;       // voxels per turn
  int N_z = 1;           // stacked layers
  double S_0 = 0.0;      // nominal voxel edge
  double S_L = 0.0;      // fabricated edge
  double h_0 = 0.0;      // interlayer stand-off
  double t_f = 0.0;      // ligament thickness
  double t_sheet = 0.0;  // sheet thickness
  double phi_f = 0.0;    // t_f / t_sheet
  double alpha = 0.0;    // ligament width / S_0

  /// Throws ValidationError naming the first violated constraint.
  void validate() const;

  double ligament_width() const { return alpha * S_0; }

  /// The 4x20 reference band: 10 voxels per turn, 2 turns, 4 layers of 18 mm voxels.
  static DesignParams reference();
  /// Reference band with S_L reduced to the full-stroke compression design.
  static DesignParams compression_reference();
  /// Builds a closed band for a given resolution; S_0 follows from R.
  static DesignParams with_resolution(double R, int m, int N_theta, int N_z, double compression,
                                      double h_0, double t_sheet, double phi_f, double alpha);
};

struct Address {
  int row = 0;
  int col = 0;
  auto operator<=>(const Address&) const = default;
};

std::string to_string(const Address& a);

enum class Phase { Solid, Melting, Melted, Cooling };
enum class Health { Healthy, Fractured, Trimmed };

std::string to_string(Phase p);
std::string to_string(Health h);
Phase phase_from_string(const std::string& s);
Health health_from_string(const std::string& s);

/// Per-voxel ligament geometry override (sacrificial voxels).
struct GeometryOverride {
  double t_f = 0.0;
  double alpha = 0.0;
};

struct VoxelRecord {
  Address address;
  Phase phase = Phase::Solid;
  Health health = Health::Healthy;
  std::optional<GeometryOverride> geometry_override;
  std::optional<std::size_t> calibration_id;
  double temperature = 25.0;
  double phase_fraction = 0.0;

  bool trimmed() const { return health == Health::Trimmed; }
  /// Elastomer-only mechanics: melted, or fractured regardless of phase.
  bool compliant() const { return phase == Phase::Melted || health == Health::Fractured; }
};

/// Row-major unwrapped sheet. Row = layer from the bottom, column = azimuthal index
/// unrolled across turns. Even columns are up-pointing triangles.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(DesignParams params, int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const DesignParams& params() const { return params_; }

  bool contains(const Address& a) const {
    return a.row >= 0 && a.row < rows_ && a.col >= 0 && a.col < cols_;
  }
  static bool points_up(const Address& a) { return a.col % 2 == 0; }

  const VoxelRecord& at(const Address& a) const;
  VoxelRecord& at(const Address& a);
  const std::vector<VoxelRecord>& cells() const { return cells_; }
  std::vector<VoxelRecord>& cells() { return cells_; }

  std::size_t index(const Address& a) const {
    return static_cast<std::size_t>(a.row) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(a.col);
  }
  std::size_t active_count() const;
  std::vector<Address> active_addresses() const;

  /// Edge-adjacent addresses (shared triangle side), trimmed cells included.
  std::vector<Address> edge_neighbors(const Address& a) const;

 private:
  DesignParams params_;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<VoxelRecord> cells_;
};

VoxelGrid build_grid(const DesignParams& params);

// Lattice nodes of the planar sheet. Node line k sits at y = k * (sqrt(3)/2) * S_0 and
// odd lines are shifted half an edge to the left so that every row has the same footprint.
struct NodeKey {
  int line = 0;
  int index = 0;
  auto operator<=>(const NodeKey&) const = default;
};

std::array<NodeKey, 3> triangle_vertices(const Address& a);
/// Planar position (x, y) in mm of a lattice node for edge length S_0.
std::array<double, 2> node_position(const NodeKey& n, double S_0);

// Closed-form band kinematics. These are plain formulas and do not validate.
double band_height(const DesignParams& p);
double max_stroke(const DesignParams& p);

struct CompressionRatio {
  double value = 0.0;
  bool approximation_valid = true;  // false when h_0 is not small against the layer height
};
CompressionRatio compression_ratio(const DesignParams& p);

double sheet_area(const DesignParams& p);
/// Stiffness per unwrapped sheet area; throws ValidationError on zero area.
double normalize_stiffness(double k, const DesignParams& p);

}  // namespace vsl
