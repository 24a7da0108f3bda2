#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vsl/geometry.hpp"
#include "vsl/pattern.hpp"

namespace vsl {

enum class MaterialLabel { MetalSolid, Elastomer };

/// Effective isotropic material. sigma_y folds temperature and rate dependence into
/// one scalar and is meaningful for the solid metal only.
struct MaterialState {
  double E = 0.0;
  double sigma_y = 0.0;
  double nu = 0.3;
  MaterialLabel label = MaterialLabel::MetalSolid;

  double shear_modulus() const { return E / (2.0 * (1.0 + nu)); }
};

/// Configuration constants for the lattice model. The defaults are working values,
/// not measured properties; acceptance checks depend only on ratios and orderings.
struct MechanicsConfig {
  double E_metal = 9250.0;       // N/mm^2
  double E_elastomer = 1.0;      // N/mm^2
  double sigma_y = 30.0;         // N/mm^2
  double nu_metal = 0.3;
  double nu_elastomer = 0.49;
  double density_metal = 7.88e-3;  // g/mm^3
  bool membrane = true;          // parallel elastomer ligament of thickness t_sheet - t_f
  double buckling_end_factor = 1.0;

  MaterialState metal() const { return {E_metal, sigma_y, nu_metal, MaterialLabel::MetalSolid}; }
  MaterialState elastomer() const { return {E_elastomer, 0.0, nu_elastomer, MaterialLabel::Elastomer}; }
};

struct LigamentGeometry {
  double length = 0.0;     // L, mm
  double width = 0.0;      // w = alpha * S_0, mm
  double thickness = 0.0;  // t_f, mm

  double area() const { return width * thickness; }
  /// Transverse second moment w * t^3 / 12.
  double second_moment() const { return width * thickness * thickness * thickness / 12.0; }
  /// Saint-Venant torsion constant of the rectangular section.
  double torsion_constant() const;
};

struct LigamentStiffness {
  double k_s = 0.0;  // axial, N/mm
  double k_b = 0.0;  // transverse, fixed-fixed, N/mm
};

LigamentStiffness ligament_stiffness(const LigamentGeometry& g, const MaterialState& mat);

enum class FailureMode { Yield, Buckling };

struct FailureEnvelope {
  double F_y = 0.0;
  double F_cr = 0.0;
  FailureMode governing = FailureMode::Yield;
  double crossover_t_f = 0.0;

  double limit() const { return F_y < F_cr ? F_y : F_cr; }
};

/// Yield and Euler buckling capacity of one ligament. `end_factor` is the effective
/// length factor K (1.0 = pinned-pinned). Throws for elastomer material.
FailureEnvelope failure_envelope(const LigamentGeometry& g, const MaterialState& mat,
                                 double end_factor = 1.0);

// ---------------------------------------------------------------------------
// 3D frame model (6 DOF per node: ux uy uz rx ry rz).

struct FrameElement {
  int n1 = 0;
  int n2 = 0;
  double EA = 0.0;
  double EIy = 0.0;  // out-of-plane bending (about local y)
  double EIz = 0.0;  // in-plane bending (about local z)
  double GJ = 0.0;
};

using Matrix12 = Eigen::Matrix<double, 12, 12>;

class FrameModel {
 public:
  int add_node(const Eigen::Vector3d& x);
  void add_element(const FrameElement& e);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int dof_count() const { return 6 * node_count(); }
  const std::vector<Eigen::Vector3d>& nodes() const { return nodes_; }
  const std::vector<FrameElement>& elements() const { return elements_; }

  /// Element stiffness in global coordinates.
  Matrix12 element_stiffness(const FrameElement& e) const;
  Eigen::SparseMatrix<double> assemble() const;

 private:
  std::vector<Eigen::Vector3d> nodes_;
  std::vector<FrameElement> elements_;
};

Eigen::Matrix<double, 12, 1> gather(const FrameElement& e, const Eigen::VectorXd& u);

/// Frame with a clamped bottom edge and a top edge rigidly tied to a driver.
struct BoundedFrame {
  FrameModel frame;
  std::vector<int> bottom;
  std::vector<int> top;
};

enum class Mode { Axial, Shear, Bending, Torsion };
inline constexpr std::array<Mode, 4> kAllModes{Mode::Axial, Mode::Shear, Mode::Bending,
                                               Mode::Torsion};

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);
/// "N/mm" for translations, "N*mm/deg" for rotations.
std::string mode_unit(Mode m);

struct ModeSolution {
  double stiffness = 0.0;        // per mm or per degree
  Eigen::VectorXd displacement;  // full DOF vector for unit drive amplitude
  std::vector<double> element_energy;
};

/// Drives the top edge with the mode's unit rigid motion (translation along y for axial,
/// along x for shear, rotation about x for bending, about y for torsion) and returns the
/// work-conjugate generalized reaction. Throws SingularSystemError for floating parts.
ModeSolution solve_mode(const BoundedFrame& model, Mode mode);

/// The voxel lattice as a frame: one ligament per distinct triangle side. A side is
/// elastomer when any adjacent live voxel is activated, melted, or fractured.
struct LatticeModel {
  BoundedFrame bounded;
  std::map<NodeKey, int> node_ids;
  std::vector<std::vector<Address>> element_voxels;  // live voxels adjacent to each element
  std::vector<bool> element_compliant;
};

LatticeModel assemble_global(const VoxelGrid& grid, const ActivationPattern& activation,
                             const MechanicsConfig& cfg = {});

double mode_stiffness(const VoxelGrid& grid, const ActivationPattern& activation, Mode mode,
                      const MechanicsConfig& cfg = {});

struct StiffnessReport {
  double axial = 0.0;    // N/mm
  double shear = 0.0;    // N/mm
  double bending = 0.0;  // N*mm/deg
  double torsion = 0.0;  // N*mm/deg
  double area = 0.0;     // sheet area used for normalization, mm^2

  double get(Mode m) const;
  void set(Mode m, double v);
  double area_normalized(Mode m) const { return area > 0.0 ? get(m) / area : 0.0; }
};

StiffnessReport stiffness_report(const VoxelGrid& grid, const ActivationPattern& activation,
                                 const MechanicsConfig& cfg = {});

/// Strain energy per voxel (element energy split evenly across adjacent live voxels).
std::map<Address, double> voxel_energy(const LatticeModel& model, const ModeSolution& sol);

// ---------------------------------------------------------------------------
// Topology comparison at equal mass.

enum class Topology { Cubic, FishScale, Hexagonal, Kagome, Parallelogram, Reentrant, Triangular };
inline constexpr std::array<Topology, 7> kAllTopologies{
    Topology::Cubic,         Topology::FishScale, Topology::Hexagonal, Topology::Kagome,
    Topology::Parallelogram, Topology::Reentrant, Topology::Triangular};

std::string to_string(Topology t);
Topology topology_from_string(const std::string& s);

struct BandSpec {
  double radius = 30.0;      // mm; band width is the circumference
  double height = 62.3538;   // mm
  double member_length = 6.0;  // target; rounded so whole cells close the circumference
  double thickness = 1.0;
};

struct TopologyResult {
  Topology topology = Topology::Triangular;
  StiffnessReport report;          // height-normalized stiffness k * H / W
  std::array<double, 4> normalized{};  // divided by the best topology per mode
  double member_width = 0.0;       // width that meets the mass budget
  int node_count = 0;
};

/// Builds each topology on the same band, scales member width to the mass budget (g),
/// and normalizes each mode by the best performer. Results keep the input order.
std::vector<TopologyResult> topology_compare(const std::vector<Topology>& topologies,
                                             double mass_budget, const BandSpec& band,
                                             const MechanicsConfig& cfg = {});

/// Periodic strip of the topology wound onto a cylinder of the band radius (axis along y),
/// bottom ring clamped and top ring driven.
BoundedFrame build_topology_band(Topology t, const BandSpec& band, double member_width,
                                 const MechanicsConfig& cfg = {});

// ---------------------------------------------------------------------------

struct ScalingFit {
  double exponent = 0.0;
  double r_squared = 0.0;
};

/// Least-squares slope of log k against log x.
ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& samples);

}  // namespace vsl
