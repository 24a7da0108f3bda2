#include "vsl/mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "vsl/errors.hpp"

namespace vsl {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

bool is_rotation(Mode m) { return m == Mode::Bending || m == Mode::Torsion; }

}  // namespace

double LigamentGeometry::torsion_constant() const {
  const double a = std::max(width, thickness);
  const double b = std::min(width, thickness);
  if (a <= 0.0) return 0.0;
  const double r = b / a;
  return a * b * b * b * (1.0 / 3.0 - 0.21 * r * (1.0 - r * r * r * r / 12.0));
}

LigamentStiffness ligament_stiffness(const LigamentGeometry& g, const MaterialState& mat) {
  if (!(g.length > 0.0 && g.width > 0.0 && g.thickness > 0.0)) {
    throw ValidationError("ligament dimensions must be positive");
  }
  if (!(mat.E > 0.0)) throw ValidationError("elastic modulus must be positive");
  const double L = g.length;
  return {mat.E * g.area() / L, 12.0 * mat.E * g.second_moment() / (L * L * L)};
}

FailureEnvelope failure_envelope(const LigamentGeometry& g, const MaterialState& mat,
                                 double end_factor) {
  if (mat.label != MaterialLabel::MetalSolid) {
    throw ValidationError("failure envelope requires solid metal; elastomer ligaments do not yield or buckle");
  }
  if (!(g.length > 0.0 && g.width > 0.0 && g.thickness > 0.0) || !(mat.E > 0.0) ||
      !(mat.sigma_y > 0.0) || !(end_factor > 0.0)) {
    throw ValidationError("failure envelope inputs must be positive");
  }
  const double Leff = end_factor * g.length;
  FailureEnvelope env;
  env.F_y = mat.sigma_y * g.width * g.thickness;
  env.F_cr = std::numbers::pi * std::numbers::pi * mat.E * g.second_moment() / (Leff * Leff);
  env.governing = env.F_cr < env.F_y ? FailureMode::Buckling : FailureMode::Yield;
  env.crossover_t_f =
      Leff * std::sqrt(12.0 * mat.sigma_y / (std::numbers::pi * std::numbers::pi * mat.E));
  return env;
}

// ---------------------------------------------------------------------------

int FrameModel::add_node(const Eigen::Vector3d& x) {
  nodes_.push_back(x);
  return static_cast<int>(nodes_.size()) - 1;
}

void FrameModel::add_element(const FrameElement& e) {
  if (e.n1 < 0 || e.n2 < 0 || e.n1 >= node_count() || e.n2 >= node_count() || e.n1 == e.n2) {
    throw ValidationError("frame element references invalid nodes");
  }
  elements_.push_back(e);
}

Matrix12 FrameModel::element_stiffness(const FrameElement& e) const {
  const Eigen::Vector3d d = nodes_[e.n2] - nodes_[e.n1];
  const double L = d.norm();
  const Eigen::Vector3d e1 = d / L;
  Eigen::Vector3d ref(0.0, 0.0, 1.0);
  if (std::abs(e1.dot(ref)) > 0.9) ref = Eigen::Vector3d(0.0, 1.0, 0.0);
  const Eigen::Vector3d e2 = ref.cross(e1).normalized();
  const Eigen::Vector3d e3 = e1.cross(e2);

  Matrix12 k = Matrix12::Zero();
  const double L2 = L * L;
  const double L3 = L2 * L;

  const double a = e.EA / L;
  k(0, 0) = a; k(0, 6) = -a; k(6, 6) = a;
  const double t = e.GJ / L;
  k(3, 3) = t; k(3, 9) = -t; k(9, 9) = t;

  // Bending in the local x-y plane (about local z).
  const double z = e.EIz;
  k(1, 1) = 12 * z / L3;  k(1, 5) = 6 * z / L2;   k(1, 7) = -12 * z / L3; k(1, 11) = 6 * z / L2;
  k(5, 5) = 4 * z / L;    k(5, 7) = -6 * z / L2;  k(5, 11) = 2 * z / L;
  k(7, 7) = 12 * z / L3;  k(7, 11) = -6 * z / L2;
  k(11, 11) = 4 * z / L;

  // Bending in the local x-z plane (about local y).
  const double y = e.EIy;
  k(2, 2) = 12 * y / L3;  k(2, 4) = -6 * y / L2;  k(2, 8) = -12 * y / L3; k(2, 10) = -6 * y / L2;
  k(4, 4) = 4 * y / L;    k(4, 8) = 6 * y / L2;   k(4, 10) = 2 * y / L;
  k(8, 8) = 12 * y / L3;  k(8, 10) = 6 * y / L2;
  k(10, 10) = 4 * y / L;

  k = k.selfadjointView<Eigen::Upper>();

  Eigen::Matrix3d lambda;
  lambda.row(0) = e1.transpose();
  lambda.row(1) = e2.transpose();
  lambda.row(2) = e3.transpose();
  Matrix12 T = Matrix12::Zero();
  for (int b = 0; b < 4; ++b) T.block<3, 3>(3 * b, 3 * b) = lambda;
  return T.transpose() * k * T;
}

Eigen::SparseMatrix<double> FrameModel::assemble() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(elements_.size() * 144);
  for (const auto& e : elements_) {
    const Matrix12 ke = element_stiffness(e);
    const std::array<int, 2> ns{e.n1, e.n2};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) {
            const double v = ke(6 * a + i, 6 * b + j);
            if (v != 0.0) trips.emplace_back(6 * ns[a] + i, 6 * ns[b] + j, v);
          }
        }
      }
    }
  }
  Eigen::SparseMatrix<double> K(dof_count(), dof_count());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Eigen::Matrix<double, 12, 1> gather(const FrameElement& e, const Eigen::VectorXd& u) {
  Eigen::Matrix<double, 12, 1> ue;
  ue.head<6>() = u.segment<6>(6 * e.n1);
  ue.tail<6>() = u.segment<6>(6 * e.n2);
  return ue;
}

// ---------------------------------------------------------------------------

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Axial: return "axial";
    case Mode::Shear: return "shear";
    case Mode::Bending: return "bending";
    case Mode::Torsion: return "torsion";
  }
  return "axial";
}

Mode mode_from_string(const std::string& s) {
  for (auto m : kAllModes) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown mode '" + s + "'");
}

std::string mode_unit(Mode m) { return is_rotation(m) ? "N*mm/deg" : "N/mm"; }

namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

void check_floating(const BoundedFrame& model, const std::vector<bool>& prescribed_node) {
  const int n = model.frame.node_count();
  DisjointSet ds(n);
  for (const auto& e : model.frame.elements()) ds.unite(e.n1, e.n2);
  std::set<int> anchored;
  for (int i = 0; i < n; ++i) {
    if (prescribed_node[i]) anchored.insert(ds.find(i));
  }
  std::map<int, std::vector<int>> floating;
  for (int i = 0; i < n; ++i) {
    if (!anchored.count(ds.find(i))) floating[ds.find(i)].push_back(i);
  }
  if (floating.empty()) return;
  std::ostringstream os;
  os << "singular system: " << floating.size() << " floating substructure(s) without a load path;";
  for (const auto& [root, nodes] : floating) {
    os << " {";
    for (std::size_t k = 0; k < nodes.size() && k < 6; ++k) {
      const auto& x = model.frame.nodes()[nodes[k]];
      os << (k ? " " : "") << "(" << x.x() << "," << x.y() << ")";
    }
    if (nodes.size() > 6) os << " ...";
    os << "}";
  }
  throw SingularSystemError(os.str());
}

}  // namespace

ModeSolution solve_mode(const BoundedFrame& model, Mode mode) {
  const int n = model.frame.node_count();
  if (model.bottom.empty() || model.top.empty()) {
    throw SingularSystemError("singular system: lattice has no clamped bottom or driven top edge");
  }
  std::vector<bool> prescribed_node(static_cast<std::size_t>(n), false);
  for (int i : model.bottom) prescribed_node[i] = true;
  for (int i : model.top) prescribed_node[i] = true;
  check_floating(model, prescribed_node);

  Eigen::Vector3d r0 = Eigen::Vector3d::Zero();
  for (int i : model.top) r0 += model.frame.nodes()[i];
  r0 /= static_cast<double>(model.top.size());
  r0.z() = 0.0;

  Eigen::Vector3d trans = Eigen::Vector3d::Zero();
  Eigen::Vector3d rot = Eigen::Vector3d::Zero();
  switch (mode) {
    case Mode::Axial: trans = {0, 1, 0}; break;
    case Mode::Shear: trans = {1, 0, 0}; break;
    case Mode::Bending: rot = {1, 0, 0}; break;
    case Mode::Torsion: rot = {0, 1, 0}; break;
  }

  const int ndof = 6 * n;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ndof);
  for (int i : model.top) {
    const Eigen::Vector3d ui = trans + rot.cross(model.frame.nodes()[i] - r0);
    u.segment<3>(6 * i) = ui;
    u.segment<3>(6 * i + 3) = rot;
  }

  std::vector<int> free_index(static_cast<std::size_t>(ndof), -1);
  int nfree = 0;
  for (int i = 0; i < n; ++i) {
    if (prescribed_node[i]) continue;
    for (int d = 0; d < 6; ++d) free_index[6 * i + d] = nfree++;
  }

  const Eigen::SparseMatrix<double> K = model.frame.assemble();
  if (nfree > 0) {
    std::vector<Eigen::Triplet<double>> kff;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
    for (int col = 0; col < K.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
        const int fr = free_index[it.row()];
        if (fr < 0) continue;
        const int fc = free_index[it.col()];
        if (fc >= 0) {
          kff.emplace_back(fr, fc, it.value());
        } else {
          rhs[fr] -= it.value() * u[it.col()];
        }
      }
    }
    Eigen::SparseMatrix<double> Kff(nfree, nfree);
    Kff.setFromTriplets(kff.begin(), kff.end());

    Eigen::VectorXd uf;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kff);
    bool solved = false;
    if (ldlt.info() == Eigen::Success) {
      uf = ldlt.solve(rhs);
      const double res = (Kff * uf - rhs).norm();
      solved = ldlt.info() == Eigen::Success && uf.allFinite() &&
               res <= 1e-10 * std::max(rhs.norm(), 1e-300);
    }
    if (!solved) {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(1e-10);
      cg.setMaxIterations(20 * nfree);
      cg.compute(Kff);
      uf = cg.solve(rhs);
      if (cg.info() != Eigen::Success || !uf.allFinite()) {
        throw SingularSystemError("singular system: stiffness operator could not be factorized");
      }
    }
    for (int dof = 0; dof < ndof; ++dof) {
      if (free_index[dof] >= 0) u[dof] = uf[free_index[dof]];
    }
  }

  ModeSolution sol;
  sol.element_energy.reserve(model.frame.elements().size());
  double work = 0.0;
  for (const auto& e : model.frame.elements()) {
    const auto ue = gather(e, u);
    const double energy = 0.5 * ue.dot(model.frame.element_stiffness(e) * ue);
    sol.element_energy.push_back(energy);
    work += 2.0 * energy;
  }
  sol.stiffness = is_rotation(mode) ? work * kDegree : work;
  sol.displacement = std::move(u);
  return sol;
}

// ---------------------------------------------------------------------------

LatticeModel assemble_global(const VoxelGrid& grid, const ActivationPattern& activation,
                             const MechanicsConfig& cfg) {
  for (const auto& a : activation.addresses) {
    if (!grid.contains(a)) throw ValidationError("activation address outside grid: " + to_string(a));
    if (grid.at(a).trimmed()) {
      throw ValidationError("activation references trimmed voxel " + to_string(a));
    }
  }
  const DesignParams& p = grid.params();
  LatticeModel model;

  std::map<std::pair<NodeKey, NodeKey>, std::vector<Address>> sides;
  for (const auto& v : grid.cells()) {
    if (v.trimmed()) continue;
    const auto verts = triangle_vertices(v.address);
    for (int s = 0; s < 3; ++s) {
      NodeKey a = verts[s];
      NodeKey b = verts[(s + 1) % 3];
      if (b < a) std::swap(a, b);
      sides[{a, b}].push_back(v.address);
      model.node_ids.emplace(a, 0);
      model.node_ids.emplace(b, 0);
    }
  }

  auto& frame = model.bounded.frame;
  for (auto& [key, id] : model.node_ids) {
    const auto xy = node_position(key, p.S_0);
    id = frame.add_node(Eigen::Vector3d(xy[0], xy[1], 0.0));
    if (key.line == 0) model.bounded.bottom.push_back(id);
    if (key.line == grid.rows()) model.bounded.top.push_back(id);
  }

  const MaterialState metal = cfg.metal();
  const MaterialState soft = cfg.elastomer();
  for (const auto& [side, voxels] : sides) {
    bool compliant = false;
    double t = std::numeric_limits<double>::infinity();
    double alpha = std::numeric_limits<double>::infinity();
    for (const auto& a : voxels) {
      const auto& v = grid.at(a);
      compliant = compliant || v.compliant() || activation.contains(a);
      const auto& g = v.geometry_override;
      t = std::min(t, g ? g->t_f : p.t_f);
      alpha = std::min(alpha, g ? g->alpha : p.alpha);
    }
    const LigamentGeometry lig{p.S_0, alpha * p.S_0, t};
    const MaterialState& mat = compliant ? soft : metal;
    FrameElement e;
    e.n1 = model.node_ids.at(side.first);
    e.n2 = model.node_ids.at(side.second);
    e.EA = mat.E * lig.area();
    e.EIy = e.EIz = mat.E * lig.second_moment();
    e.GJ = mat.shear_modulus() * lig.torsion_constant();
    if (cfg.membrane && p.t_sheet > t) {
      const LigamentGeometry mem{p.S_0, alpha * p.S_0, p.t_sheet - t};
      e.EA += soft.E * mem.area();
      e.EIy += soft.E * mem.second_moment();
      e.EIz += soft.E * mem.second_moment();
      e.GJ += soft.shear_modulus() * mem.torsion_constant();
    }
    frame.add_element(e);
    model.element_voxels.push_back(voxels);
    model.element_compliant.push_back(compliant);
  }
  return model;
}

double mode_stiffness(const VoxelGrid& grid, const ActivationPattern& activation, Mode mode,
                      const MechanicsConfig& cfg) {
  return solve_mode(assemble_global(grid, activation, cfg).bounded, mode).stiffness;
}

double StiffnessReport::get(Mode m) const {
  switch (m) {
    case Mode::Axial: return axial;
    case Mode::Shear: return shear;
    case Mode::Bending: return bending;
    case Mode::Torsion: return torsion;
  }
  return 0.0;
}

void StiffnessReport::set(Mode m, double v) {
  switch (m) {
    case Mode::Axial: axial = v; break;
    case Mode::Shear: shear = v; break;
    case Mode::Bending: bending = v; break;
    case Mode::Torsion: torsion = v; break;
  }
}

StiffnessReport stiffness_report(const VoxelGrid& grid, const ActivationPattern& activation,
                                 const MechanicsConfig& cfg) {
  const LatticeModel model = assemble_global(grid, activation, cfg);
  StiffnessReport rep;
  for (Mode m : kAllModes) rep.set(m, solve_mode(model.bounded, m).stiffness);
  rep.area = sheet_area(grid.params());
  return rep;
}

std::map<Address, double> voxel_energy(const LatticeModel& model, const ModeSolution& sol) {
  std::map<Address, double> out;
  for (std::size_t i = 0; i < sol.element_energy.size(); ++i) {
    const auto& voxels = model.element_voxels[i];
    const double share = sol.element_energy[i] / static_cast<double>(voxels.size());
    for (const auto& a : voxels) out[a] += share;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Topology t) {
  switch (t) {
    case Topology::Cubic: return "cubic";
    case Topology::FishScale: return "fish_scale";
    case Topology::Hexagonal: return "hexagonal";
    case Topology::Kagome: return "kagome";
    case Topology::Parallelogram: return "parallelogram";
    case Topology::Reentrant: return "reentrant";
    case Topology::Triangular: return "triangular";
  }
  return "triangular";
}

Topology topology_from_string(const std::string& s) {
  for (auto t : kAllTopologies) {
    if (to_string(t) == s) return t;
  }
  throw ValidationError("unknown topology '" + s + "'");
}

namespace {

struct CellEdge {
  int from = 0;
  int to = 0;
  int di = 0;  // lattice shift of the `to` node
  int dj = 0;
};

struct UnitCell {
  Eigen::Vector2d a1;
  Eigen::Vector2d a2;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<CellEdge> edges;
};

UnitCell unit_cell(Topology t, double a) {
  const double s3 = std::sqrt(3.0);
  UnitCell c;
  switch (t) {
    case Topology::Triangular:
      c.a1 = {a, 0};
      c.a2 = {a / 2, s3 * a / 2};
      c.nodes = {{0, 0}};
      c.edges = {{0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, -1, 1}};
      break;
    case Topology::Parallelogram:
      c.a1 = {a, 0};
      c.a2 = {a / 2, s3 * a / 2};
      c.nodes = {{0, 0}};
      c.edges = {{0, 0, 1, 0}, {0, 0, 0, 1}};
      break;
    case Topology::Cubic:
      c.a1 = {a, 0};
      c.a2 = {0, a};
      c.nodes = {{0, 0}};
      c.edges = {{0, 0, 1, 0}, {0, 0, 0, 1}};
      break;
    case Topology::Hexagonal:
      c.a1 = {s3 * a, 0};
      c.a2 = {s3 * a / 2, 1.5 * a};
      c.nodes = {{0, 0}, {0, a}};
      c.edges = {{0, 1, 0, 0}, {1, 0, 0, 1}, {1, 0, -1, 1}};
      break;
    case Topology::Reentrant: {
      // Inverted honeycomb: vertical struts of 2a, inclined struts of a at 30 degrees.
      const double h = 2.0 * a;
      c.a1 = {s3 * a, 0};
      c.a2 = {s3 * a / 2, h - a / 2};
      c.nodes = {{0, 0}, {0, h}};
      c.edges = {{0, 1, 0, 0}, {1, 0, 0, 1}, {1, 0, -1, 1}};
      break;
    }
    case Topology::Kagome:
      c.a1 = {2 * a, 0};
      c.a2 = {a, s3 * a};
      c.nodes = {{0, 0}, {a, 0}, {a / 2, s3 * a / 2}};
      c.edges = {{0, 1, 0, 0}, {0, 2, 0, 0}, {1, 2, 0, 0}, {1, 0, 1, 0}, {2, 0, 0, 1}, {2, 1, -1, 1}};
      break;
    case Topology::FishScale:
      // Rows of semicircular scales (polyline arcs of diameter a) resting on the crests below.
      c.a1 = {a, 0};
      c.a2 = {a / 2, s3 * a / 4};
      c.nodes = {{0, 0}, {a / 4, s3 * a / 4}, {3 * a / 4, s3 * a / 4}};
      c.edges = {{0, 1, 0, 0}, {1, 0, 0, 1}, {2, 0, 0, 1}, {2, 0, 1, 0}};
      break;
  }
  return c;
}

}  // namespace

BoundedFrame build_topology_band(Topology t, const BandSpec& band, double member_width,
                                 const MechanicsConfig& cfg) {
  const double W = 2.0 * std::numbers::pi * band.radius;
  const double H = band.height;
  // Round the member length so a whole number of cells closes around the circumference.
  const double period = unit_cell(t, 1.0).a1.x();
  const int cells_around = static_cast<int>(std::lround(W / (period * band.member_length)));
  if (cells_around < 3) {
    throw ValidationError("topology " + to_string(t) + " cannot tile the band dimensions");
  }
  const UnitCell cell = unit_cell(t, W / (period * cells_around));
  if (cell.a2.y() > H) {
    throw ValidationError("topology " + to_string(t) + " cannot tile the band dimensions");
  }
  constexpr double eps = 1e-6;
  auto wrap = [&](Eigen::Vector2d x) {
    x.x() = std::fmod(x.x(), W);
    if (x.x() < 0.0) x.x() += W;
    if (x.x() > W - eps) x.x() = 0.0;
    return x;
  };
  auto key_of = [](const Eigen::Vector2d& x) {
    return std::make_pair(std::llround(x.x() * 1e6), std::llround(x.y() * 1e6));
  };
  auto inside = [&](const Eigen::Vector2d& x) { return x.y() >= -eps && x.y() <= H + eps; };
  auto position = [&](int i, int j, int node) -> Eigen::Vector2d {
    return cell.nodes[node] + i * cell.a1 + j * cell.a2;
  };

  std::map<std::pair<long long, long long>, int> ids;
  std::vector<Eigen::Vector2d> pos;
  auto node_id = [&](const Eigen::Vector2d& x) {
    const Eigen::Vector2d w = wrap(x);
    auto [it, fresh] = ids.emplace(key_of(w), static_cast<int>(pos.size()));
    if (fresh) pos.push_back(w);
    return it->second;
  };

  const int jmax = static_cast<int>(std::ceil(H / cell.a2.y())) + 2;
  std::set<std::pair<int, int>> edges;
  for (int j = -2; j <= jmax; ++j) {
    for (int i = 0; i < cells_around; ++i) {
      for (const auto& ce : cell.edges) {
        const Eigen::Vector2d pa = position(i, j, ce.from);
        const Eigen::Vector2d pb = position(i + ce.di, j + ce.dj, ce.to);
        if (!inside(pa) || !inside(pb)) continue;
        const int ia = node_id(pa);
        const int ib = node_id(pb);
        if (ia != ib) edges.emplace(std::min(ia, ib), std::max(ia, ib));
      }
    }
  }

  // Wind the periodic strip onto the cylinder; its axis is the global y axis.
  BoundedFrame out;
  std::vector<int> remap(pos.size(), -1);
  for (const auto& [a, b] : edges) {
    for (int n : {a, b}) {
      if (remap[n] >= 0) continue;
      const double phi = 2.0 * std::numbers::pi * pos[n].x() / W;
      remap[n] = out.frame.add_node(
          Eigen::Vector3d(band.radius * std::sin(phi), pos[n].y(), band.radius * std::cos(phi)));
    }
  }
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -ymin;
  for (const auto& x : out.frame.nodes()) {
    ymin = std::min(ymin, x.y());
    ymax = std::max(ymax, x.y());
  }
  for (int i = 0; i < out.frame.node_count(); ++i) {
    const double y = out.frame.nodes()[i].y();
    if (y <= ymin + eps) out.bottom.push_back(i);
    if (y >= ymax - eps) out.top.push_back(i);
  }

  const MaterialState metal = cfg.metal();
  const LigamentGeometry section{1.0, member_width, band.thickness};
  for (const auto& [a, b] : edges) {
    FrameElement e;
    e.n1 = remap[a];
    e.n2 = remap[b];
    e.EA = metal.E * section.area();
    e.EIy = e.EIz = metal.E * section.second_moment();
    e.GJ = metal.shear_modulus() * section.torsion_constant();
    out.frame.add_element(e);
  }
  return out;
}

std::vector<TopologyResult> topology_compare(const std::vector<Topology>& topologies,
                                             double mass_budget, const BandSpec& band,
                                             const MechanicsConfig& cfg) {
  if (!(mass_budget > 0.0)) throw ValidationError("mass budget must be positive");
  const double W = 2.0 * std::numbers::pi * band.radius;
  std::vector<TopologyResult> results;
  for (Topology t : topologies) {
    // Member length total is independent of the width, so size once with a unit width.
    const BoundedFrame probe = build_topology_band(t, band, 1.0, cfg);
    double total_length = 0.0;
    for (const auto& e : probe.frame.elements()) {
      total_length += (probe.frame.nodes()[e.n2] - probe.frame.nodes()[e.n1]).norm();
    }
    TopologyResult r;
    r.topology = t;
    r.member_width = mass_budget / (cfg.density_metal * band.thickness * total_length);
    const BoundedFrame model = build_topology_band(t, band, r.member_width, cfg);
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -ymin;
    for (const auto& x : model.frame.nodes()) {
      ymin = std::min(ymin, x.y());
      ymax = std::max(ymax, x.y());
    }
    const double scale = (ymax - ymin) / W;
    for (Mode m : kAllModes) r.report.set(m, solve_mode(model, m).stiffness * scale);
    r.report.area = W * (ymax - ymin);
    r.node_count = model.frame.node_count();
    results.push_back(r);
  }
  for (Mode m : kAllModes) {
    double best = 0.0;
    for (const auto& r : results) best = std::max(best, r.report.get(m));
    for (auto& r : results) {
      r.normalized[static_cast<std::size_t>(m)] = best > 0.0 ? r.report.get(m) / best : 0.0;
    }
  }
  return results;
}

// ---------------------------------------------------------------------------

ScalingFit fit_scaling_exponent(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw ValidationError("scaling fit needs at least 3 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> logs;
  for (const auto& [x, k] : samples) {
    if (!(x > 0.0) || !(k > 0.0)) throw ValidationError("scaling fit samples must be positive");
    logs.emplace_back(std::log(x), std::log(k));
  }
  const double n = static_cast<double>(logs.size());
  for (const auto& [lx, ly] : logs) {
    sx += lx;
    sy += ly;
  }
  const double mx = sx / n;
  const double my = sy / n;
  double syy = 0.0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("scaling fit needs distinct x values");
  ScalingFit fit;
  fit.exponent = sxy / sxx;
  double ss_res = 0.0;
  for (const auto& [lx, ly] : logs) {
    const double r = ly - (my + fit.exponent * (lx - mx));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace vsl
