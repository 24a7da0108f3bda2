#include "vsl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vsl/errors.hpp"

namespace vsl {

namespace {

constexpr double kHalfSqrt3 = 0.86602540378443864676;

void require(bool ok, const std::string& constraint) {
  if (!ok) throw ValidationError("design parameter constraint violated: " + constraint);
}

double line_offset(int line) { return (line % 2 != 0) ? -0.5 : 0.0; }

}  // namespace

void DesignParams::validate() const {
  require(std::isfinite(R) && R > 0.0, "R > 0");
  require(m >= 1, "m >= 1");
  require(N_theta >= 3, "N_theta >= 3");
  require(N_z >= 1, "N_z >= 1");
  require(S_0 > 0.0 && S_L > 0.0, "S_0 > 0 and S_L > 0");
  require(S_L < S_0, "S_L < S_0");
  require(h_0 >= 0.0, "h_0 >= 0");
  require(t_sheet > 0.0 && t_f > 0.0, "t_f > 0 and t_sheet > 0");
  require(phi_f > 0.0 && phi_f <= 1.0, "phi_f in (0, 1]");
  require(std::abs(t_f - phi_f * t_sheet) <= 1e-9 * std::max(t_f, phi_f * t_sheet),
          "t_f = phi_f * t_sheet");
  require(alpha > 0.0 && alpha < 1.0, "alpha in (0, 1)");
  const double circumference = 2.0 * std::numbers::pi * R;
  require(std::abs(S_0 * N_theta - circumference) <= 1e-6 * circumference,
          "S_0 * N_theta = 2*pi*R (circumferential closure)");
}

DesignParams DesignParams::with_resolution(double R, int m, int N_theta, int N_z,
                                           double compression, double h_0, double t_sheet,
                                           double phi_f, double alpha) {
  DesignParams p;
  p.R = R;
  p.m = m;
  p.N_theta = N_theta;
  p.N_z = N_z;
  p.S_0 = 2.0 * std::numbers::pi * R / N_theta;
  p.S_L = compression * p.S_0;
  p.h_0 = h_0;
  p.t_sheet = t_sheet;
  p.phi_f = phi_f;
  p.t_f = phi_f * t_sheet;
  p.alpha = alpha;
  return p;
}

DesignParams DesignParams::reference() {
  // R chosen so that ten 18 mm voxels close one turn.
  return with_resolution(180.0 / (2.0 * std::numbers::pi), 2, 10, 4, 0.7, 2.0, 2.0, 0.5,
                         1.0 / 6.0);
}

DesignParams DesignParams::compression_reference() {
  auto p = reference();
  p.S_L = 0.35 * p.S_0;
  return p;
}

std::string to_string(const Address& a) {
  std::ostringstream os;
  os << a.row << ',' << a.col;
  return os.str();
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Solid: return "solid";
    case Phase::Melting: return "melting";
    case Phase::Melted: return "melted";
    case Phase::Cooling: return "cooling";
  }
  return "solid";
}

std::string to_string(Health h) {
  switch (h) {
    case Health::Healthy: return "healthy";
    case Health::Fractured: return "fractured";
    case Health::Trimmed: return "trimmed";
  }
  return "healthy";
}

Phase phase_from_string(const std::string& s) {
  if (s == "solid") return Phase::Solid;
  if (s == "melting") return Phase::Melting;
  if (s == "melted") return Phase::Melted;
  if (s == "cooling") return Phase::Cooling;
  throw ValidationError("unknown phase '" + s + "'");
}

Health health_from_string(const std::string& s) {
  if (s == "healthy") return Health::Healthy;
  if (s == "fractured") return Health::Fractured;
  if (s == "trimmed") return Health::Trimmed;
  throw ValidationError("unknown health '" + s + "'");
}

VoxelGrid::VoxelGrid(DesignParams params, int rows, int cols)
    : params_(std::move(params)), rows_(rows), cols_(cols) {
  cells_.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      VoxelRecord v;
      v.address = {r, c};
      cells_.push_back(v);
    }
  }
}

const VoxelRecord& VoxelGrid::at(const Address& a) const {
  if (!contains(a)) throw ValidationError("address out of grid: " + to_string(a));
  return cells_[index(a)];
}

VoxelRecord& VoxelGrid::at(const Address& a) {
  if (!contains(a)) throw ValidationError("address out of grid: " + to_string(a));
  return cells_[index(a)];
}

std::size_t VoxelGrid::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const VoxelRecord& v) { return !v.trimmed(); }));
}

std::vector<Address> VoxelGrid::active_addresses() const {
  std::vector<Address> out;
  for (const auto& v : cells_) {
    if (!v.trimmed()) out.push_back(v.address);
  }
  return out;
}

std::vector<Address> VoxelGrid::edge_neighbors(const Address& a) const {
  std::vector<Address> out;
  const auto mine = triangle_vertices(a);
  auto shares_side = [&](const Address& b) {
    const auto other = triangle_vertices(b);
    int shared = 0;
    for (const auto& n : mine) shared += static_cast<int>(std::count(other.begin(), other.end(), n));
    return shared == 2;
  };
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -2; dc <= 2; ++dc) {
      const Address b{a.row + dr, a.col + dc};
      if ((dr == 0 && dc == 0) || !contains(b)) continue;
      if (shares_side(b)) out.push_back(b);
    }
  }
  return out;
}

VoxelGrid build_grid(const DesignParams& params) {
  params.validate();
  return VoxelGrid(params, params.N_z, params.N_theta * params.m);
}

std::array<NodeKey, 3> triangle_vertices(const Address& a) {
  const int r = a.row;
  const int j = a.col / 2;
  // Index shift between the bottom and top node lines of row r.
  const int d = static_cast<int>(std::lround(0.5 + line_offset(r) - line_offset(r + 1)));
  if (a.col % 2 == 0) {
    return {NodeKey{r, j}, NodeKey{r, j + 1}, NodeKey{r + 1, j + d}};
  }
  return {NodeKey{r + 1, j + d}, NodeKey{r + 1, j + 1 + d}, NodeKey{r, j + 1}};
}

std::array<double, 2> node_position(const NodeKey& n, double S_0) {
  return {(n.index + line_offset(n.line)) * S_0, n.line * kHalfSqrt3 * S_0};
}

double band_height(const DesignParams& p) {
  return kHalfSqrt3 * p.S_0 * p.N_z + (p.N_z - 1) * p.h_0;
}

double max_stroke(const DesignParams& p) { return kHalfSqrt3 * p.S_L * p.N_z; }

CompressionRatio compression_ratio(const DesignParams& p) {
  return {p.S_L / p.S_0, !(p.h_0 > 0.1 * kHalfSqrt3 * p.S_0)};
}

double sheet_area(const DesignParams& p) {
  return 2.0 * std::numbers::pi * p.m * p.R * band_height(p);
}

double normalize_stiffness(double k, const DesignParams& p) {
  const double area = sheet_area(p);
  if (!(area > 0.0)) throw ValidationError("sheet area is zero; cannot normalize stiffness");
  return k / area;
}

}  // namespace vsl
