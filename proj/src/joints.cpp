#include "vsl/joints.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "vsl/errors.hpp"

namespace vsl {

namespace {

std::array<double, 2> centroid(const Address& a, double S_0) {
  double x = 0.0, y = 0.0;
  for (const NodeKey& n : triangle_vertices(a)) {
    const auto p = node_position(n, S_0);
    x += p[0] / 3.0;
    y += p[1] / 3.0;
  }
  return {x, y};
}

std::array<double, 2> sheet_centre(const VoxelGrid& grid) {
  double x = 0.0, y = 0.0;
  for (const auto& v : grid.cells()) {
    const auto c = centroid(v.address, grid.params().S_0);
    x += c[0];
    y += c[1];
  }
  const auto n = static_cast<double>(grid.cells().size());
  return {x / n, y / n};
}

// Live voxels ordered by distance from the sheet centre, ties broken by address.
std::vector<Address> by_distance_from_centre(const VoxelGrid& grid) {
  const auto c = sheet_centre(grid);
  std::vector<std::pair<double, Address>> d;
  for (const auto& v : grid.cells()) {
    if (v.trimmed()) continue;
    const auto p = centroid(v.address, grid.params().S_0);
    // Rounded so that mirror-image ties compare equal and fall back to address order.
    const double r = std::round(std::hypot(p[0] - c[0], p[1] - c[1]) * 1e9) / 1e9;
    d.emplace_back(r, v.address);
  }
  std::sort(d.begin(), d.end());
  std::vector<Address> out;
  for (const auto& [r, a] : d) out.push_back(a);
  return out;
}

void require_fit(bool ok, const JointSpec& spec) {
  if (!ok) {
    throw ValidationError("joint " + to_string(spec.kind) + " at " + to_string(spec.location) +
                          " exceeds the grid");
  }
}

}  // namespace

ActivationPattern synthesize_pattern(const JointSpec& spec, const VoxelGrid& grid) {
  const int rows = grid.rows();
  const int cols = grid.cols();
  if (spec.band_width < 1) throw ValidationError("band_width must be >= 1");
  const int scale = spec.magnitude == JointSize::Large ? 2 : 1;
  const int r0 = spec.location.row;
  const int c0 = spec.location.col;
  if (spec.kind != JointKind::AxialCompress) require_fit(grid.contains(spec.location), spec);

  std::vector<Address> cells;
  switch (spec.kind) {
    case JointKind::BendUnilateral: {
      // One side only: half the circumference starting at the anchor column.
      const int band = spec.band_width * scale;
      require_fit(r0 + band <= rows && c0 + cols / 2 <= cols, spec);
      for (int r = r0; r < r0 + band; ++r) {
        for (int c = c0; c < c0 + cols / 2; ++c) cells.push_back({r, c});
      }
      break;
    }
    case JointKind::HingeBilateral: {
      const int band = spec.band_width * scale;
      require_fit(r0 + band <= rows, spec);
      for (int r = r0; r < r0 + band; ++r) {
        for (int c = 0; c < cols; ++c) cells.push_back({r, c});
      }
      break;
    }
    case JointKind::Twist: {
      // Diagonals evenly spaced around the circumference, each row shifted by the stagger.
      const int diagonals = 2 * scale;
      require_fit(spec.band_width * diagonals <= cols, spec);
      for (int r = 0; r < rows; ++r) {
        for (int k = 0; k < diagonals; ++k) {
          const int base = c0 + spec.stagger * (r - r0) + k * cols / diagonals;
          for (int w = 0; w < spec.band_width; ++w) {
            cells.push_back({r, ((base + w) % cols + cols) % cols});
          }
        }
      }
      break;
    }
    case JointKind::Shear: {
      const int band = spec.band_width * scale;
      for (int r = r0; r < rows; ++r) {
        const int start = c0 + spec.stagger * (r - r0);
        require_fit(start >= 0 && start + band <= cols, spec);
        for (int c = start; c < start + band; ++c) cells.push_back({r, c});
      }
      break;
    }
    case JointKind::AxialCompress: {
      const int n = spec.rows_activated;
      if (n < 0 || n > rows) throw ValidationError("rows_activated must lie in [0, N_z]");
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < cols; ++c) cells.push_back({r, c});
      }
      break;
    }
  }
  std::vector<Address> live;
  for (const Address& a : cells) {
    if (!grid.at(a).trimmed()) live.push_back(a);
  }
  ActivationPattern p(std::move(live), to_string(spec.kind) + "_" + to_string(spec.magnitude));
  p.joint = spec;
  return p;
}

std::vector<JointPreset> joint_presets(const VoxelGrid& grid) {
  if (grid.rows() < 4 || grid.cols() < 8) {
    throw ValidationError("joint presets need at least 4 rows and 8 columns");
  }
  const int mid = grid.rows() / 2 - 1;
  auto spec = [](JointKind k, Address at, int band, JointSize m) {
    JointSpec s;
    s.kind = k;
    s.location = at;
    s.band_width = band;
    s.magnitude = m;
    return s;
  };
  std::vector<JointPreset> out;
  out.push_back({"bend_small", spec(JointKind::BendUnilateral, {mid, 0}, 1, JointSize::Small)});
  out.push_back({"bend_large", spec(JointKind::BendUnilateral, {mid, 0}, 1, JointSize::Large)});
  out.push_back({"hinge_small", spec(JointKind::HingeBilateral, {mid, 0}, 1, JointSize::Small)});
  out.push_back({"hinge_large", spec(JointKind::HingeBilateral, {mid, 0}, 1, JointSize::Large)});
  out.push_back({"twist", spec(JointKind::Twist, {0, 0}, 2, JointSize::Large)});
  out.push_back({"shear", spec(JointKind::Shear, {0, grid.cols() / 2 - 2}, 2, JointSize::Small)});
  for (auto& p : out) p.spec.stagger = 1;
  return out;
}

JointReport evaluate_pattern(const VoxelGrid& grid, const ActivationPattern& pattern,
                             const MechanicsConfig& cfg) {
  JointReport r;
  r.before = stiffness_report(grid, ActivationPattern{}, cfg);
  r.after = pattern.empty() ? r.before : stiffness_report(grid, pattern, cfg);
  double best = -1.0;
  for (Mode m : kAllModes) {
    const auto i = static_cast<std::size_t>(m);
    r.relative_drop[i] = 1.0 - r.after.get(m) / r.before.get(m);
    if (r.relative_drop[i] > best) {
      best = r.relative_drop[i];
      r.dominant = m;
    }
  }
  r.rotational_stiffness = r.after.bending;
  return r;
}

double localization_metric(const VoxelGrid& grid, const ActivationPattern& pattern, Mode mode,
                           const MechanicsConfig& cfg) {
  if (pattern.empty()) throw ValidationError("localization needs a nonempty pattern");
  const LatticeModel model = assemble_global(grid, pattern, cfg);
  const ModeSolution sol = solve_mode(model.bounded, mode);
  std::set<Address> zone(pattern.addresses.begin(), pattern.addresses.end());
  for (const Address& a : pattern.addresses) {
    for (const Address& n : grid.edge_neighbors(a)) zone.insert(n);
  }
  double inside = 0.0, total = 0.0;
  for (const auto& [a, e] : voxel_energy(model, sol)) {
    total += e;
    if (zone.count(a)) inside += e;
  }
  return total > 0.0 ? inside / total : 0.0;
}

double predict_compression(const DesignParams& p, int rows_activated) {
  if (rows_activated < 0 || rows_activated > p.N_z) {
    throw ValidationError("rows_activated must lie in [0, N_z]");
  }
  return std::numbers::sqrt3 / 2.0 * p.S_L * rows_activated / band_height(p);
}

ActivationPattern modulation_set(const VoxelGrid& grid, const std::string& name) {
  static const std::array<int, 6> sizes{0, 2, 3, 4, 6, 12};
  for (std::size_t i = 0; i < kModulationSets.size(); ++i) {
    if (name != kModulationSets[i]) continue;
    auto order = by_distance_from_centre(grid);
    const auto n = static_cast<std::size_t>(sizes[i]);
    if (order.size() < n) throw ValidationError("grid too small for activation set " + name);
    order.resize(n);
    return ActivationPattern(std::move(order), name);
  }
  throw ValidationError("unknown activation set '" + name + "'");
}

ActivationPattern two_pattern(const VoxelGrid& grid, bool aligned) {
  for (const Address& a : by_distance_from_centre(grid)) {
    if (VoxelGrid::points_up(a)) continue;
    for (const Address& n : grid.edge_neighbors(a)) {
      if (grid.at(n).trimmed()) continue;
      const bool in_row = n.row == a.row;
      if (in_row == aligned) {
        return ActivationPattern({a, n}, aligned ? "Two_aligned" : "Two_orthogonal");
      }
    }
  }
  throw ValidationError("grid has no edge-adjacent pair for the Two pattern");
}

}  // namespace vsl
