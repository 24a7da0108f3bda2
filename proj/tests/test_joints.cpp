#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vsl/errors.hpp"
#include "vsl/joints.hpp"

using namespace vsl;

namespace {

const VoxelGrid& ref_grid() {
  static const VoxelGrid g = build_grid(DesignParams::reference());
  return g;
}

JointSpec make(JointKind k, Address at, int band, JointSize m) {
  JointSpec s;
  s.kind = k;
  s.location = at;
  s.band_width = band;
  s.magnitude = m;
  return s;
}

bool includes(const ActivationPattern& big, const ActivationPattern& small) {
  return std::includes(big.addresses.begin(), big.addresses.end(), small.addresses.begin(),
                       small.addresses.end());
}

}  // namespace

TEST_CASE("six presets with distinct labels") {
  const auto presets = joint_presets(ref_grid());
  REQUIRE(presets.size() == 6);
  for (const auto& p : presets) {
    const auto a = synthesize_pattern(p.spec, ref_grid());
    const auto b = synthesize_pattern(p.spec, ref_grid());
    CHECK(!a.empty());
    CHECK(a.addresses == b.addresses);
    CHECK(std::is_sorted(a.addresses.begin(), a.addresses.end()));
  }
  CHECK_THROWS_AS(joint_presets(VoxelGrid(DesignParams::reference(), 2, 20)), ValidationError);
}

TEST_CASE("large patterns contain the small ones") {
  for (JointKind k : {JointKind::BendUnilateral, JointKind::HingeBilateral, JointKind::Twist,
                      JointKind::Shear}) {
    const auto s = synthesize_pattern(make(k, {1, 4}, 1, JointSize::Small), ref_grid());
    const auto l = synthesize_pattern(make(k, {1, 4}, 1, JointSize::Large), ref_grid());
    CHECK_MESSAGE(includes(l, s), to_string(k));
    CHECK(l.size() > s.size());
  }
}

TEST_CASE("hinge is a full-circumference band and bend covers one side") {
  const auto h = synthesize_pattern(make(JointKind::HingeBilateral, {1, 0}, 1, JointSize::Small),
                                    ref_grid());
  CHECK(h.size() == 20);
  for (const auto& a : h.addresses) CHECK(a.row == 1);
  const auto b = synthesize_pattern(make(JointKind::BendUnilateral, {1, 0}, 1, JointSize::Small),
                                    ref_grid());
  CHECK(b.size() == 10);
  for (const auto& a : b.addresses) CHECK(a.col < 10);
}

TEST_CASE("twist rows are staggered by a fixed step") {
  for (int stagger : {1, 2}) {
    JointSpec s = make(JointKind::Twist, {0, 0}, 2, JointSize::Large);
    s.stagger = stagger;
    const auto p = synthesize_pattern(s, ref_grid());
    const int cols = ref_grid().cols();
    for (const auto& a : p.addresses) {
      if (a.row == 0) continue;
      const Address below{a.row - 1, ((a.col - stagger) % cols + cols) % cols};
      CHECK(p.contains(below));
    }
    std::array<int, 4> per_row{};
    for (const auto& a : p.addresses) ++per_row[static_cast<std::size_t>(a.row)];
    for (int n : per_row) CHECK(n == per_row[0]);
  }
}

TEST_CASE("axial compression takes whole rows") {
  JointSpec s = make(JointKind::AxialCompress, {0, 0}, 1, JointSize::Small);
  s.rows_activated = 4;
  CHECK(synthesize_pattern(s, ref_grid()).size() == 80);
  s.rows_activated = 2;
  CHECK(synthesize_pattern(s, ref_grid()).size() == 40);
}

TEST_CASE("bands that leave the grid are rejected") {
  CHECK_THROWS_AS(
      synthesize_pattern(make(JointKind::HingeBilateral, {3, 0}, 3, JointSize::Large), ref_grid()),
      ValidationError);
  CHECK_THROWS_AS(
      synthesize_pattern(make(JointKind::Shear, {0, 19}, 2, JointSize::Small), ref_grid()),
      ValidationError);
  CHECK_THROWS_AS(
      synthesize_pattern(make(JointKind::HingeBilateral, {1, 0}, 0, JointSize::Small), ref_grid()),
      ValidationError);
}

TEST_CASE("empty pattern leaves the stiffness unchanged") {
  const JointReport r = evaluate_pattern(ref_grid(), {});
  for (Mode m : kAllModes) {
    CHECK(r.before.get(m) == r.after.get(m));
    CHECK(r.relative_drop[static_cast<std::size_t>(m)] == 0.0);
  }
}

TEST_CASE("larger hinge is softer") {
  const auto presets = joint_presets(ref_grid());
  double small = 0.0;
  double large = 0.0;
  for (const auto& p : presets) {
    const auto r = evaluate_pattern(ref_grid(), synthesize_pattern(p.spec, ref_grid()));
    for (Mode m : kAllModes) {
      const double drop = r.relative_drop[static_cast<std::size_t>(m)];
      CHECK(drop >= 0.0);
      CHECK(drop < 1.0);
      CHECK(r.relative_drop[static_cast<std::size_t>(r.dominant)] >= drop);
    }
    if (p.label == "hinge_small") small = r.rotational_stiffness;
    if (p.label == "hinge_large") large = r.rotational_stiffness;
  }
  CHECK(large > 0.0);
  CHECK(large < small);
}

TEST_CASE("localization metric") {
  const VoxelGrid& g = ref_grid();
  CHECK(localization_metric(g, ActivationPattern(g.active_addresses()), Mode::Axial) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(localization_metric(g, {}, Mode::Axial), ValidationError);
  const auto hinge =
      synthesize_pattern(make(JointKind::HingeBilateral, {1, 0}, 1, JointSize::Small), g);
  const double f = localization_metric(g, hinge, Mode::Bending);
  CHECK(f >= 0.8);
  CHECK(f <= 1.0);
}

TEST_CASE("point reflection of the sheet preserves axial, shear and torsion") {
  // The strip of alternating triangles maps onto itself under a half turn in its plane.
  const VoxelGrid& g = ref_grid();
  const ActivationPattern a({{0, 3}, {1, 3}, {1, 4}, {2, 9}});
  ActivationPattern b;
  for (const auto& x : a.addresses) b.addresses.push_back({g.rows() - 1 - x.row, g.cols() - 1 - x.col});
  b.normalize();
  for (Mode m : {Mode::Axial, Mode::Shear, Mode::Torsion}) {
    CHECK(mode_stiffness(g, b, m) == doctest::Approx(mode_stiffness(g, a, m)).epsilon(1e-9));
  }
}

TEST_CASE("predicted compression") {
  DesignParams p = DesignParams::reference();
  p.S_L = 6.3;
  CHECK(predict_compression(p, 4) == doctest::Approx(21.824 / 68.354).epsilon(1e-4));
  CHECK(predict_compression(p, 0) == 0.0);
  CHECK(predict_compression(p, 2) == doctest::Approx(0.5 * predict_compression(p, 4)));
  CHECK_THROWS_AS(predict_compression(p, 5), ValidationError);
  const DesignParams r = DesignParams::reference();
  for (int k = 0; k <= r.N_z; ++k) {
    CHECK(predict_compression(r, k) <= max_stroke(r) / band_height(r) + 1e-12);
  }
}

TEST_CASE("modulation sets are nested") {
  const VoxelGrid& g = ref_grid();
  ActivationPattern prev;
  const std::array<std::size_t, 6> sizes{0, 2, 3, 4, 6, 12};
  for (std::size_t i = 0; i < kModulationSets.size(); ++i) {
    const auto s = modulation_set(g, kModulationSets[i]);
    CHECK(s.size() == sizes[i]);
    CHECK(includes(s, prev));
    prev = s;
  }
  CHECK_THROWS_AS(modulation_set(g, "Seven"), ValidationError);
}

TEST_CASE("two-voxel patterns are edge-adjacent") {
  const VoxelGrid& g = ref_grid();
  for (bool aligned : {true, false}) {
    const auto p = two_pattern(g, aligned);
    REQUIRE(p.size() == 2);
    const auto nb = g.edge_neighbors(p.addresses[0]);
    CHECK(std::find(nb.begin(), nb.end(), p.addresses[1]) != nb.end());
    CHECK((p.addresses[0].row == p.addresses[1].row) == aligned);
  }
}
