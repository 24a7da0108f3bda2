#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vsl/errors.hpp"
#include "vsl/mechanics.hpp"
#include "vsl/voxel_state.hpp"

using namespace vsl;

namespace {

constexpr Phase kPhases[] = {Phase::Solid, Phase::Melting, Phase::Melted, Phase::Cooling};

VoxelRecord fresh(Address a = {1, 1}) {
  VoxelRecord v;
  v.address = a;
  return v;
}

}  // namespace

TEST_CASE("phase cycle is the only legal path") {
  int legal = 0;
  for (Phase a : kPhases) {
    for (Phase b : kPhases) legal += transition_allowed(a, b) ? 1 : 0;
  }
  CHECK(legal == 4);

  VoxelRecord v = fresh();
  v = set_phase(v, Phase::Melting);
  v = set_phase(v, Phase::Melted);
  CHECK(v.phase_fraction == 1.0);
  v = set_phase(v, Phase::Cooling);
  v = set_phase(v, Phase::Solid);
  CHECK(v.phase_fraction == 0.0);
  CHECK_THROWS_WITH_AS(set_phase(v, Phase::Melted), doctest::Contains("not allowed"), ValidationError);
}

TEST_CASE("trimmed is terminal") {
  CHECK_FALSE(transition_allowed(Health::Trimmed, Health::Healthy));
  CHECK_FALSE(transition_allowed(Health::Trimmed, Health::Fractured));
  VoxelRecord v = fresh();
  v.health = Health::Trimmed;
  CHECK_THROWS_AS(set_phase(v, Phase::Melting), ValidationError);
  CHECK_THROWS_AS(apply_overload(v, 1e9, FailureEnvelope{}), ValidationError);
}

TEST_CASE("overload fractures only above the limit and only when solid") {
  const VoxelGrid g = build_grid(DesignParams::reference());
  const FailureEnvelope env = voxel_envelope(g, {1, 1});
  VoxelRecord v = fresh();
  CHECK(apply_overload(v, env.limit(), env).health == Health::Healthy);
  CHECK(apply_overload(v, env.limit() * 1.01, env).health == Health::Fractured);
  v.phase = Phase::Melted;
  CHECK_THROWS_WITH_AS(apply_overload(v, env.limit() * 2, env), doctest::Contains("cannot fracture"),
                       ValidationError);
}

TEST_CASE("geometry override changes the envelope") {
  VoxelGrid g = build_grid(DesignParams::reference());
  const double base = voxel_envelope(g, {0, 0}).limit();
  g.at({0, 0}).geometry_override = GeometryOverride{0.5, g.params().alpha};
  CHECK(voxel_envelope(g, {0, 0}).limit() < base);
}

TEST_CASE("fracture then thermal reset restores the stiffness") {
  const VoxelGrid healthy = build_grid(DesignParams::reference());
  VoxelGrid g = healthy;
  const Address a{2, 5};
  const FailureEnvelope env = voxel_envelope(g, a);
  g.at(a) = apply_overload(g.at(a), env.limit() * 1.5, env);
  REQUIRE(g.at(a).health == Health::Fractured);
  const StiffnessReport before = stiffness_report(healthy, {});
  const StiffnessReport broken = stiffness_report(g, {});
  CHECK(broken.get(Mode::Axial) < before.get(Mode::Axial));

  const TransientTrace tr = reset_cycle_trace(ThermalParams{}, HeaterParams{}, g.params().S_0);
  const ResetResult r = thermal_reset(g.at(a), tr);
  CHECK(r.cycle_completed);
  CHECK(r.diagnostic.empty());
  g.at(a) = r.voxel;
  CHECK(g.at(a).health == Health::Healthy);
  const StiffnessReport after = stiffness_report(g, {});
  for (Mode m : kAllModes) {
    CHECK(std::abs(after.get(m) - before.get(m)) / before.get(m) <= 1e-9);
  }
}

TEST_CASE("partial melt does not reset") {
  VoxelRecord v = fresh();
  v.health = Health::Fractured;
  const ThermalParams t;
  const auto tr = simulate_transient(t, HeaterParams{}, 18.0, DutySchedule{{0.0, 20.0}, {1.0, 0.0}},
                                     0.05, 200.0);
  const ResetResult r = thermal_reset(v, tr);
  CHECK_FALSE(r.cycle_completed);
  CHECK(r.voxel.health == Health::Fractured);
  CHECK(r.diagnostic.find("incomplete") != std::string::npos);
}

TEST_CASE("trim keeps survivors untouched") {
  VoxelGrid g = build_grid(DesignParams::reference());
  g.at({3, 3}).temperature = 41.0;
  const TrimResult t = trim(g, {{1, 4}, {1, 5}, {2, 4}, {2, 5}});
  CHECK(t.grid.active_count() == 76);
  CHECK(t.components.size() == 1);
  CHECK(t.warnings.empty());
  CHECK(t.grid.at({3, 3}).temperature == 41.0);
  for (const auto& v : t.grid.cells()) CHECK(v.address == g.at(v.address).address);
  CHECK_THROWS_AS(trim(g, {{4, 0}}), ValidationError);
}

TEST_CASE("trimming a full row warns about disconnection") {
  const VoxelGrid g = build_grid(DesignParams::reference());
  std::vector<Address> row;
  for (int c = 0; c < g.cols(); ++c) row.push_back({1, c});
  const TrimResult t = trim(g, row);
  REQUIRE(t.components.size() == 2);
  CHECK(t.components[0].size() == 20);
  CHECK(t.components[1].size() == 40);
  REQUIRE(t.warnings.size() == 1);
  CHECK(t.warnings[0].find("2 components") != std::string::npos);
}

TEST_CASE("the sheet is open at the seam") {
  const VoxelGrid g = build_grid(DesignParams::reference());
  std::vector<Address> col;
  for (int r = 0; r < g.rows(); ++r) col.push_back({r, 7});
  const TrimResult t = trim(g, col);
  REQUIRE(t.components.size() == 2);
  CHECK(t.components[0].size() == 28);
  CHECK(t.components[1].size() == 48);
  for (int r = 0; r < g.rows(); ++r) {
    const auto nb = g.edge_neighbors({r, 0});
    CHECK(std::find(nb.begin(), nb.end(), Address{r, g.cols() - 1}) == nb.end());
  }
}
