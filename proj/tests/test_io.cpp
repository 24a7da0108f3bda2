#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "vsl/errors.hpp"
#include "vsl/io.hpp"

using namespace vsl;

namespace {

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

TEST_CASE("config hash is FNV-1a over the compact dump") {
  const json cfg = {{"command", "design"}, {"seed", 7}, {"options", {{"steps", 5}}}};
  CHECK(config_hash(cfg) == fnv1a(cfg.dump()));
  CHECK(config_hash(json::object()) == fnv1a("{}"));
  const json s = stamp({{"x", 1}}, "abc");
  CHECK(s["version"] == kToolkitVersion);
  CHECK(s["config_hash"] == "abc");
}

TEST_CASE("addresses in both spellings") {
  CHECK(address_from_json(json::parse("[2, 7]")) == Address{2, 7});
  CHECK(address_from_json(json::parse(R"({"row": 2, "col": 7})")) == Address{2, 7});
  CHECK(address_from_key(address_key({3, 19})) == Address{3, 19});
  CHECK_THROWS_AS(address_from_json(json::parse("[2]")), ValidationError);
  CHECK_THROWS_AS(address_from_json(json::parse(R"({"row": 2})")), ValidationError);
  CHECK_THROWS_AS(address_from_key("2;7"), ValidationError);
}

TEST_CASE("design params are strict") {
  const DesignParams p = DesignParams::reference();
  const json j = to_json(p);
  CHECK(j.size() == 11);
  const DesignParams q = design_params_from_json(j);
  CHECK(to_json(q) == j);

  json missing = j;
  missing.erase("t_f");
  CHECK_THROWS_WITH_AS(design_params_from_json(missing), doctest::Contains("t_f"), ValidationError);
  json extra = j;
  extra["colour"] = "red";
  CHECK_THROWS_WITH_AS(design_params_from_json(extra), doctest::Contains("colour"), ValidationError);
  json wrong = j;
  wrong["N_z"] = "four";
  CHECK_THROWS_AS(design_params_from_json(wrong), ValidationError);
  json invalid = j;
  invalid["S_L"] = 30.0;
  CHECK_THROWS_AS(design_params_from_json(invalid), ValidationError);
}

TEST_CASE("config structs merge partial objects over defaults") {
  const ThermalParams t = thermal_params_from_json(json::parse(R"({"G_th": 0.03})"));
  CHECK(t.G_th == 0.03);
  CHECK(t.C_th == ThermalParams{}.C_th);
  const HeaterParams h = heater_params_from_json(json::parse(R"({"V": 15})"));
  CHECK(h.V == 15.0);
  const MechanicsConfig m = mechanics_config_from_json(json::parse(R"({"membrane": false})"));
  CHECK_FALSE(m.membrane);
  CHECK(thermal_params_from_json(to_json(ThermalParams{})).T_m == ThermalParams{}.T_m);
  CHECK_THROWS_AS(heater_params_from_json(json::parse(R"({"volts": 15})")), ValidationError);
  CHECK_THROWS_AS(thermal_params_from_json(json::parse(R"({"G_th": -1})")), ValidationError);
}

TEST_CASE("grid round trip keeps per-voxel state") {
  VoxelGrid g = build_grid(DesignParams::reference());
  g.at({1, 2}).phase = Phase::Melted;
  g.at({1, 2}).phase_fraction = 1.0;
  g.at({0, 5}).health = Health::Trimmed;
  g.at({3, 9}).health = Health::Fractured;
  g.at({2, 2}).temperature = 48.5;
  g.at({2, 3}).geometry_override = GeometryOverride{0.7, 0.15};
  const VoxelGrid r = grid_from_json(json::parse(to_json(g).dump()));
  REQUIRE(r.cells().size() == g.cells().size());
  CHECK(to_json(r) == to_json(g));
  CHECK(r.at({1, 2}).phase == Phase::Melted);
  CHECK(r.at({0, 5}).trimmed());
  CHECK(r.at({2, 3}).geometry_override->t_f == 0.7);
}

TEST_CASE("pattern round trip with and without a joint spec") {
  ActivationPattern p({{2, 3}, {0, 1}, {2, 3}}, "mine");
  CHECK(p.size() == 2);
  const ActivationPattern q = pattern_from_json(to_json(p));
  CHECK(q.addresses == p.addresses);
  CHECK(q.label == "mine");
  CHECK_FALSE(q.joint.has_value());

  const VoxelGrid g = build_grid(DesignParams::reference());
  for (const auto& preset : joint_presets(g)) {
    ActivationPattern s = synthesize_pattern(preset.spec, g);
    const json j = to_json(s);
    const ActivationPattern back = pattern_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(to_json(joint_spec_from_json(to_json(preset.spec))) == to_json(preset.spec));
  }
  CHECK_THROWS_AS(pattern_from_json(json::parse(R"({"addresses": [[0,0]], "bogus": 1})")),
                  ValidationError);
  // Stamped output files are accepted back as input.
  CHECK_NOTHROW(pattern_from_json(stamp(to_json(p), "0123")));
}

TEST_CASE("calibration store round trip") {
  CalibrationBatch b;
  CalibrationRecord r;
  r.address = {1, 4};
  r.R_h = 27.3;
  r.R_tot = 30.3;
  r.tau_th = 44.1;
  r.map = InverseDutyMap({{0.0, 25.0}, {0.2, 40.1}, {0.4, 55.3}});
  b.records.push_back(r);
  b.faults.push_back({{2, 2}, "open circuit"});
  const CalibrationBatch c = calibration_from_json(json::parse(to_json(b).dump()));
  REQUIRE(c.records.size() == 1);
  CHECK(c.records[0].map.points() == r.map.points());
  CHECK(c.records[0].tau_th == r.tau_th);
  REQUIRE(c.faults.size() == 1);
  CHECK(c.faults[0].reason == "open circuit");
  CHECK(to_json(c) == to_json(b));
}

TEST_CASE("budget and job parsing") {
  CHECK(budget_from_json(9.0).peak == 9.0);
  const PowerBudget b = budget_from_json(
      json::parse(R"({"peak": 12, "branches": [{"addresses": [[0,0],[0,1]], "limit": 5}]})"));
  REQUIRE(b.branches.size() == 1);
  CHECK(b.branches[0].addresses.size() == 2);
  CHECK(to_json(budget_from_json(to_json(b))) == to_json(b));
  CHECK_THROWS_AS(budget_from_json(-1.0), ValidationError);
  CHECK_THROWS_AS(budget_from_json("nine"), ValidationError);

  const HeatJob j = heat_job_from_json(json::parse(R"({"address": [0, 2], "power": 4.32, "duration": 31.25})"));
  CHECK(j.duty == 1.0);
  CHECK(j.energy() == doctest::Approx(135.0));
  CHECK_THROWS_AS(heat_job_from_json(json::parse(R"({"address": [0, 2], "power": 4.32})")),
                  ValidationError);
}

TEST_CASE("schedule exports") {
  const std::vector<HeatJob> jobs{
      heat_job_from_json(json::parse(R"({"address": [0,0], "power": 4.32, "duration": 31.25})")),
      heat_job_from_json(json::parse(R"({"address": [0,1], "power": 4.32, "duration": 31.25})")),
      heat_job_from_json(json::parse(R"({"address": [0,2], "power": 4.32, "duration": 31.25})"))};
  const Schedule s = plan_schedule(jobs, {9.0, {}});
  const auto tl = power_timeline(s);
  REQUIRE(!tl.empty());
  CHECK(tl.front().first == 0.0);
  CHECK(tl.front().second == doctest::Approx(8.64));
  CHECK(tl.back().second == doctest::Approx(0.0));
  const json j = to_json(s);
  CHECK(j["makespan"] == doctest::Approx(62.5));
  CHECK(j["voxels"].size() == 3);

  std::istringstream csv(schedule_csv(s));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,voxel,duty,cumulative_power");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("stiffness csv has one row per mode") {
  const StiffnessReport r = stiffness_report(build_grid(DesignParams::reference()), {});
  const std::string csv = stiffness_csv(r);
  CHECK(csv.rfind("mode,value,unit,normalized\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  const json j = to_json(r);
  CHECK(j["modes"]["axial"]["unit"] == "N/mm");
}

TEST_CASE("file errors") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/dir/x.json"), IoError);
  const auto dir = std::filesystem::temp_directory_path() / "vsl_io_test";
  std::filesystem::create_directories(dir);
  const std::string bad = (dir / "bad.json").string();
  write_text_file(bad, "{not json");
  CHECK_THROWS_AS(read_json_file(bad), ValidationError);
  const std::string good = (dir / "good.json").string();
  write_text_file(good, R"({"a": 1})");
  CHECK(read_json_file(good)["a"] == 1);
  CHECK_THROWS_AS(write_text_file("/nonexistent/dir/y.json", "x"), IoError);
  std::filesystem::remove_all(dir);
}
