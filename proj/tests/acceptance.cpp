// Acceptance gates: one PASS/FAIL line per criterion. Exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vsl/calibration.hpp"
#include "vsl/design.hpp"
#include "vsl/errors.hpp"
#include "vsl/joints.hpp"
#include "vsl/mechanics.hpp"
#include "vsl/scheduler.hpp"
#include "vsl/thermal.hpp"
#include "vsl/voxel_state.hpp"

using namespace vsl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void gate(const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool on_time = limit_s <= 0.0 || secs < limit_s;
  const bool pass = o.pass && on_time;
  if (!pass) ++failures;
  std::string timing = limit_s > 0.0 ? fmt("%.2f s < %.0f s", secs, limit_s) : fmt("%.2f s", secs);
  if (!on_time) timing += " EXCEEDED";
  std::printf("%s  %s: %s [%s]\n", pass ? "PASS" : "FAIL", name, o.detail.c_str(), timing.c_str());
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome kinematics() {
  std::mt19937_64 rng(7001);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double R = 10.0 + 40.0 * U(rng);
    const int m = 1 + static_cast<int>(3 * U(rng));
    const int N_theta = 3 + static_cast<int>(12 * U(rng));
    const int N_z = 1 + static_cast<int>(6 * U(rng));
    const double C = 0.2 + 0.75 * U(rng);
    const double h_0 = 3.0 * U(rng);
    const DesignParams p =
        DesignParams::with_resolution(R, m, N_theta, N_z, C, h_0, 2.0, 0.5, 1.0 / 6.0);
    const double S_0 = 2.0 * std::numbers::pi * R / N_theta;
    const double H = std::sqrt(3.0) / 2.0 * S_0 * N_z + (N_z - 1) * h_0;
    worst = std::max({worst, rel(band_height(p), H),
                      rel(max_stroke(p), std::sqrt(3.0) / 2.0 * C * S_0 * N_z),
                      rel(compression_ratio(p).value, C),
                      rel(sheet_area(p), 2.0 * std::numbers::pi * m * R * H)});
  }
  return {worst <= 1e-9, fmt("worst relative error %.2e over 20 designs (tol 1e-9)", worst)};
}

Outcome mechanics_oracle() {
  const DesignParams p = DesignParams::reference();
  MechanicsConfig cfg;
  cfg.membrane = false;
  const double L = p.S_0;
  const double w = p.alpha * p.S_0;
  const double EA = cfg.E_metal * w * p.t_f;
  const double EI = cfg.E_metal * w * std::pow(p.t_f, 3) / 12.0;
  const VoxelGrid one(p, 1, 1);
  const double e_ax = rel(mode_stiffness(one, {}, Mode::Axial, cfg), 1.5 * EA / L + 6.0 * EI / std::pow(L, 3));
  const double e_sh = rel(mode_stiffness(one, {}, Mode::Shear, cfg), 0.5 * EA / L + 18.0 * EI / std::pow(L, 3));

  const VoxelGrid g = build_grid(p);
  const ActivationPattern pat({{1, 3}, {1, 4}, {2, 9}});
  MechanicsConfig a;
  MechanicsConfig b = a;
  b.E_metal *= 2.5;
  b.E_elastomer *= 2.5;
  double lin = 0.0;
  for (Mode m : kAllModes) {
    lin = std::max(lin, rel(mode_stiffness(g, pat, m, b), 2.5 * mode_stiffness(g, pat, m, a)));
  }
  const bool ok = e_ax <= 1e-6 && e_sh <= 1e-6 && lin <= 1e-9;
  return {ok, fmt("triangle axial %.1e shear %.1e (tol 1e-6); E-linearity %.1e (tol 1e-9)", e_ax,
                  e_sh, lin)};
}

Outcome scaling_laws() {
  const DesignParams base = DesignParams::reference();
  auto fit = [&](SweepParameter sp, double lo, double hi, int steps, Mode m, bool area) {
    const SweepResult r = design_sweep(base, sp, sweep_values(sp, lo, hi, steps));
    if (!r.fit) throw ValidationError(r.fit_error);
    return (area ? *r.fit_area : *r.fit)[static_cast<std::size_t>(m)].exponent;
  };
  const double e_tf = fit(SweepParameter::TF, 0.5, 1.8, 7, Mode::Bending, false);
  const double e_ts = fit(SweepParameter::TSheet, 1.2, 3.6, 7, Mode::Axial, false);
  const double e_nt = fit(SweepParameter::NTheta, 8, 16, 5, Mode::Axial, true);

  // Q_melt follows the voxel area, R_h its edge.
  const ThermalParams t;
  HeaterParams h;
  h.R_ser = 0.0;
  ThermalParams t36 = t;
  t36.Q_melt *= 4.0;
  const double ratio = melt_time(t36, h, 36.0).closed_form / melt_time(t, h, 18.0).closed_form;
  const bool ok = e_tf >= 2.0 && e_tf <= 3.0 && e_ts >= 1.0 && e_ts <= 1.3 &&
                  std::abs(e_nt - 2.0) <= 0.3 && rel(ratio, 8.0) <= 1e-12;
  return {ok, fmt("t_f %.3f in [2,3]; t_sheet %.3f in [1,1.3]; N_theta %.3f in 2+-0.3; "
                  "tau_melt(2 S_0)/tau_melt(S_0) = %.12g (expect 8)",
                  e_tf, e_ts, e_nt, ratio)};
}

Outcome modulation() {
  const VoxelGrid g = build_grid(DesignParams::reference());
  std::vector<StiffnessReport> r;
  for (const char* name : kModulationSets) r.push_back(stiffness_report(g, modulation_set(g, name)));
  bool ordered = true;
  for (std::size_t i = 1; i < r.size(); ++i) {
    for (Mode m : kAllModes) ordered = ordered && r[i].get(m) < r[i - 1].get(m);
  }
  const double ratio = mode_stiffness(g, {}, Mode::Axial) /
                       mode_stiffness(g, ActivationPattern(g.active_addresses()), Mode::Axial);
  return {ordered && ratio >= 50.0,
          fmt("Zero..Twelve strictly decreasing in all modes: %s; solid/melted axial %.1fx (>= 50)",
              ordered ? "yes" : "no", ratio)};
}

Outcome anisotropy() {
  const VoxelGrid g = build_grid(DesignParams::reference());
  const ActivationPattern al = two_pattern(g, true);
  const ActivationPattern orth = two_pattern(g, false);
  const double sa = mode_stiffness(g, al, Mode::Shear);
  const double so = mode_stiffness(g, orth, Mode::Shear);
  const double ba = mode_stiffness(g, al, Mode::Bending);
  const double bo = mode_stiffness(g, orth, Mode::Bending);
  return {sa > so && ba > bo,
          fmt("shear aligned %.1f vs orthogonal %.1f N/mm; bending %.3f vs %.3f N*mm/deg", sa, so,
              ba, bo)};
}

Outcome localization() {
  const VoxelGrid g = build_grid(DesignParams::reference());
  std::string detail;
  bool ok = true;
  double small = 0.0;
  double large = 0.0;
  for (const auto& p : joint_presets(g)) {
    const ActivationPattern pat = synthesize_pattern(p.spec, g);
    const JointReport r = evaluate_pattern(g, pat);
    const double f = localization_metric(g, pat, r.dominant);
    ok = ok && f >= 0.8;
    detail += fmt("%s %.3f, ", p.label.c_str(), f);
    if (p.label == "hinge_small") small = r.rotational_stiffness;
    if (p.label == "hinge_large") large = r.rotational_stiffness;
  }
  ok = ok && large < small;
  detail += fmt("(>= 0.8 each); hinge large %.4g < small %.4g N*mm/deg", large, small);
  return {ok, detail};
}

Outcome compression() {
  const DesignParams p = DesignParams::compression_reference();
  const double full = predict_compression(p, p.N_z);
  bool bounded = true;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const int N_z = 1 + static_cast<int>(6 * U(rng));
    const DesignParams q = DesignParams::with_resolution(
        10.0 + 40.0 * U(rng), 1 + static_cast<int>(3 * U(rng)), 3 + static_cast<int>(12 * U(rng)),
        N_z, 0.1 + 0.85 * U(rng), 3.0 * U(rng), 2.0, 0.5, 1.0 / 6.0);
    for (int k = 0; k <= N_z; ++k) {
      bounded = bounded && predict_compression(q, k) <= max_stroke(q) / band_height(q) * (1 + 1e-12);
    }
  }
  return {std::abs(full - 0.30) <= 0.03 && bounded,
          fmt("full-row shortening %.4f (0.30 +- 0.03); never above max_stroke/H on 200 designs: %s",
              full, bounded ? "yes" : "no")};
}

Outcome thermal_cycle() {
  const ThermalParams t;
  const HeaterParams h;
  const MeltTime m = melt_time(t, h, 18.0);
  const CoolTime c = cool_time(t);
  const TransientTrace tr = reset_cycle_trace(t, h, 18.0);
  const double audit = energy_audit(tr, t).relative_error();
  const bool ok = std::abs(m.simulated - 30.0) <= 3.0 && std::abs(c.simulated - 45.0) <= 4.5 &&
                  m.simulated + c.simulated <= 75.0 && audit <= 0.01;
  return {ok, fmt("heat %.2f s (30 +- 10%%), cool %.2f s (45 +- 10%%), cycle %.2f s (<= 75), "
                  "audit %.1e (<= 1%%)",
                  m.simulated, c.simulated, m.simulated + c.simulated, audit)};
}

Outcome calibration_loop() {
  const ThermalParams t;
  const HeaterParams h;
  auto noisy = make_plant_population(80, t, h, 18.0, 0.2, 0.5, 2024);
  const CalibrationBatch nb = calibrate_all(noisy);
  double lo = 1e9;
  double hi = -1e9;
  for (const auto& r : nb.records) {
    for (const auto& p : noisy) {
      if (!(p.address == r.address)) continue;
      const double T = p.steady_temperature_at(r.map.duty_for(50.0));
      lo = std::min(lo, T);
      hi = std::max(hi, T);
    }
  }
  const auto clean = make_plant_population(80, t, h, 18.0, 0.2, 0.0, 2024);
  const CalibrationBatch cb = calibrate_all(clean);
  double worst = 0.0;
  for (std::size_t i = 0; i < cb.records.size(); ++i) {
    worst = std::max(worst, rel(cb.records[i].R_h, clean[i].true_heater_resistance()));
  }
  const bool ok = nb.records.size() == 80 && cb.records.size() == 80 && hi - lo <= 2.0 &&
                  worst <= 0.03;
  return {ok, fmt("steady spread at 50 degC %.2f degC (<= 2) over %zu voxels; noiseless R_h "
                  "error %.2e (<= 3%%)",
                  hi - lo, nb.records.size(), worst)};
}

HeatJob job(int i, double P, double d) {
  HeatJob j;
  j.address = {0, i};
  j.power = P;
  j.duration = d;
  return j;
}

Outcome scheduler() {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int violations = 0;
  for (int it = 0; it < 1000; ++it) {
    const int n = 1 + static_cast<int>(U(rng) * 16);
    std::vector<HeatJob> jobs;
    double biggest = 0.0;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      jobs.push_back(job(i, 0.5 + 4.5 * U(rng), 5.0 + 55.0 * U(rng)));
      biggest = std::max(biggest, jobs.back().power);
      total += jobs.back().power;
    }
    const PowerBudget b{biggest + (total - biggest) * U(rng), {}};
    violations += static_cast<int>(validate_schedule(plan_schedule(jobs, b), b).size());
  }

  int parity_miss = 0;
  for (int n = 1; n <= 4; ++n) {
    for (double budget : {4.4, 8.7, 9.0, 13.0, 17.3, 40.0}) {
      std::vector<HeatJob> jobs;
      for (int i = 0; i < n; ++i) jobs.push_back(job(i, 4.32, 31.25));
      const double g = plan_schedule(jobs, {budget, {}}).makespan;
      const double o = brute_force_schedule(jobs, {budget, {}}).makespan;
      if (std::abs(g - o) > 1e-9) ++parity_miss;
    }
  }

  double worst = 0.0;
  std::uniform_real_distribution<double> spread(0.8, 1.2);
  for (int it = 0; it < 500; ++it) {
    const int n = 2 + static_cast<int>(U(rng) * 5);
    std::vector<HeatJob> jobs;
    double biggest = 0.0;
    for (int i = 0; i < n; ++i) {
      jobs.push_back(job(i, 4.32 * spread(rng), 31.25 * spread(rng)));
      biggest = std::max(biggest, jobs.back().power);
    }
    const PowerBudget b{biggest * (1.0 + 2.0 * U(rng)), {}};
    worst = std::max(worst, plan_schedule(jobs, b).makespan / brute_force_schedule(jobs, b).makespan);
  }

  const ThermalParams t;
  const HeaterParams h;
  const auto plants = make_plant_population(8, t, h, 18.0, 0.2, 0.0, 99);
  const CalibrationBatch batch = calibrate_all(plants);
  std::vector<Address> group;
  for (const auto& p : plants) group.push_back(p.address);
  const auto duty = equalize_melt_fronts(group, batch, t, h, 18.0);
  double lo = 1e300;
  double hi = 0.0;
  double sum = 0.0;
  for (const auto& p : plants) {
    const double m = melt_time_at_duty({p.thermal, p.heater, p.S_0}, duty.at(p.address));
    lo = std::min(lo, m);
    hi = std::max(hi, m);
    sum += m;
  }
  const double eq = (hi - lo) / (sum / static_cast<double>(plants.size()));

  const bool ok = violations == 0 && parity_miss == 0 && worst <= 1.5 && eq <= 0.10;
  return {ok, fmt("fuzz violations %d/1000; identical parity misses %d; heterogeneous worst "
                  "greedy/optimal %.3f (<= 1.5); equalized melt spread %.1f%% (<= 10%%)",
                  violations, parity_miss, worst, 100.0 * eq)};
}

Outcome lifecycle() {
  const VoxelGrid healthy = build_grid(DesignParams::reference());
  VoxelGrid g = healthy;
  const Address a{1, 8};
  const FailureEnvelope env = voxel_envelope(g, a);
  g.at(a) = apply_overload(g.at(a), 1.2 * env.limit(), env);
  const bool fractured = g.at(a).health == Health::Fractured;
  const ResetResult r = thermal_reset(g.at(a), reset_cycle_trace({}, {}, g.params().S_0));
  g.at(a) = r.voxel;
  double worst = 0.0;
  for (Mode m : kAllModes) {
    worst = std::max(worst, rel(mode_stiffness(g, {}, m), mode_stiffness(healthy, {}, m)));
  }

  const std::vector<Address> cut{{1, 4}, {1, 5}, {2, 4}, {2, 5}};
  const TrimResult t = trim(healthy, cut);
  bool kept = t.grid.active_count() == 76;
  for (const auto& v : healthy.cells()) {
    if (std::find(cut.begin(), cut.end(), v.address) != cut.end()) continue;
    const VoxelRecord& s = t.grid.at(v.address);
    kept = kept && s.address == v.address && s.health == v.health && s.phase == v.phase;
  }
  const ActivationPattern survivors({{1, 10}, {1, 11}, {2, 12}});
  const JointReport jr = evaluate_pattern(t.grid, survivors);
  kept = kept && jr.after.get(Mode::Axial) < jr.before.get(Mode::Axial);
  return {fractured && r.cycle_completed && worst <= 1e-9 && kept,
          fmt("reset restores stiffness to %.1e (<= 1e-9); trim keeps 76 addresses and evaluates: %s",
              worst, kept ? "yes" : "no")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "vsl_acceptance_determinism";
  fs::remove_all(root);
  const std::string exe = VSLCTL_PATH;
  const std::string data = VSL_TEST_DATA;
  const std::vector<std::string> commands = {
      "design --param t_f --range 0.5 1.8 --steps 5",
      "--format csv design --param N_theta --range 8 16 --steps 5",
      "simulate",
      "--format csv simulate",
      "--seed 11 calibrate",
      "--format csv --seed 11 calibrate --voxels 20",
      "synth --preset twist",
      "--format csv synth --joint hinge_bilateral --size large",
      "schedule --jobs " + data + "/three_voxels.json --budget 9",
      "--format csv schedule --preset hinge_large --budget 15",
  };
  int differing = 0;
  int files = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    for (const char* pass : {"a", "b"}) {
      const fs::path out = root / pass / std::to_string(i);
      const std::string cmd =
          exe + " --out " + out.string() + " " + commands[i] + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) throw IoError("command failed: " + commands[i]);
    }
  }
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path twin = root / "b" / fs::relative(e.path(), root / "a");
    if (!fs::exists(twin) || slurp(e.path()) != slurp(twin)) ++differing;
  }
  fs::remove_all(root);
  return {differing == 0 && files >= static_cast<int>(commands.size()),
          fmt("%zu commands run twice, %d artifacts, %d differ", commands.size(), files, differing)};
}

}  // namespace

int main() {
  gate("Kinematics exactness", 1.0, kinematics);
  gate("Mechanics oracle", 1.0, mechanics_oracle);
  gate("Scaling laws", 60.0, scaling_laws);
  gate("Modulation ordering", 0.0, modulation);
  gate("Anisotropy sign check", 10.0, anisotropy);
  gate("Joint localization", 60.0, localization);
  gate("Compression", 1.0, compression);
  gate("Thermal cycle", 10.0, thermal_cycle);
  gate("Calibration closed loop", 120.0, calibration_loop);
  gate("Scheduler safety and parity", 120.0, scheduler);
  gate("Lifecycle", 10.0, lifecycle);
  gate("Determinism", 0.0, determinism);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures;
}
