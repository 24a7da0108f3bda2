// vslctl: design sweeps, thermal simulation, calibration, joint synthesis, scheduling and
// the HTTP service from one binary. Exit codes: 0 ok, 2 validation, 3 infeasible, 4 I/O.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vsl/errors.hpp"
#include "vsl/io.hpp"
#include "vsl/service.hpp"
#include "vsl/voxel_state.hpp"

using namespace vsl;

namespace {

struct Config {
  DesignParams design = DesignParams::reference();
  MechanicsConfig mechanics;
  ThermalParams thermal;
  HeaterParams heater;

  json effective() const {
    return {{"design", to_json(design)},
            {"mechanics", to_json(mechanics)},
            {"thermal", to_json(thermal)},
            {"heater", to_json(heater)}};
  }
};

Config load_config(const std::string& path) {
  Config c;
  if (path.empty()) return c;
  const json j = read_json_file(path);
  if (!j.is_object()) throw ValidationError(path + ": config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (k == "design") {
      if (v.is_string()) {
        const std::string name = v.get<std::string>();
        if (name == "reference") {
          c.design = DesignParams::reference();
        } else if (name == "compression_reference") {
          c.design = DesignParams::compression_reference();
        } else {
          throw ValidationError("unknown design preset '" + name + "'");
        }
      } else {
        c.design = design_params_from_json(v);
      }
    } else if (k == "mechanics") {
      c.mechanics = mechanics_config_from_json(v);
    } else if (k == "thermal") {
      c.thermal = thermal_params_from_json(v);
    } else if (k == "heater") {
      c.heater = heater_params_from_json(v);
    } else {
      throw ValidationError(path + ": unknown config section '" + k + "'");
    }
  }
  return c;
}

struct Run {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::string format = "json";

  Config cfg;
  std::string hash;

  void prepare(const std::string& command, const json& options) {
    cfg = load_config(config_path);
    hash = config_hash(
        {{"command", command}, {"options", options}, {"config", cfg.effective()}, {"seed", seed}});
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
  }

  bool csv() const { return format == "csv"; }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(out_dir) / name).string();
  }

  void write_json(const std::string& name, const json& doc) const {
    write_text_file(path(name), stamp(doc, hash).dump(2) + "\n");
    std::cout << "wrote " << path(name) << "\n";
  }

  void write_csv(const std::string& name, const std::string& body) const {
    write_text_file(path(name),
                    std::string("# vslctl ") + kToolkitVersion + " config_hash=" + hash + "\n" + body);
    std::cout << "wrote " << path(name) << "\n";
  }
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Infeasible:
    case ErrorKind::Singular: return 3;
    case ErrorKind::Io: return 4;
  }
  return 2;
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::Io: return "io";
  }
  return "validation";
}

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}}.dump()
            << "\n";
  return code;
}

// ---------------------------------------------------------------------------

struct DesignArgs {
  std::string param;
  std::vector<double> range;
  int steps = 8;
  std::vector<double> values;
  std::optional<double> iso_level;
  std::string iso_mode = "bending";
  std::vector<double> iso_t_sheet;
};

void cmd_design(Run& run, const DesignArgs& a) {
  const SweepParameter p = sweep_parameter_from_string(a.param);
  std::vector<double> values = a.values;
  if (values.empty()) {
    if (a.range.size() != 2) throw ValidationError("design needs --range LO HI or --values");
    values = sweep_values(p, a.range[0], a.range[1], a.steps);
  }
  std::optional<IsoRequest> iso;
  if (a.iso_level) {
    IsoRequest r;
    r.mode = mode_from_string(a.iso_mode);
    r.level = *a.iso_level;
    r.t_sheet = a.iso_t_sheet.empty() ? std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0}
                                      : a.iso_t_sheet;
    iso = r;
  }
  run.prepare("design", {{"param", a.param},
                         {"values", values},
                         {"iso_level", a.iso_level ? json(*a.iso_level) : json(nullptr)},
                         {"iso_mode", a.iso_mode},
                         {"iso_t_sheet", a.iso_t_sheet}});
  const SweepResult r = design_sweep(run.cfg.design, p, values, run.cfg.mechanics, iso);
  if (run.csv()) {
    run.write_csv("design_sweep.csv", sweep_csv(r));
  } else {
    run.write_json("design_sweep.json", to_json(r));
  }
  if (!r.fit) throw ValidationError(r.fit_error);
  for (Mode m : kAllModes) {
    const auto& f = (*r.fit)[static_cast<std::size_t>(m)];
    const auto& fa = (*r.fit_area)[static_cast<std::size_t>(m)];
    std::printf("%-8s k ~ %s^%.3f (R2 %.5f)  k_area ~ %s^%.3f\n", to_string(m).c_str(),
                a.param.c_str(), f.exponent, f.r_squared, a.param.c_str(), fa.exponent);
  }
}

struct SimulateArgs {
  double duty = 1.0;
  std::optional<double> heat_time;
  std::optional<double> dt;
  std::optional<double> horizon;
};

void cmd_simulate(Run& run, const SimulateArgs& a) {
  run.prepare("simulate", {{"duty", a.duty},
                           {"heat_time", a.heat_time ? json(*a.heat_time) : json(nullptr)},
                           {"dt", a.dt ? json(*a.dt) : json(nullptr)},
                           {"horizon", a.horizon ? json(*a.horizon) : json(nullptr)}});
  const Config& c = run.cfg;
  const double S_0 = c.design.S_0;
  double heat = 0.0;
  if (a.heat_time) {
    heat = *a.heat_time;
  } else {
    if (a.duty >= 1.0) melt_time(c.thermal, c.heater, S_0);  // throws with the minimum voltage
    heat = melt_time_at_duty(VoxelModel{c.thermal, c.heater, S_0}, a.duty);
    if (heat < 0.0) throw InfeasibleError("duty " + std::to_string(a.duty) + " cannot melt the voxel");
  }
  const double dt = a.dt ? *a.dt : max_stable_dt(c.thermal);
  const double horizon = a.horizon ? *a.horizon : heat + 1.5 * cool_time(c.thermal).simulated;
  const TransientTrace trace = simulate_transient(c.thermal, c.heater, S_0,
                                                  DutySchedule{{0.0, heat}, {a.duty, 0.0}}, dt,
                                                  horizon);
  const EnergyAudit audit = energy_audit(trace, c.thermal);
  const double melted = trace.first_crossing(1.0, true);
  const double solid = trace.first_crossing(0.0, false);
  const json summary = {{"heat_time", heat},
                        {"melt_time", melted >= 0.0 ? json(melted) : json(nullptr)},
                        {"solidified_at", solid >= 0.0 ? json(solid) : json(nullptr)},
                        {"cool_time", solid >= 0.0 ? json(solid - heat) : json(nullptr)},
                        {"dt", dt},
                        {"horizon", horizon},
                        {"heater_resistance", heater_resistance(c.heater, S_0)},
                        {"power", joule_power(c.heater, S_0, a.duty)},
                        {"energy_audit",
                         {{"input", audit.input},
                          {"loss", audit.loss},
                          {"stored", audit.stored},
                          {"relative_error", audit.relative_error()}}}};
  if (run.csv()) {
    run.write_csv("trace.csv", trace_csv(trace));
  } else {
    json samples = json::array();
    for (const auto& s : trace.samples) samples.push_back({s.t, s.T, s.phase_fraction, s.P_in});
    run.write_json("trace.json", {{"summary", summary},
                                  {"columns", {"t", "T", "phase_fraction", "P_in"}},
                                  {"samples", std::move(samples)}});
  }
  std::printf("melt %.2f s, solid again at %.2f s, audit error %.2e\n", melted, solid,
              audit.relative_error());
}

struct CalibrateArgs {
  int voxels = 80;
  int cols = 20;
  double spread = 0.2;
  double noise = 0.5;
};

void cmd_calibrate(Run& run, const CalibrateArgs& a) {
  run.prepare("calibrate",
              {{"voxels", a.voxels}, {"cols", a.cols}, {"spread", a.spread}, {"noise", a.noise}});
  if (a.voxels < 1) throw ValidationError("--voxels must be positive");
  const Config& c = run.cfg;
  const auto plants = make_plant_population(a.voxels, c.thermal, c.heater, c.design.S_0, a.spread,
                                            a.noise, run.seed, a.cols);
  const CalibrationBatch batch = calibrate_all(plants);
  if (run.csv()) {
    std::string body = "voxel,R_h,R_tot,tau_th,map_points\n";
    for (const auto& r : batch.records) {
      char line[160];
      std::snprintf(line, sizeof line, "\"%s\",%.9g,%.9g,%.9g,%zu\n", address_key(r.address).c_str(),
                    r.R_h, r.R_tot, r.tau_th, r.map.points().size());
      body += line;
    }
    run.write_csv("calibration.csv", body);
  } else {
    run.write_json("calibration.json", to_json(batch));
  }
  std::printf("%zu records, %zu faults\n", batch.records.size(), batch.faults.size());
}

struct SynthArgs {
  std::string joint;
  std::string preset;
  std::string size = "small";
  int row = 0;
  int col = 0;
  int band_width = 1;
  int stagger = 1;
  int rows_activated = 0;
};

void cmd_synth(Run& run, const SynthArgs& a) {
  run.prepare("synth", {{"joint", a.joint},
                        {"preset", a.preset},
                        {"size", a.size},
                        {"row", a.row},
                        {"col", a.col},
                        {"band_width", a.band_width},
                        {"stagger", a.stagger},
                        {"rows_activated", a.rows_activated}});
  const VoxelGrid grid = build_grid(run.cfg.design);
  JointSpec spec;
  if (!a.preset.empty()) {
    bool found = false;
    for (const auto& p : joint_presets(grid)) {
      if (p.label == a.preset) {
        spec = p.spec;
        found = true;
      }
    }
    if (!found) throw ValidationError("unknown preset '" + a.preset + "'");
  } else {
    if (a.joint.empty()) throw ValidationError("synth needs --joint or --preset");
    spec.kind = joint_kind_from_string(a.joint);
    spec.magnitude = joint_size_from_string(a.size);
    spec.location = {a.row, a.col};
    spec.band_width = a.band_width;
    spec.stagger = a.stagger;
    spec.rows_activated = a.rows_activated;
  }
  const ActivationPattern pattern = synthesize_pattern(spec, grid);
  const JointReport report = evaluate_pattern(grid, pattern, run.cfg.mechanics);
  json doc = {{"report", to_json(report)}};
  if (!pattern.empty()) {
    doc["localization"] = localization_metric(grid, pattern, report.dominant, run.cfg.mechanics);
  }
  if (spec.kind == JointKind::AxialCompress) {
    doc["predicted_compression"] = predict_compression(run.cfg.design, spec.rows_activated);
  }
  run.write_json("pattern.json", to_json(pattern));
  if (run.csv()) {
    run.write_csv("joint_report.csv", stiffness_csv(report.after));
  } else {
    run.write_json("joint_report.json", doc);
  }
  std::printf("%s: %zu voxels, dominant mode %s\n", pattern.label.c_str(), pattern.size(),
              to_string(report.dominant).c_str());
}

struct ScheduleArgs {
  std::string pattern_file;
  std::string jobs_file;
  std::string preset;
  std::string budget_file;
  std::optional<double> budget;
  std::string calibration_file;
  bool equalize = false;
  std::string target = "melted";
  std::optional<double> deadline;
};

void cmd_schedule(Run& run, const ScheduleArgs& a) {
  run.prepare("schedule",
              {{"pattern", a.pattern_file.empty() ? json(nullptr) : read_json_file(a.pattern_file)},
               {"jobs", a.jobs_file.empty() ? json(nullptr) : read_json_file(a.jobs_file)},
               {"preset", a.preset},
               {"budget", a.budget ? json(*a.budget)
                                   : (a.budget_file.empty() ? json(nullptr)
                                                            : read_json_file(a.budget_file))},
               {"calibration", a.calibration_file.empty() ? json(nullptr)
                                                          : read_json_file(a.calibration_file)},
               {"equalize", a.equalize},
               {"target", a.target},
               {"deadline", a.deadline ? json(*a.deadline) : json(nullptr)}});
  PowerBudget budget;
  if (a.budget) {
    budget.peak = *a.budget;
  } else if (!a.budget_file.empty()) {
    budget = budget_from_json(read_json_file(a.budget_file));
  } else {
    throw ValidationError("schedule needs --budget or --budget-file");
  }
  budget.validate();
  const Config& c = run.cfg;
  std::vector<HeatJob> jobs;
  if (!a.jobs_file.empty()) {
    json j = read_json_file(a.jobs_file);
    if (j.is_object() && j.contains("jobs")) j = j.at("jobs");
    if (!j.is_array()) throw ValidationError(a.jobs_file + ": expected an array of jobs");
    for (const json& x : j) jobs.push_back(heat_job_from_json(x));
  } else {
    const VoxelGrid grid = build_grid(c.design);
    ActivationRequest req;
    if (!a.pattern_file.empty()) {
      req.pattern = pattern_from_json(read_json_file(a.pattern_file));
    } else if (!a.preset.empty()) {
      bool found = false;
      for (const auto& p : joint_presets(grid)) {
        if (p.label == a.preset) {
          req.pattern = synthesize_pattern(p.spec, grid);
          found = true;
        }
      }
      if (!found) throw ValidationError("unknown preset '" + a.preset + "'");
    } else {
      throw ValidationError("schedule needs --pattern, --jobs or --preset");
    }
    for (const Address& addr : req.pattern.addresses) {
      if (!grid.contains(addr)) throw ValidationError("voxel " + to_string(addr) + " is outside the grid");
    }
    req.target = phase_from_string(a.target);
    req.deadline = a.deadline;
    std::optional<CalibrationBatch> store;
    if (!a.calibration_file.empty()) store = calibration_from_json(read_json_file(a.calibration_file));
    std::map<Address, double> duties;
    if (a.equalize) {
      if (!store) throw ValidationError("--equalize needs --calibration");
      duties = equalize_melt_fronts(req.pattern.addresses, *store, c.thermal, c.heater,
                                    c.design.S_0);
    }
    jobs = build_jobs({req}, c.thermal, c.heater, c.design.S_0, store ? &*store : nullptr,
                      duties.empty() ? nullptr : &duties);
  }
  const Schedule s = plan_schedule(jobs, budget);
  if (run.csv()) {
    run.write_csv("schedule.csv", schedule_csv(s));
  } else {
    run.write_json("schedule.json", {{"budget", to_json(budget)}, {"schedule", to_json(s)}});
  }
  std::printf("%zu voxels, makespan %.3f s, cycle %.3f s\n", s.voxels.size(), s.makespan,
              s.cycle_time);
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string calibration_file;
};

void cmd_serve(Run& run, const ServeArgs& a) {
  run.prepare("serve", {{"host", a.host}, {"port", a.port}});
  ServiceConfig sc{run.cfg.mechanics, run.cfg.thermal, run.cfg.heater, {}};
  if (!a.calibration_file.empty()) {
    sc.calibration = calibration_from_json(read_json_file(a.calibration_file));
  }
  Service service(build_grid(run.cfg.design), sc);
  HttpServer server(service);
  const int port = server.bind(a.host, a.port);
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  server.listen();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-stiffness lattice skin toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Run run;
  app.add_option("--config", run.config_path, "JSON config with design/mechanics/thermal/heater");
  app.add_option("--out", run.out_dir, "Output directory");
  app.add_option("--seed", run.seed, "Seed for every stochastic step");
  app.add_option("--format", run.format, "Artifact format")->check(CLI::IsMember({"json", "csv"}));

  DesignArgs design;
  auto* c_design = app.add_subcommand("design", "Parameter sweep with scaling fit");
  c_design->add_option("--param", design.param, "t_f, t_sheet or N_theta")->required();
  c_design->add_option("--range", design.range, "LO HI")->expected(2);
  c_design->add_option("--steps", design.steps, "Sweep points over the range");
  c_design->add_option("--values", design.values, "Explicit sweep values");
  c_design->add_option("--iso-level", design.iso_level, "Stiffness level for the iso curve");
  c_design->add_option("--iso-mode", design.iso_mode, "Mode for the iso curve");
  c_design->add_option("--iso-t-sheet", design.iso_t_sheet, "Sheet thicknesses for the iso curve");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Heat and cool one voxel");
  c_sim->add_option("--duty", sim.duty, "PWM duty while heating");
  c_sim->add_option("--heat-time", sim.heat_time, "Heating time in s (default: until melted)");
  c_sim->add_option("--dt", sim.dt, "Integration step in s");
  c_sim->add_option("--horizon", sim.horizon, "Simulated time in s");

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Calibrate a simulated voxel population");
  c_cal->add_option("--voxels", cal.voxels, "Population size");
  c_cal->add_option("--cols", cal.cols, "Columns used for voxel addresses");
  c_cal->add_option("--spread", cal.spread, "Uniform relative spread on R_h, C_th, G_th");
  c_cal->add_option("--noise", cal.noise, "Sensor noise std in degC");

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "Synthesize a joint pattern and its report");
  c_syn->add_option("--joint", syn.joint, "bend_unilateral, hinge_bilateral, twist, shear, axial_compress");
  c_syn->add_option("--preset", syn.preset, "Canonical preset label");
  c_syn->add_option("--size", syn.size, "small or large");
  c_syn->add_option("--row", syn.row, "Anchor row");
  c_syn->add_option("--col", syn.col, "Anchor column");
  c_syn->add_option("--band-width", syn.band_width, "Band width");
  c_syn->add_option("--stagger", syn.stagger, "Columns shifted per row");
  c_syn->add_option("--rows-activated", syn.rows_activated, "Rows for axial_compress");

  ScheduleArgs sch;
  auto* c_sch = app.add_subcommand("schedule", "Plan a power-budgeted heating schedule");
  c_sch->add_option("--pattern", sch.pattern_file, "Pattern JSON");
  c_sch->add_option("--jobs", sch.jobs_file, "Explicit heat jobs JSON");
  c_sch->add_option("--preset", sch.preset, "Joint preset label");
  c_sch->add_option("--budget", sch.budget, "Peak power budget in W");
  c_sch->add_option("--budget-file", sch.budget_file, "Budget JSON with branch limits");
  c_sch->add_option("--calibration", sch.calibration_file, "Calibration record store");
  c_sch->add_flag("--equalize", sch.equalize, "Equalize melt fronts from calibration");
  c_sch->add_option("--target", sch.target, "melted or solid");
  c_sch->add_option("--deadline", sch.deadline, "Soft deadline in s");

  ServeArgs srv;
  auto* c_srv = app.add_subcommand("serve", "Run the HTTP service");
  c_srv->add_option("--host", srv.host, "Bind address");
  c_srv->add_option("--port", srv.port, "Port (0 picks a free one)");
  c_srv->add_option("--calibration", srv.calibration_file, "Calibration record store");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("validation", e.what(), 2);
  }

  try {
    if (*c_design) cmd_design(run, design);
    if (*c_sim) cmd_simulate(run, sim);
    if (*c_cal) cmd_calibrate(run, cal);
    if (*c_syn) cmd_synth(run, syn);
    if (*c_sch) cmd_schedule(run, sch);
    if (*c_srv) cmd_serve(run, srv);
  } catch (const Error& e) {
    return report_error(kind_name(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const json::exception& e) {
    return report_error("validation", e.what(), 2);
  }
  return 0;
}
