#include "vsl/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "vsl/errors.hpp"

namespace vsl {

namespace {

// Strict object reader: typed access by key, then done() rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) throw ValidationError(what_ + " must be a JSON object");
  }

  bool has(const char* key) const { return j_.contains(key); }
  void mark(const char* key) { seen_.insert(key); }
  /// Top-level artifacts carry the toolkit version and config hash.
  void allow_stamp() {
    mark("version");
    mark("config_hash");
  }

  template <typename T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    out = convert<T>(j_.at(key), key);
  }

  template <typename T>
  T req(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ValidationError(what_ + ": missing field '" + key + "'");
    return convert<T>(j_.at(key), key);
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ValidationError(what_ + ": missing field '" + key + "'");
    return j_.at(key);
  }

  void done() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ValidationError(what_ + ": unknown field '" + k + "'");
    }
  }

 private:
  template <typename T>
  T convert(const json& v, const char* key) const {
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) {
      ok = v.is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = v.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
      ok = v.is_string();
    } else {
      ok = true;
    }
    if (!ok) throw ValidationError(what_ + ": field '" + key + "' has the wrong type");
    return v.get<T>();
  }

  const json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

const json& require_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError(what + " must be a JSON array");
  return j;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

const char* unit_of(Mode m) {
  return (m == Mode::Axial || m == Mode::Shear) ? "N/mm" : "N*mm/deg";
}

}  // namespace

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json stamp(json doc, const std::string& hash) {
  doc["version"] = kToolkitVersion;
  doc["config_hash"] = hash;
  return doc;
}

json to_json(const Address& a) { return {{"row", a.row}, {"col", a.col}}; }

Address address_from_json(const json& j) {
  if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
    return {j[0].get<int>(), j[1].get<int>()};
  }
  Fields f(j, "address");
  Address a{f.req<int>("row"), f.req<int>("col")};
  f.done();
  return a;
}

std::string address_key(const Address& a) {
  return std::to_string(a.row) + "," + std::to_string(a.col);
}

Address address_from_key(const std::string& key) {
  int r = 0, c = 0;
  char tail = 0;
  if (std::sscanf(key.c_str(), "%d,%d%c", &r, &c, &tail) != 2) {
    throw ValidationError("bad voxel key '" + key + "', expected \"row,col\"");
  }
  return {r, c};
}

json to_json(const DesignParams& p) {
  return {{"R", p.R},         {"m", p.m},         {"N_theta", p.N_theta},
          {"N_z", p.N_z},     {"S_0", p.S_0},     {"S_L", p.S_L},
          {"h_0", p.h_0},     {"t_f", p.t_f},     {"t_sheet", p.t_sheet},
          {"phi_f", p.phi_f}, {"alpha", p.alpha}};
}

DesignParams design_params_from_json(const json& j) {
  Fields f(j, "design params");
  DesignParams p;
  p.R = f.req<double>("R");
  p.m = f.req<int>("m");
  p.N_theta = f.req<int>("N_theta");
  p.N_z = f.req<int>("N_z");
  p.S_0 = f.req<double>("S_0");
  p.S_L = f.req<double>("S_L");
  p.h_0 = f.req<double>("h_0");
  p.t_f = f.req<double>("t_f");
  p.t_sheet = f.req<double>("t_sheet");
  p.phi_f = f.req<double>("phi_f");
  p.alpha = f.req<double>("alpha");
  f.done();
  p.validate();
  return p;
}

json to_json(const MechanicsConfig& c) {
  return {{"E_metal", c.E_metal},
          {"E_elastomer", c.E_elastomer},
          {"sigma_y", c.sigma_y},
          {"nu_metal", c.nu_metal},
          {"nu_elastomer", c.nu_elastomer},
          {"density_metal", c.density_metal},
          {"membrane", c.membrane},
          {"buckling_end_factor", c.buckling_end_factor}};
}

MechanicsConfig mechanics_config_from_json(const json& j, MechanicsConfig c) {
  Fields f(j, "mechanics config");
  f.opt("E_metal", c.E_metal);
  f.opt("E_elastomer", c.E_elastomer);
  f.opt("sigma_y", c.sigma_y);
  f.opt("nu_metal", c.nu_metal);
  f.opt("nu_elastomer", c.nu_elastomer);
  f.opt("density_metal", c.density_metal);
  f.opt("membrane", c.membrane);
  f.opt("buckling_end_factor", c.buckling_end_factor);
  f.done();
  if (!(c.E_metal > 0.0) || !(c.E_elastomer > 0.0)) {
    throw ValidationError("moduli must be positive");
  }
  return c;
}

json to_json(const ThermalParams& t) {
  return {{"C_th", t.C_th}, {"G_th", t.G_th}, {"Q_melt", t.Q_melt},
          {"T_m", t.T_m},   {"eta", t.eta},   {"T_amb", t.T_amb}};
}

ThermalParams thermal_params_from_json(const json& j, ThermalParams t) {
  Fields f(j, "thermal params");
  f.opt("C_th", t.C_th);
  f.opt("G_th", t.G_th);
  f.opt("Q_melt", t.Q_melt);
  f.opt("T_m", t.T_m);
  f.opt("eta", t.eta);
  f.opt("T_amb", t.T_amb);
  f.done();
  t.validate();
  return t;
}

json to_json(const HeaterParams& h) {
  return {{"R_s", h.R_s}, {"kappa", h.kappa}, {"omega", h.omega},
          {"R_ser", h.R_ser}, {"V", h.V}, {"f_pwm", h.f_pwm}};
}

HeaterParams heater_params_from_json(const json& j, HeaterParams h) {
  Fields f(j, "heater params");
  f.opt("R_s", h.R_s);
  f.opt("kappa", h.kappa);
  f.opt("omega", h.omega);
  f.opt("R_ser", h.R_ser);
  f.opt("V", h.V);
  f.opt("f_pwm", h.f_pwm);
  f.done();
  h.validate();
  return h;
}

json to_json(const VoxelGrid& g) {
  json cells = json::array();
  for (const auto& v : g.cells()) {
    json c = {{"address", to_json(v.address)},
              {"phase", to_string(v.phase)},
              {"health", to_string(v.health)},
              {"phase_fraction", v.phase_fraction},
              {"temperature", v.temperature}};
    if (v.geometry_override) {
      c["geometry_override"] = {{"t_f", v.geometry_override->t_f},
                                {"alpha", v.geometry_override->alpha}};
    }
    cells.push_back(std::move(c));
  }
  return {{"params", to_json(g.params())}, {"rows", g.rows()}, {"cols", g.cols()},
          {"cells", std::move(cells)}};
}

VoxelGrid grid_from_json(const json& j) {
  Fields f(j, "grid");
  f.allow_stamp();
  const DesignParams p = design_params_from_json(f.raw("params"));
  VoxelGrid g = build_grid(p);
  if (f.has("rows") && f.req<int>("rows") != g.rows()) {
    throw ValidationError("grid rows do not match N_z");
  }
  if (f.has("cols") && f.req<int>("cols") != g.cols()) {
    throw ValidationError("grid cols do not match m * N_theta");
  }
  f.mark("rows");
  f.mark("cols");
  if (f.has("cells")) {
    for (const json& cj : require_array(f.raw("cells"), "cells")) {
      Fields c(cj, "cell");
      const Address a = address_from_json(c.raw("address"));
      if (!g.contains(a)) throw ValidationError("cell " + to_string(a) + " is outside the grid");
      VoxelRecord& v = g.at(a);
      if (c.has("phase")) v.phase = phase_from_string(c.req<std::string>("phase"));
      if (c.has("health")) v.health = health_from_string(c.req<std::string>("health"));
      c.opt("phase_fraction", v.phase_fraction);
      c.opt("temperature", v.temperature);
      c.mark("phase");
      c.mark("health");
      if (c.has("geometry_override")) {
        Fields o(c.raw("geometry_override"), "geometry_override");
        v.geometry_override = GeometryOverride{o.req<double>("t_f"), o.req<double>("alpha")};
        o.done();
      }
      c.done();
    }
  }
  f.done();
  return g;
}

json to_json(const JointSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"location", to_json(s.location)},
          {"band_width", s.band_width},
          {"magnitude", to_string(s.magnitude)},
          {"rows_activated", s.rows_activated},
          {"stagger", s.stagger}};
}

JointSpec joint_spec_from_json(const json& j) {
  Fields f(j, "joint spec");
  JointSpec s;
  s.kind = joint_kind_from_string(f.req<std::string>("kind"));
  if (f.has("location")) s.location = address_from_json(f.raw("location"));
  f.opt("band_width", s.band_width);
  if (f.has("magnitude")) s.magnitude = joint_size_from_string(f.req<std::string>("magnitude"));
  f.mark("magnitude");
  f.mark("location");
  f.opt("rows_activated", s.rows_activated);
  f.opt("stagger", s.stagger);
  f.done();
  return s;
}

json to_json(const ActivationPattern& p) {
  json addrs = json::array();
  for (const Address& a : p.addresses) addrs.push_back(to_json(a));
  return {{"label", p.label},
          {"spec", p.joint ? to_json(*p.joint) : json(nullptr)},
          {"addresses", std::move(addrs)}};
}

ActivationPattern pattern_from_json(const json& j) {
  Fields f(j, "pattern");
  f.allow_stamp();
  std::vector<Address> addrs;
  for (const json& a : require_array(f.raw("addresses"), "addresses")) {
    addrs.push_back(address_from_json(a));
  }
  std::string label;
  f.opt("label", label);
  ActivationPattern p(std::move(addrs), label);
  if (f.has("spec") && !j.at("spec").is_null()) p.joint = joint_spec_from_json(j.at("spec"));
  f.mark("spec");
  f.done();
  return p;
}

json to_json(const StiffnessReport& r) {
  json modes = json::object();
  for (Mode m : kAllModes) {
    modes[to_string(m)] = {{"value", r.get(m)},
                           {"unit", unit_of(m)},
                           {"normalized", r.area_normalized(m)}};
  }
  return {{"modes", std::move(modes)}, {"area", r.area}};
}

std::string stiffness_csv(const StiffnessReport& r) {
  std::string out = "mode,value,unit,normalized\n";
  for (Mode m : kAllModes) {
    char line[160];
    std::snprintf(line, sizeof line, "%s,%.9g,%s,%.9g\n", to_string(m).c_str(), r.get(m),
                  unit_of(m), r.area_normalized(m));
    out += line;
  }
  return out;
}

json to_json(const JointReport& r) {
  json drop = json::object();
  for (Mode m : kAllModes) drop[to_string(m)] = r.relative_drop[static_cast<std::size_t>(m)];
  return {{"before", to_json(r.before)},
          {"after", to_json(r.after)},
          {"relative_drop", std::move(drop)},
          {"dominant_mode", to_string(r.dominant)},
          {"rotational_stiffness", r.rotational_stiffness}};
}

json to_json(const CalibrationBatch& b) {
  json records = json::object();
  for (const auto& r : b.records) {
    json map = json::array();
    for (const auto& [d, T] : r.map.points()) map.push_back({d, T});
    records[address_key(r.address)] = {
        {"R_h", r.R_h}, {"R_tot", r.R_tot}, {"tau_th", r.tau_th}, {"map", std::move(map)}};
  }
  json faults = json::array();
  for (const auto& f : b.faults) {
    faults.push_back({{"address", to_json(f.address)}, {"reason", f.reason}});
  }
  return {{"records", std::move(records)}, {"faults", std::move(faults)}};
}

CalibrationBatch calibration_from_json(const json& j) {
  Fields f(j, "calibration store");
  f.allow_stamp();
  CalibrationBatch b;
  const json& recs = f.raw("records");
  if (!recs.is_object()) throw ValidationError("records must be keyed by \"row,col\"");
  for (const auto& [key, rj] : recs.items()) {
    Fields r(rj, "calibration record " + key);
    CalibrationRecord rec;
    rec.address = address_from_key(key);
    rec.R_h = r.req<double>("R_h");
    rec.R_tot = r.req<double>("R_tot");
    rec.tau_th = r.req<double>("tau_th");
    std::vector<std::pair<double, double>> pts;
    for (const json& pt : require_array(r.raw("map"), "map")) {
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
        throw ValidationError("map points must be [duty, T] pairs");
      }
      pts.emplace_back(pt[0].get<double>(), pt[1].get<double>());
    }
    if (pts.size() < 2) throw ValidationError("calibration map " + key + " needs 2 points");
    rec.map = InverseDutyMap(std::move(pts));
    r.done();
    b.records.push_back(std::move(rec));
  }
  std::sort(b.records.begin(), b.records.end(),
            [](const auto& a, const auto& c) { return a.address < c.address; });
  if (f.has("faults")) {
    for (const json& fj : require_array(f.raw("faults"), "faults")) {
      Fields ff(fj, "fault");
      b.faults.push_back({address_from_json(ff.raw("address")), ff.req<std::string>("reason")});
      ff.done();
    }
  }
  f.done();
  return b;
}

json to_json(const PowerBudget& b) {
  json branches = json::array();
  for (const auto& br : b.branches) {
    json addrs = json::array();
    for (const Address& a : br.addresses) addrs.push_back(to_json(a));
    branches.push_back({{"addresses", std::move(addrs)}, {"limit", br.limit}});
  }
  return {{"peak", b.peak}, {"branches", std::move(branches)}};
}

PowerBudget budget_from_json(const json& j) {
  if (j.is_number()) {
    PowerBudget b{j.get<double>(), {}};
    b.validate();
    return b;
  }
  Fields f(j, "power budget");
  f.allow_stamp();
  PowerBudget b;
  b.peak = f.req<double>("peak");
  if (f.has("branches")) {
    for (const json& bj : require_array(f.raw("branches"), "branches")) {
      Fields bf(bj, "branch");
      BranchLimit bl;
      for (const json& a : require_array(bf.raw("addresses"), "branch addresses")) {
        bl.addresses.push_back(address_from_json(a));
      }
      bl.limit = bf.req<double>("limit");
      bf.done();
      b.branches.push_back(std::move(bl));
    }
  }
  f.done();
  b.validate();
  return b;
}

json to_json(const HeatJob& j) {
  json o = {{"address", to_json(j.address)}, {"power", j.power},   {"duration", j.duration},
            {"duty", j.duty},                {"cool", j.cool}};
  if (j.deadline) o["deadline"] = *j.deadline;
  return o;
}

HeatJob heat_job_from_json(const json& j) {
  Fields f(j, "heat job");
  HeatJob h;
  h.address = address_from_json(f.raw("address"));
  h.power = f.req<double>("power");
  h.duration = f.req<double>("duration");
  f.opt("duty", h.duty);
  f.opt("cool", h.cool);
  if (f.has("deadline")) h.deadline = f.req<double>("deadline");
  f.done();
  return h;
}

std::vector<std::pair<double, double>> power_timeline(const Schedule& s) {
  std::vector<std::pair<double, double>> deltas;
  for (const auto& v : s.voxels) {
    for (const auto& iv : v.intervals) {
      if (!iv.heating) continue;
      deltas.emplace_back(iv.start, iv.power);
      deltas.emplace_back(iv.end, -iv.power);
    }
  }
  std::sort(deltas.begin(), deltas.end());
  std::vector<std::pair<double, double>> out;
  double level = 0.0;
  for (std::size_t i = 0; i < deltas.size();) {
    const double t = deltas[i].first;
    for (; i < deltas.size() && deltas[i].first == t; ++i) level += deltas[i].second;
    if (std::abs(level) < 1e-12) level = 0.0;
    out.emplace_back(t, level);
  }
  return out;
}

json to_json(const Schedule& s) {
  json voxels = json::array();
  for (const auto& v : s.voxels) {
    json ivs = json::array();
    for (const auto& iv : v.intervals) {
      ivs.push_back({{"start", iv.start},
                     {"end", iv.end},
                     {"duty", iv.duty},
                     {"power", iv.power},
                     {"heating", iv.heating}});
    }
    voxels.push_back({{"address", to_json(v.address)}, {"intervals", std::move(ivs)}});
  }
  json timeline = json::array();
  for (const auto& [t, p] : power_timeline(s)) timeline.push_back({{"t", t}, {"power", p}});
  return {{"makespan", s.makespan},
          {"cycle_time", s.cycle_time},
          {"deadline_misses", s.deadline_misses},
          {"voxels", std::move(voxels)},
          {"power_timeline", std::move(timeline)}};
}

std::string schedule_csv(const Schedule& s) {
  struct Event {
    double t;
    int order;  // ends before starts at the same instant
    Address a;
    double duty;
    double delta;
  };
  std::vector<Event> events;
  for (const auto& v : s.voxels) {
    for (const auto& iv : v.intervals) {
      if (!iv.heating) continue;
      events.push_back({iv.start, 1, v.address, iv.duty, iv.power});
      events.push_back({iv.end, 0, v.address, 0.0, -iv.power});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
    if (x.t != y.t) return x.t < y.t;
    if (x.order != y.order) return x.order < y.order;
    return x.a < y.a;
  });
  std::string out = "t,voxel,duty,cumulative_power\n";
  double level = 0.0;
  for (const auto& e : events) {
    level += e.delta;
    if (std::abs(level) < 1e-12) level = 0.0;
    out += fmt(e.t) + ",\"" + address_key(e.a) + "\"," + fmt(e.duty) + "," + fmt(level) + "\n";
  }
  return out;
}

json to_json(const SweepResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json k = json::object(), ka = json::object();
    for (Mode m : kAllModes) {
      k[to_string(m)] = row.report.get(m);
      ka[to_string(m)] = row.report.area_normalized(m);
    }
    rows.push_back({{"value", row.value}, {"stiffness", std::move(k)}, {"k_area", std::move(ka)}});
  }
  auto fits = [](const std::optional<std::array<ScalingFit, 4>>& f) {
    if (!f) return json(nullptr);
    json o = json::object();
    for (Mode m : kAllModes) {
      const auto& x = (*f)[static_cast<std::size_t>(m)];
      o[to_string(m)] = {{"exponent", x.exponent}, {"r_squared", x.r_squared}};
    }
    return o;
  };
  json iso = json::array();
  for (const auto& p : r.iso) {
    iso.push_back({{"t_sheet", p.t_sheet}, {"t_f", p.t_f ? json(*p.t_f) : json(nullptr)}});
  }
  json out = {{"parameter", to_string(r.parameter)},
              {"rows", std::move(rows)},
              {"fit", fits(r.fit)},
              {"fit_area", fits(r.fit_area)},
              {"iso_stiffness", std::move(iso)}};
  if (!r.fit_error.empty()) out["fit_error"] = r.fit_error;
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  std::string out =
      "value,axial,shear,bending,torsion,k_area_axial,k_area_shear,k_area_bending,"
      "k_area_torsion\n";
  for (const auto& row : r.rows) {
    char line[320];
    const auto& k = row.report;
    std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", row.value,
                  k.axial, k.shear, k.bending, k.torsion, k.area_normalized(Mode::Axial),
                  k.area_normalized(Mode::Shear), k.area_normalized(Mode::Bending),
                  k.area_normalized(Mode::Torsion));
    out += line;
  }
  return out;
}

std::string trace_csv(const TransientTrace& trace) {
  std::ostringstream os;
  trace.write_csv(os);
  return os.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace vsl
