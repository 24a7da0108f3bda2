#include "vsl/service.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <utility>

#include <httplib.h>

#include "vsl/errors.hpp"
#include "vsl/voxel_state.hpp"

namespace vsl {

namespace {

struct StaleVersion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFound {
  int status;
  std::string message;
};

json error_body(const std::string& kind, const std::string& message, std::uint64_t version) {
  return {{"error", {{"kind", kind}, {"message", message}}}, {"version", version}};
}

void check_pattern(const VoxelGrid& grid, const ActivationPattern& p) {
  for (const Address& a : p.addresses) {
    if (!grid.contains(a)) throw ValidationError("voxel " + to_string(a) + " is outside the grid");
    if (grid.at(a).trimmed()) throw ValidationError("voxel " + to_string(a) + " is trimmed");
  }
}

const json& member(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key)) {
    throw ValidationError(std::string("request body needs '") + key + "'");
  }
  return body.at(key);
}

void only_keys(const json& body, std::initializer_list<const char*> keys) {
  if (body.is_null()) return;
  if (!body.is_object()) throw ValidationError("request body must be a JSON object");
  for (const auto& [k, v] : body.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ValidationError("unknown field '" + k + "'");
  }
}

bool is_mutation(const std::string& method, const std::string& path) {
  return (method == "PUT" && path == "/pattern") || (method == "POST" && path == "/trim");
}

}  // namespace

Service::Service(VoxelGrid grid, ServiceConfig cfg) : grid_(std::move(grid)), cfg_(std::move(cfg)) {}

std::uint64_t Service::version() const {
  std::shared_lock lock(mu_);
  return version_;
}

Response Service::handle(const std::string& method, const std::string& path,
                         const std::string& body) {
  json parsed;
  if (!body.empty()) {
    try {
      parsed = json::parse(body);
    } catch (const json::parse_error& e) {
      return {400, error_body("validation", std::string("malformed JSON: ") + e.what(), version())};
    }
  }
  std::shared_lock<std::shared_mutex> read(mu_, std::defer_lock);
  std::unique_lock<std::shared_mutex> write(mu_, std::defer_lock);
  if (is_mutation(method, path)) {
    write.lock();
  } else {
    read.lock();
  }
  try {
    static const std::map<std::string, std::string> allowed{
        {"/grid", "GET"},          {"/pattern", "GET PUT"},  {"/evaluate", "POST"},
        {"/schedule/plan", "POST"}, {"/presets/joints", "GET"}, {"/trim", "POST"},
        {"/design/sweep", "POST"},  {"/schema", "GET"}};
    const auto it = allowed.find(path);
    if (it == allowed.end()) throw NotFound{404, "no endpoint " + path};
    if (it->second.find(method) == std::string::npos) {
      throw NotFound{405, method + " is not allowed on " + path};
    }
    if (path == "/grid") return get_grid();
    if (path == "/pattern") return method == "GET" ? get_pattern() : put_pattern(parsed);
    if (path == "/evaluate") return evaluate(parsed);
    if (path == "/schedule/plan") return plan(parsed);
    if (path == "/presets/joints") return presets();
    if (path == "/trim") return post_trim(parsed);
    if (path == "/design/sweep") return sweep(parsed);
    return {200, schema()};
  } catch (const NotFound& e) {
    return {e.status, error_body("route", e.message, version_)};
  } catch (const StaleVersion& e) {
    return {409, error_body("conflict", e.what(), version_)};
  } catch (const InfeasibleError& e) {
    return {422, error_body("infeasible", e.what(), version_)};
  } catch (const SingularSystemError& e) {
    return {422, error_body("singular", e.what(), version_)};
  } catch (const ValidationError& e) {
    return {400, error_body("validation", e.what(), version_)};
  } catch (const json::exception& e) {
    return {400, error_body("validation", e.what(), version_)};
  } catch (const Error& e) {
    return {500, error_body("internal", e.what(), version_)};
  }
}

void Service::check_version(const json& body) const {
  if (!body.is_object() || !body.contains("version")) return;
  const json& v = body.at("version");
  if (!v.is_number_unsigned() && !v.is_number_integer()) {
    throw ValidationError("version must be an integer");
  }
  if (v.get<std::int64_t>() != static_cast<std::int64_t>(version_)) {
    throw StaleVersion("request was made against version " + v.dump() + ", session is at " +
                       std::to_string(version_));
  }
}

Response Service::get_grid() const {
  return {200, {{"version", version_}, {"grid", to_json(grid_)},
                {"active_count", grid_.active_count()}}};
}

Response Service::get_pattern() const {
  return {200, {{"version", version_}, {"pattern", to_json(pattern_)}}};
}

Response Service::put_pattern(const json& body) {
  only_keys(body, {"pattern", "version"});
  ActivationPattern p = pattern_from_json(member(body, "pattern"));
  check_pattern(grid_, p);
  check_version(body);
  pattern_ = std::move(p);
  ++version_;
  return {200, {{"version", version_}, {"pattern", to_json(pattern_)}}};
}

Response Service::evaluate(const json& body) const {
  only_keys(body, {"pattern", "mode"});
  const ActivationPattern p =
      body.is_object() && body.contains("pattern") ? pattern_from_json(body.at("pattern")) : pattern_;
  check_pattern(grid_, p);
  std::optional<Mode> mode;
  if (body.is_object() && body.contains("mode")) {
    if (!body.at("mode").is_string()) throw ValidationError("mode must be a string");
    mode = mode_from_string(body.at("mode").get<std::string>());
  }
  const JointReport r = evaluate_pattern(grid_, p, cfg_.mechanics);
  json out = {{"version", version_}, {"pattern", to_json(p)}, {"report", to_json(r)}};
  if (p.empty()) {
    out["dominant_mode"] = nullptr;
    out["localization"] = nullptr;
  } else {
    const Mode m = mode.value_or(r.dominant);
    out["dominant_mode"] = to_string(r.dominant);
    out["localization"] = {{"mode", to_string(m)},
                           {"value", localization_metric(grid_, p, m, cfg_.mechanics)}};
  }
  return {200, out};
}

Response Service::plan(const json& body) const {
  only_keys(body, {"budget", "pattern", "jobs", "target", "equalize", "deadline"});
  const PowerBudget budget = budget_from_json(member(body, "budget"));
  std::vector<HeatJob> jobs;
  if (body.contains("jobs")) {
    if (!body.at("jobs").is_array()) throw ValidationError("jobs must be an array");
    for (const json& j : body.at("jobs")) jobs.push_back(heat_job_from_json(j));
  } else {
    ActivationRequest req;
    req.pattern = body.contains("pattern") ? pattern_from_json(body.at("pattern")) : pattern_;
    check_pattern(grid_, req.pattern);
    if (body.contains("target")) req.target = phase_from_string(body.at("target").get<std::string>());
    if (body.contains("deadline")) req.deadline = body.at("deadline").get<double>();
    const CalibrationBatch* records =
        cfg_.calibration.records.empty() ? nullptr : &cfg_.calibration;
    std::map<Address, double> duties;
    if (body.value("equalize", false)) {
      if (!records) throw ValidationError("equalization needs a calibration store");
      duties = equalize_melt_fronts(req.pattern.addresses, *records, cfg_.thermal, cfg_.heater,
                                    grid_.params().S_0);
    }
    jobs = build_jobs({req}, cfg_.thermal, cfg_.heater, grid_.params().S_0, records,
                      duties.empty() ? nullptr : &duties);
  }
  const Schedule s = plan_schedule(jobs, budget);
  json out = {{"version", version_}, {"budget", to_json(budget)}, {"schedule", to_json(s)}};
  json violations = json::array();
  for (const auto& v : validate_schedule(s, budget)) {
    violations.push_back({{"kind", v.kind}, {"time", v.time}, {"detail", v.detail}});
  }
  out["violations"] = std::move(violations);
  return {200, out};
}

Response Service::presets() const {
  json list = json::array();
  for (const auto& p : joint_presets(grid_)) {
    list.push_back({{"label", p.label},
                    {"spec", to_json(p.spec)},
                    {"pattern", to_json(synthesize_pattern(p.spec, grid_))}});
  }
  return {200, {{"version", version_}, {"presets", std::move(list)}}};
}

Response Service::post_trim(const json& body) {
  only_keys(body, {"addresses", "version"});
  const json& addrs = member(body, "addresses");
  if (!addrs.is_array()) throw ValidationError("addresses must be an array");
  std::vector<Address> region;
  for (const json& a : addrs) region.push_back(address_from_json(a));
  check_version(body);
  TrimResult t = trim(grid_, region);
  std::vector<Address> kept;
  for (const Address& a : pattern_.addresses) {
    if (!t.grid.at(a).trimmed()) kept.push_back(a);
  }
  ActivationPattern p(std::move(kept), pattern_.label);
  p.joint = pattern_.joint;
  grid_ = std::move(t.grid);
  ++version_;
  pattern_ = std::move(p);
  ++version_;
  json comps = json::array();
  for (const auto& c : t.components) comps.push_back(c.size());
  return {200, {{"version", version_},
                {"active_count", grid_.active_count()},
                {"component_sizes", std::move(comps)},
                {"warnings", t.warnings},
                {"pattern", to_json(pattern_)}}};
}

Response Service::sweep(const json& body) const {
  only_keys(body, {"parameter", "values", "range", "iso"});
  const SweepParameter p = sweep_parameter_from_string(member(body, "parameter").get<std::string>());
  std::vector<double> values;
  if (body.contains("values")) {
    values = body.at("values").get<std::vector<double>>();
  } else {
    const json& r = member(body, "range");
    values = sweep_values(p, member(r, "lo").get<double>(), member(r, "hi").get<double>(),
                          member(r, "steps").get<int>());
  }
  if (values.size() > 64) throw ValidationError("at most 64 sweep values per request");
  std::optional<IsoRequest> iso;
  if (body.contains("iso")) {
    const json& ij = body.at("iso");
    IsoRequest req;
    if (ij.contains("mode")) req.mode = mode_from_string(ij.at("mode").get<std::string>());
    req.level = member(ij, "level").get<double>();
    req.t_sheet = member(ij, "t_sheet").get<std::vector<double>>();
    iso = req;
  }
  const SweepResult r = design_sweep(grid_.params(), p, values, cfg_.mechanics, iso);
  json out = to_json(r);
  out["version"] = version_;
  return {200, out};
}

json Service::schema() {
  const json address = {{"type", "object"},
                        {"required", {"row", "col"}},
                        {"properties", {{"row", {{"type", "integer"}}}, {"col", {{"type", "integer"}}}}}};
  const json pattern = {
      {"type", "object"},
      {"required", {"addresses"}},
      {"properties",
       {{"label", {{"type", "string"}}},
        {"spec",
         {{"type", {"object", "null"}},
          {"properties",
           {{"kind",
             {{"enum", {"bend_unilateral", "hinge_bilateral", "twist", "shear", "axial_compress"}}}},
            {"location", address},
            {"band_width", {{"type", "integer"}, {"minimum", 1}}},
            {"magnitude", {{"enum", {"small", "large"}}}},
            {"rows_activated", {{"type", "integer"}}},
            {"stagger", {{"type", "integer"}}}}}}},
        {"addresses", {{"type", "array"}, {"items", address}}}}}};
  const json version = {{"type", "integer"}, {"minimum", 0}};
  const json budget = {
      {"oneOf",
       {{{"type", "number"}},
        {{"type", "object"},
         {"required", {"peak"}},
         {"properties",
          {{"peak", {{"type", "number"}}},
           {"branches",
            {{"type", "array"},
             {"items",
              {{"type", "object"},
               {"properties",
                {{"addresses", {{"type", "array"}, {"items", address}}},
                 {"limit", {{"type", "number"}}}}}}}}}}}}}}};
  const json job = {{"type", "object"},
                    {"required", {"address", "power", "duration"}},
                    {"properties",
                     {{"address", address},
                      {"power", {{"type", "number"}}},
                      {"duration", {{"type", "number"}}},
                      {"duty", {{"type", "number"}}},
                      {"cool", {{"type", "number"}}},
                      {"deadline", {{"type", "number"}}}}}};
  const json modes = {{"enum", {"axial", "shear", "bending", "torsion"}}};
  return {
      {"version", kToolkitVersion},
      {"address", address},
      {"pattern", pattern},
      {"endpoints",
       {{"GET /grid", {{"response", "grid, active_count, version"}}},
        {"GET /pattern", {{"response", "pattern, version"}}},
        {"PUT /pattern",
         {{"body",
           {{"type", "object"},
            {"required", {"pattern"}},
            {"properties", {{"pattern", pattern}, {"version", version}}}}},
          {"response", "pattern, version"}}},
        {"POST /evaluate",
         {{"body", {{"type", "object"}, {"properties", {{"pattern", pattern}, {"mode", modes}}}}},
          {"response", "report (before, after, relative_drop), dominant_mode, localization"}}},
        {"POST /schedule/plan",
         {{"body",
           {{"type", "object"},
            {"required", {"budget"}},
            {"properties",
             {{"budget", budget},
              {"pattern", pattern},
              {"jobs", {{"type", "array"}, {"items", job}}},
              {"target", {{"enum", {"melted", "solid"}}}},
              {"equalize", {{"type", "boolean"}}},
              {"deadline", {{"type", "number"}}}}}}},
          {"response", "schedule (voxels, makespan, cycle_time, power_timeline), violations"}}},
        {"GET /presets/joints", {{"response", "presets: [{label, spec, pattern}]"}}},
        {"POST /trim",
         {{"body",
           {{"type", "object"},
            {"required", {"addresses"}},
            {"properties", {{"addresses", {{"type", "array"}, {"items", address}}},
                            {"version", version}}}}},
          {"response", "active_count, component_sizes, warnings, pattern, version"}}},
        {"POST /design/sweep",
         {{"body",
           {{"type", "object"},
            {"required", {"parameter"}},
            {"properties",
             {{"parameter", {{"enum", {"t_f", "t_sheet", "N_theta"}}}},
              {"values", {{"type", "array"}, {"items", {{"type", "number"}}}}},
              {"range",
               {{"type", "object"},
                {"properties",
                 {{"lo", {{"type", "number"}}},
                  {"hi", {{"type", "number"}}},
                  {"steps", {{"type", "integer"}}}}}}},
              {"iso",
               {{"type", "object"},
                {"properties",
                 {{"mode", modes},
                  {"level", {{"type", "number"}}},
                  {"t_sheet", {{"type", "array"}, {"items", {{"type", "number"}}}}}}}}}}}}},
          {"response", "rows, fit, fit_area, iso_stiffness"}}},
        {"GET /schema", {{"response", "this document"}}}}}};
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(new Impl{service, {}}) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  for (const char* path : {"/grid", "/pattern", "/evaluate", "/schedule/plan", "/presets/joints",
                           "/trim", "/design/sweep", "/schema"}) {
    impl_->server.Get(path, handler);
    impl_->server.Put(path, handler);
    impl_->server.Post(path, handler);
  }
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace vsl
