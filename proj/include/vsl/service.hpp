#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>

#include "vsl/io.hpp"

namespace vsl {

struct ServiceConfig {
  MechanicsConfig mechanics;
  ThermalParams thermal;
  HeaterParams heater;
  CalibrationBatch calibration;
};

struct Response {
  int status = 200;
  json body;
};

/// Session state behind the HTTP API: one grid, one pattern, a calibration store and a
/// version that every mutation advances. Reads share a lock; mutations are serialized and
/// build the new state on copies, so a failing request leaves the session untouched.
class Service {
 public:
  explicit Service(VoxelGrid grid, ServiceConfig cfg = {});

  /// Routes one request. Bodies are JSON; errors come back as {"error": {kind, message}}
  /// with 400 (schema or validation), 404, 405, 409 (stale version) or 422 (infeasible).
  Response handle(const std::string& method, const std::string& path, const std::string& body);

  std::uint64_t version() const;
  static json schema();

 private:
  Response get_grid() const;
  Response get_pattern() const;
  Response put_pattern(const json& body);
  Response evaluate(const json& body) const;
  Response plan(const json& body) const;
  Response presets() const;
  Response post_trim(const json& body);
  Response sweep(const json& body) const;

  void check_version(const json& body) const;

  mutable std::shared_mutex mu_;
  VoxelGrid grid_;
  ActivationPattern pattern_;
  ServiceConfig cfg_;
  std::uint64_t version_ = 0;
};

/// Blocking HTTP front end over a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  /// Binds; port 0 picks a free port. Returns the bound port or throws IoError.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vsl
