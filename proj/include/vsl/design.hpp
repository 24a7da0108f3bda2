#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vsl/geometry.hpp"
#include "vsl/mechanics.hpp"

namespace vsl {

enum class SweepParameter { TF, TSheet, NTheta };

std::string to_string(SweepParameter p);
/// "t_f", "t_sheet" or "N_theta"; anything else is a ValidationError.
SweepParameter sweep_parameter_from_string(const std::string& s);

/// Base design with one parameter replaced. t_f keeps t_sheet (phi_f follows), t_sheet keeps
/// phi_f (t_f follows), N_theta rebuilds the band at the same radius so S_0 = 2 pi R / N_theta.
DesignParams apply_sweep_value(const DesignParams& base, SweepParameter p, double value);

/// `steps` evenly spaced values over [lo, hi]; N_theta values are rounded and deduplicated.
std::vector<double> sweep_values(SweepParameter p, double lo, double hi, int steps);

struct SweepRow {
  double value = 0.0;
  StiffnessReport report;
};

struct IsoRequest {
  Mode mode = Mode::Bending;
  double level = 0.0;              // target stiffness in the mode's unit
  std::vector<double> t_sheet;     // sheet thicknesses to solve t_f for
};

struct IsoPoint {
  double t_sheet = 0.0;
  std::optional<double> t_f;  // empty when no t_f in (0, t_sheet] reaches the level
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::TF;
  std::vector<SweepRow> rows;
  /// Log-log fits of k and of k_area against the swept value, per mode. Empty with
  /// fewer than two distinct values.
  std::optional<std::array<ScalingFit, 4>> fit;
  std::optional<std::array<ScalingFit, 4>> fit_area;
  std::string fit_error;
  std::vector<IsoPoint> iso;
};

SweepResult design_sweep(const DesignParams& base, SweepParameter p,
                         const std::vector<double>& values, const MechanicsConfig& cfg = {},
                         const std::optional<IsoRequest>& iso = std::nullopt);

/// t_f in (0, t_sheet] giving `level` in `mode` at the given sheet thickness, by bisection
/// on the monotone map t_f -> k.
std::optional<double> iso_thickness(const DesignParams& base, double t_sheet, Mode mode,
                                    double level, const MechanicsConfig& cfg = {});

}  // namespace vsl
