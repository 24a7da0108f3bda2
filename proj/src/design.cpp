#include "vsl/design.hpp"

#include <algorithm>
#include <cmath>

#include "vsl/errors.hpp"
#include "vsl/pattern.hpp"

namespace vsl {

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::TF: return "t_f";
    case SweepParameter::TSheet: return "t_sheet";
    case SweepParameter::NTheta: return "N_theta";
  }
  return "?";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "t_f") return SweepParameter::TF;
  if (s == "t_sheet") return SweepParameter::TSheet;
  if (s == "N_theta") return SweepParameter::NTheta;
  throw ValidationError("unknown sweep parameter '" + s + "' (expected t_f, t_sheet or N_theta)");
}

DesignParams apply_sweep_value(const DesignParams& base, SweepParameter p, double value) {
  if (!(value > 0.0)) throw ValidationError("sweep values must be positive");
  DesignParams d = base;
  switch (p) {
    case SweepParameter::TF:
      d.t_f = value;
      d.phi_f = value / d.t_sheet;
      break;
    case SweepParameter::TSheet:
      d.t_sheet = value;
      d.t_f = d.phi_f * value;
      break;
    case SweepParameter::NTheta: {
      const int n = static_cast<int>(std::lround(value));
      d = DesignParams::with_resolution(base.R, base.m, n, base.N_z, base.S_L / base.S_0,
                                        base.h_0, base.t_sheet, base.phi_f, base.alpha);
      break;
    }
  }
  d.validate();
  return d;
}

std::vector<double> sweep_values(SweepParameter p, double lo, double hi, int steps) {
  if (steps < 1) throw ValidationError("sweep needs at least one step");
  if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("sweep range must be positive with lo <= hi");
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) {
    double v = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
    if (p == SweepParameter::NTheta) v = std::round(v);
    if (out.empty() || v != out.back()) out.push_back(v);
  }
  return out;
}

std::optional<double> iso_thickness(const DesignParams& base, double t_sheet, Mode mode,
                                    double level, const MechanicsConfig& cfg) {
  if (!(level > 0.0)) throw ValidationError("iso-stiffness level must be positive");
  DesignParams d = apply_sweep_value(base, SweepParameter::TSheet, t_sheet);
  auto k_at = [&](double t_f) {
    d.t_f = t_f;
    d.phi_f = t_f / t_sheet;
    return mode_stiffness(build_grid(d), ActivationPattern{}, mode, cfg);
  };
  double lo = 1e-3 * t_sheet;
  double hi = t_sheet;
  if (k_at(hi) < level || k_at(lo) > level) return std::nullopt;
  for (int i = 0; i < 50 && hi - lo > 1e-9 * t_sheet; ++i) {
    const double mid = 0.5 * (lo + hi);
    (k_at(mid) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SweepResult design_sweep(const DesignParams& base, SweepParameter p,
                         const std::vector<double>& values, const MechanicsConfig& cfg,
                         const std::optional<IsoRequest>& iso) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  base.validate();
  SweepResult r;
  r.parameter = p;
  for (double v : values) {
    const DesignParams d = apply_sweep_value(base, p, v);
    r.rows.push_back({v, stiffness_report(build_grid(d), ActivationPattern{}, cfg)});
  }
  std::array<ScalingFit, 4> fit{}, fit_area{};
  try {
    for (Mode m : kAllModes) {
      std::vector<std::pair<double, double>> k, ka;
      for (const auto& row : r.rows) {
        k.emplace_back(row.value, row.report.get(m));
        ka.emplace_back(row.value, row.report.area_normalized(m));
      }
      fit[static_cast<std::size_t>(m)] = fit_scaling_exponent(k);
      fit_area[static_cast<std::size_t>(m)] = fit_scaling_exponent(ka);
    }
    r.fit = fit;
    r.fit_area = fit_area;
  } catch (const ValidationError& e) {
    r.fit_error = std::string("insufficient points: ") + e.what();
  }
  if (iso) {
    for (double ts : iso->t_sheet) {
      r.iso.push_back({ts, iso_thickness(base, ts, iso->mode, iso->level, cfg)});
    }
  }
  return r;
}

}  // namespace vsl
