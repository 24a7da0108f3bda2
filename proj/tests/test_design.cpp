#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vsl/design.hpp"
#include "vsl/errors.hpp"

using namespace vsl;

TEST_CASE("log-log fit recovers a planted exponent") {
  std::vector<std::pair<double, double>> s;
  for (double x : {0.5, 0.8, 1.1, 1.6, 2.3}) s.push_back({x, 7.3 * std::pow(x, 2.52)});
  const ScalingFit f = fit_scaling_exponent(s);
  CHECK(f.exponent == doctest::Approx(2.52).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_scaling_exponent({{1.0, 2.0}}), ValidationError);
}

TEST_CASE("sweep parameters rebuild the design") {
  const DesignParams p = DesignParams::reference();
  const DesignParams a = apply_sweep_value(p, SweepParameter::TF, 0.8);
  CHECK(a.t_f == 0.8);
  CHECK(a.t_sheet == p.t_sheet);
  CHECK(a.phi_f == doctest::Approx(0.4));

  const DesignParams b = apply_sweep_value(p, SweepParameter::TSheet, 3.0);
  CHECK(b.phi_f == p.phi_f);
  CHECK(b.t_f == doctest::Approx(1.5));

  const DesignParams c = apply_sweep_value(p, SweepParameter::NTheta, 12);
  CHECK(c.N_theta == 12);
  CHECK(c.R == p.R);
  CHECK(c.S_0 == doctest::Approx(2.0 * std::numbers::pi * p.R / 12.0));
  CHECK(c.S_L / c.S_0 == doctest::Approx(p.S_L / p.S_0));

  CHECK(sweep_values(SweepParameter::NTheta, 8, 9, 5) == std::vector<double>{8, 9});
  CHECK(sweep_values(SweepParameter::TF, 0.5, 1.5, 3) == std::vector<double>{0.5, 1.0, 1.5});
  CHECK_THROWS_AS(sweep_parameter_from_string("R"), ValidationError);
  CHECK(sweep_parameter_from_string(to_string(SweepParameter::TSheet)) == SweepParameter::TSheet);
}

TEST_CASE("thicker struts are stiffer in every mode") {
  const SweepResult r = design_sweep(DesignParams::reference(), SweepParameter::TF,
                                     sweep_values(SweepParameter::TF, 0.5, 1.8, 6));
  REQUIRE(r.rows.size() == 6);
  REQUIRE(r.fit.has_value());
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    for (Mode m : kAllModes) CHECK(r.rows[i].report.get(m) > r.rows[i - 1].report.get(m));
  }
  // Bending-dominated modes sit between membrane (1) and plate (3) scaling.
  CHECK((*r.fit)[static_cast<std::size_t>(Mode::Bending)].exponent > 2.0);
  CHECK((*r.fit)[static_cast<std::size_t>(Mode::Bending)].exponent <= 3.0);
  CHECK((*r.fit)[static_cast<std::size_t>(Mode::Axial)].exponent >= 1.0);
}

TEST_CASE("too few points leave the fit empty with a reason") {
  const SweepResult r =
      design_sweep(DesignParams::reference(), SweepParameter::TF, std::vector<double>{1.0});
  CHECK(r.rows.size() == 1);
  CHECK_FALSE(r.fit.has_value());
  CHECK(r.fit_error.find("insufficient") != std::string::npos);
}

TEST_CASE("iso-stiffness points hit the level") {
  const DesignParams p = DesignParams::reference();
  const double level = mode_stiffness(build_grid(p), {}, Mode::Bending);
  const auto t = iso_thickness(p, p.t_sheet, Mode::Bending, level);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(p.t_f).epsilon(1e-4));

  const auto unreachable = iso_thickness(p, 1.0, Mode::Bending, level * 100.0);
  CHECK_FALSE(unreachable.has_value());

  IsoRequest req;
  req.level = level;
  req.t_sheet = {1.5, 2.0, 3.0};
  const SweepResult r = design_sweep(p, SweepParameter::TF, {0.8, 1.0, 1.2}, {}, req);
  REQUIRE(r.iso.size() == 3);
  for (const auto& pt : r.iso) {
    if (!pt.t_f) continue;
    DesignParams q = apply_sweep_value(p, SweepParameter::TSheet, pt.t_sheet);
    q = apply_sweep_value(q, SweepParameter::TF, *pt.t_f);
    CHECK(mode_stiffness(build_grid(q), {}, Mode::Bending) == doctest::Approx(level).epsilon(1e-3));
  }
}
