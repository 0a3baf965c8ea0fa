#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "nmlab/coefficients.hpp"

using namespace nmlab;

TEST_CASE("scalar function closed forms and slopes") {
  const ScalarFn z = ScalarFn::zero();
  CHECK(z.is_zero());
  CHECK(z(3.0) == 0.0);

  const ScalarFn lin = ScalarFn::linear(2.5);
  CHECK(lin(2.0) == doctest::Approx(5.0));
  CHECK(lin.slope(7.0) == doctest::Approx(2.5));

  const ScalarFn pow2 = ScalarFn::power(1.0, 2.0);
  CHECK(pow2(3.0) == doctest::Approx(9.0));
  CHECK(pow2(-3.0) == doctest::Approx(-9.0));
  CHECK(pow2.slope(3.0) == doctest::Approx(6.0));

  const ScalarFn ap = ScalarFn::abs_power(2.0, 3.0);
  CHECK(ap(-2.0) == doctest::Approx(16.0));

  const ScalarFn b = ScalarFn::bump(1.5, 2.0);
  CHECK(b(0.0) == doctest::Approx(1.5));
  CHECK(b(2.0) == doctest::Approx(0.0));
  CHECK(b(5.0) == 0.0);
  CHECK(b(1.0) == doctest::Approx(1.5 * 0.75 * 0.75));
}

TEST_CASE("tabulated scalar functions interpolate linearly") {
  const ScalarFn t = ScalarFn::table({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0});
  CHECK(t(0.5) == doctest::Approx(1.0));
  CHECK(t(1.5) == doctest::Approx(2.5));
  CHECK_THROWS_AS(t(-1.0), std::domain_error);
  CHECK_THROWS_AS(t(3.0), std::domain_error);
  CHECK(t.slope(0.5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(ScalarFn::table({0.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("registry heat set is the linear control") {
  const CoefficientSet c = registry_lookup("heat");
  CHECK(c.m == doctest::Approx(1.0));
  CHECK(diffusion_from_value(c, 0.3) == doctest::Approx(std::sqrt(2.0)));
  CHECK(diffusion_from_value(c, 2.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(drift_from_value(c, 0.5, 1.0) == 0.0);
  CHECK(a_coefficient(c, 0.7) == doctest::Approx(1.0));
  CHECK(a_coefficient(c, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("registry pme set scales diffusion with the density") {
  RegistryParams p;
  p.m = 3.0;
  const CoefficientSet c = registry_lookup("pme", p);
  CHECK(c.beta(0.5) == doctest::Approx(0.125));
  CHECK(diffusion_from_value(c, 0.5) == doctest::Approx(std::sqrt(0.5)));
  CHECK(a_coefficient(c, 0.5) == doctest::Approx(0.25));
  CHECK(a_coefficient(c, 0.0) <= 1e-20);
  CHECK(drift_from_value(c, 0.5, 2.0) == 0.0);

  p.m = 0.5;
  CHECK_THROWS_AS(registry_lookup("pme", p), std::invalid_argument);
}

TEST_CASE("registry burgers set advects with half the density") {
  const CoefficientSet c = registry_lookup("burgers");
  CHECK(drift_from_value(c, 0.4, 0.0) == doctest::Approx(0.2));
  CHECK(drift_from_value(c, 0.4, 5.0) == doctest::Approx(0.2));
  CHECK(diffusion_from_value(c, 0.9) == doctest::Approx(std::sqrt(2.0)));
  CHECK(c.m == doctest::Approx(1.0));
}

TEST_CASE("registry gpme set combines power drift and diffusion") {
  RegistryParams p;
  p.m = 2.0;
  p.drift_scale = 0.5;
  p.direction = -1.0;
  const CoefficientSet c = registry_lookup("gpme", p);
  CHECK(c.beta(2.0) == doctest::Approx(4.0));
  CHECK(drift_from_value(c, 0.6, 1.0) == doctest::Approx(-0.5 * 0.6));
}

TEST_CASE("registry meanfield set averages the interaction bump") {
  RegistryParams p;
  p.h_amp = 2.0;
  p.h_radius = 1.0;
  p.sigma = 0.3;
  const CoefficientSet c = registry_lookup("meanfield", p);
  CHECK(c.kind == CoefficientKind::MeanField);
  CHECK(diffusion_from_value(c, 0.4) == doctest::Approx(0.3));

  const GridSpec g{-2.0, 2.0, 400};
  const GridDensity dirac = GridDensity::dirac(g, 0.0, 0.0);
  CHECK(mean_field_drift(c, dirac) == doctest::Approx(2.0).epsilon(1e-3));
  const GridDensity far = GridDensity::dirac(g, 1.8, 0.0);
  CHECK(mean_field_drift(c, far) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("registry rejects unknown names and bad parameters") {
  CHECK_THROWS_AS(registry_lookup("unknown-set"), std::invalid_argument);
  RegistryParams p;
  p.sigma = -1.0;
  CHECK_THROWS_AS(registry_lookup("meanfield", p), std::invalid_argument);
}

TEST_CASE("hand-built sets are validated for consistency") {
  CoefficientSet c;
  c.kind = CoefficientKind::Nemytskii;
  c.beta = ScalarFn::power(1.0, 2.0);
  c.eps_floor = -1.0;
  CHECK_THROWS_AS(validate_coefficients(c), std::invalid_argument);

  c.eps_floor = 1e-12;
  validate_coefficients(c);

  CoefficientSet bad = registry_lookup("pme");
  bad.beta = ScalarFn::table({0.0, 1.0}, {0.5, 1.0});
  CHECK_THROWS_AS(validate_on_range(bad, 1.0), std::invalid_argument);
}
