#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nmlab/distance.hpp"
#include "nmlab/grid.hpp"
#include "nmlab/rng.hpp"

using namespace nmlab;

namespace {

GridDensity uniform_on(const GridSpec& g, double lo, double hi) {
  std::vector<double> v(g.n_cells, 0.0);
  for (std::size_t i = 0; i < g.n_cells; ++i)
    if (g.center(i) > lo && g.center(i) < hi) v[i] = 1.0;
  return GridDensity::normalized(g, std::move(v), 0.0);
}

}  // namespace

TEST_CASE("identical distributions have zero distance") {
  const GridSpec g{0.0, 2.0, 500};
  const GridDensity u = uniform_on(g, 0.0, 2.0);
  CHECK(wasserstein1(u, u) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(l1_distance(u, u) == 0.0);
  const std::vector<double> s = {0.4, 1.1, 1.9};
  CHECK(wasserstein1(s, s) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("point masses transport at the distance between them") {
  const std::vector<double> a = {0.0};
  const std::vector<double> b = {1.0};
  CHECK(wasserstein1(a, b) == doctest::Approx(1.0));

  const GridSpec g{-2.0, 2.0, 400};
  const GridDensity da = GridDensity::dirac(g, 0.0, 0.0);
  const GridDensity db = GridDensity::dirac(g, 1.0, 0.0);
  CHECK(wasserstein1(da, db) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("uniform laws on nested intervals") {
  const GridSpec g{0.0, 2.0, 1000};
  const GridDensity u01 = uniform_on(g, 0.0, 1.0);
  const GridDensity u02 = uniform_on(g, 0.0, 2.0);
  CHECK(wasserstein1(u01, u02) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(ks_statistic(CdfCurve::from_density(u01), CdfCurve::from_density(u02)) ==
        doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("sample shift moves W1 by the shift") {
  const CounterRng rng(5);
  std::vector<double> a(4000), b(4000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.normal(i, 0);
    b[i] = a[i] + 0.75;
  }
  CHECK(wasserstein1(a, b) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("metric axioms on sampled triples") {
  const CounterRng rng(17);
  std::vector<double> a(500), b(500), c(500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.normal(i, 0);
    b[i] = 0.3 + 1.4 * rng.normal(i, 1);
    c[i] = -0.2 + 0.5 * rng.normal(i, 2);
  }
  const double ab = wasserstein1(a, b);
  const double ba = wasserstein1(b, a);
  const double bc = wasserstein1(b, c);
  const double ac = wasserstein1(a, c);
  CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
  CHECK(ab > 0.0);
  CHECK(ac <= ab + bc + 1e-12);
}

TEST_CASE("empirical samples converge to their grid law") {
  const GridSpec g{0.0, 1.0, 200};
  const GridDensity u = uniform_on(g, 0.0, 1.0);
  const CounterRng rng(99);
  std::vector<double> s(20000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = rng.uniform(i, 0, DrawPurpose::resample);
  CHECK(wasserstein1(s, u) < 0.01);
}

TEST_CASE("l1 and total variation on simple vectors") {
  const GridSpec g{0.0, 1.0, 4};
  const GridDensity a = GridDensity::normalized(g, {1.0, 0.0, 0.0, 0.0}, 0.0);
  const GridDensity b = GridDensity::normalized(g, {0.0, 0.0, 0.0, 1.0}, 0.0);
  CHECK(l1_distance(a, b) == doctest::Approx(2.0));

  const GridSpec other{0.0, 1.0, 8};
  const GridDensity c = uniform_on(other, 0.0, 1.0);
  CHECK_THROWS_AS(l1_distance(a, c), std::invalid_argument);

  CHECK(total_variation({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(1.0));
  CHECK(total_variation({0.5, 0.5}, {0.5, 0.5}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(total_variation({1.0}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("cdf curve evaluation is right-continuous with left limits") {
  const CdfCurve f = CdfCurve::from_samples({1.0, 1.0, 2.0});
  CHECK(f(0.5) == doctest::Approx(0.0));
  CHECK(f(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(f.left_limit(1.0) == doctest::Approx(0.0));
  CHECK(f(1.5) == doctest::Approx(2.0 / 3.0));
  CHECK(f(2.0) == doctest::Approx(1.0));
  CHECK(f.left_limit(2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(f(3.0) == doctest::Approx(1.0));
}
