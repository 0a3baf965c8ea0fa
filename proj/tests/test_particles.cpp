#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nmlab/coefficients.hpp"
#include "nmlab/distance.hpp"
#include "nmlab/errors.hpp"
#include "nmlab/fv_solver.hpp"
#include "nmlab/grid.hpp"
#include "nmlab/oracles.hpp"
#include "nmlab/particles.hpp"

using namespace nmlab;

TEST_CASE("marginal resampling reproduces the law") {
  const GridSpec g{-8.0, 8.0, 1024};
  const GridDensity u = heat_kernel(0.0, 1.0, 0.75, g);
  const std::size_t n = 10000;
  const std::vector<double> s = resample_from_marginal(u, n, 99);
  const double ks = ks_statistic(CdfCurve::from_samples(s), CdfCurve::from_density(u));
  CHECK(ks <= 1.63 / std::sqrt(static_cast<double>(n)));
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  const double sd = std::sqrt(2.0 * 0.75);
  CHECK(std::abs(mean - 1.0) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
  CHECK_THROWS_AS(resample_from_marginal(u, 0, 1), setup_error);
}

TEST_CASE("same seed gives bit-identical ensembles") {
  const CoefficientSet c = registry_lookup("burgers");
  const InitialDatum init = InitialDatum::uniform(-0.5, 0.5);
  const PathStore a = simulate_ddsde(c, init, 0.0, {0.0, 0.1, 0.2}, 500, 1e-3, 123);
  const PathStore b = simulate_ddsde(c, init, 0.0, {0.0, 0.1, 0.2}, 500, 1e-3, 123);
  for (std::size_t k = 0; k < a.n_times(); ++k)
    for (std::size_t i = 0; i < a.n_particles(); ++i)
      REQUIRE(a.position(k, i) == b.position(k, i));
  const PathStore d = simulate_ddsde(c, init, 0.0, {0.0, 0.1, 0.2}, 500, 1e-3, 124);
  std::size_t moved = 0;
  for (std::size_t i = 0; i < d.n_particles(); ++i)
    if (d.position(2, i) != a.position(2, i)) ++moved;
  CHECK(moved > 450);
}

TEST_CASE("point start spreads like the gaussian kernel") {
  const CoefficientSet c = registry_lookup("heat");
  const PathStore run =
      simulate_ddsde(c, InitialDatum::dirac(0.0), 0.0, {0.0, 0.5}, 20000, 1e-3, 42);
  const GridSpec g{-10.0, 10.0, 2048};
  CHECK(wasserstein1(run.positions_at(0.5), heat_kernel(0.0, 0.0, 0.5, g)) <= 0.02);
}

TEST_CASE("frozen-flow stepping matches live feedback when the law drops out") {
  const CoefficientSet c = registry_lookup("heat");
  const GridSpec g{-12.0, 12.0, 1024};
  const GridDensity zeta = heat_kernel(0.0, 0.0, 0.05, g);
  const MarginalFlow mu = solve_nlfpke(c, zeta, 0.0, {0.0, 0.25, 0.5});
  const InitialDatum init = InitialDatum::gaussian(0.0, std::sqrt(0.1));
  const PathStore a = simulate_ddsde(c, init, 0.0, {0.0, 0.5}, 2000, 1e-3, 7);
  const PathStore b = simulate_linearized_sde(c, mu, init, {0.0, 0.5}, 2000, 1e-3, 7);
  for (std::size_t i = 0; i < a.n_particles(); ++i)
    REQUIRE(a.position(1, i) == b.position(1, i));
}

TEST_CASE("advective drift stays inside the density bound") {
  const CoefficientSet c = registry_lookup("burgers");
  const PathStore run =
      simulate_ddsde(c, InitialDatum::uniform(-0.5, 0.5), 0.0, {0.0, 0.5}, 20000, 1e-3, 11);
  CHECK(run.drift_min >= 0.0);
  CHECK(run.drift_max <= 0.6);
  CHECK(run.drift_max >= 0.3);
}

TEST_CASE("degenerate diffusion confines the cloud to the moving support") {
  const CoefficientSet c = registry_lookup("pme", {.m = 2.0});
  const PathStore run =
      simulate_ddsde(c, InitialDatum::dirac(0.0), 0.0, {0.0, 1.0}, 5000, 1e-3, 3);
  const auto x = run.positions_at(1.0);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double radius = barenblatt_support_radius(2.0, 1, 1.0);
  CHECK(*lo >= -radius - 0.3);
  CHECK(*hi <= radius + 0.3);
}

TEST_CASE("step size must divide the output gaps") {
  const CoefficientSet c = registry_lookup("heat");
  CHECK_THROWS_AS(simulate_ddsde(c, InitialDatum::dirac(0.0), 0.0, {0.0, 0.35}, 10, 0.1, 1),
                  setup_error);
  CHECK_THROWS_AS(simulate_ddsde(c, InitialDatum::dirac(0.0), 0.0, {0.1, 0.2}, 10, 0.01, 1),
                  setup_error);
  CHECK_THROWS_AS(simulate_ddsde(c, InitialDatum::dirac(0.0), 0.0, {0.0, 0.1}, 10, -0.01, 1),
                  setup_error);
}

TEST_CASE("leaving a pinned feedback domain twice is fatal") {
  const CoefficientSet c = registry_lookup("heat");
  SimOptions opt;
  opt.feedback_grid = GridSpec{-0.5, 0.5, 64};
  CHECK_THROWS_AS(
      simulate_ddsde(c, InitialDatum::dirac(0.0), 0.0, {0.0, 1.0}, 200, 1e-3, 5, opt),
      setup_error);
}

TEST_CASE("path store rejects malformed layouts") {
  CHECK_THROWS_AS(PathStore({}, 10), setup_error);
  CHECK_THROWS_AS(PathStore({0.0, 0.1}, 0), setup_error);
  CHECK_THROWS_AS(PathStore({0.0, 0.1, 0.1}, 10), setup_error);
  const PathStore p({0.0, 0.5}, 3);
  CHECK(p.index_of(0.5) == 1);
  CHECK_THROWS_AS(p.index_of(0.25), setup_error);
}
