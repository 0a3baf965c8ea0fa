#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nmlab/errors.hpp"
#include "nmlab/kde.hpp"
#include "nmlab/rng.hpp"

using namespace nmlab;

namespace {

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = rng.normal(i, 0);
  return s;
}

}  // namespace

TEST_CASE("silverman bandwidth follows the reference rule on gaussian data") {
  const std::size_t n = 50000;
  const std::vector<double> s = normal_sample(n, 11);
  const double bw = silverman_bandwidth(s);
  const double reference = 0.9 * std::pow(static_cast<double>(n), -0.2);
  CHECK(bw == doctest::Approx(reference).epsilon(0.03));
}

TEST_CASE("silverman bandwidth degenerates on coincident samples") {
  const std::vector<double> flat(100, 1.5);
  CHECK_THROWS_AS(silverman_bandwidth(flat), degenerate_bandwidth_error);
  CHECK_THROWS_AS(silverman_bandwidth({1.0}), degenerate_bandwidth_error);
}

TEST_CASE("single point with a fixed bandwidth smooths into a unit bump") {
  const GridSpec g{-2.0, 2.0, 800};
  KdeOptions opt;
  opt.bandwidth_rule = BandwidthRule::Fixed;
  opt.fixed_bandwidth = 0.1;
  const GridDensity u = kde_density({0.25}, g, opt);
  CHECK(u.mass() == doctest::Approx(1.0));
  CHECK(u.mean() == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(std::sqrt(u.variance()) == doctest::Approx(0.1).epsilon(0.05));
  CHECK(u.value_at(0.25) > u.value_at(0.6));
}

TEST_CASE("epanechnikov taps vanish outside one bandwidth") {
  const GridSpec g{-2.0, 2.0, 800};
  KdeOptions opt;
  opt.kernel = KernelKind::Epanechnikov;
  opt.bandwidth_rule = BandwidthRule::Fixed;
  opt.fixed_bandwidth = 0.5;
  const GridDensity u = kde_density({0.0}, g, opt);
  CHECK(u.mass() == doctest::Approx(1.0));
  CHECK(u.value_at(0.0) > 0.0);
  CHECK(u.value_at(0.52) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("density estimate is invariant under sample permutation") {
  std::vector<double> s = normal_sample(4000, 3);
  const GridSpec g{-6.0, 6.0, 512};
  const GridDensity a = kde_density(s, g);
  std::reverse(s.begin(), s.end());
  std::swap(s[0], s[100]);
  const GridDensity b = kde_density(s, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.n_cells; ++i)
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("smoothed moments track the sample at silverman resolution") {
  const std::vector<double> s = normal_sample(20000, 8);
  const GridSpec g{-6.0, 6.0, 1024};
  const GridDensity u = kde_density(s, g);
  const double bw = silverman_bandwidth(s);
  CHECK(u.mean() == doctest::Approx(0.0).epsilon(0.02));
  CHECK(u.variance() == doctest::Approx(1.0 + bw * bw).epsilon(0.03));
}

TEST_CASE("kde rejects empty input and nonpositive fixed bandwidths") {
  const GridSpec g{-1.0, 1.0, 64};
  CHECK_THROWS_AS(kde_density({}, g), setup_error);
  KdeOptions opt;
  opt.bandwidth_rule = BandwidthRule::Fixed;
  opt.fixed_bandwidth = 0.0;
  CHECK_THROWS_AS(kde_density({0.0}, g, opt), setup_error);
}
