#include "doctest.h"

#include <cmath>
#include <cstdint>

#include "nmlab/rng.hpp"

using namespace nmlab;

TEST_CASE("philox block reproduces the all-zero known answer") {
  const auto words = philox::block({0, 0, 0, 0}, {0, 0});
  CHECK(words[0] == 0x6627e8d5u);
  CHECK(words[1] == 0xe169c58du);
  CHECK(words[2] == 0xbc57ac4cu);
  CHECK(words[3] == 0x9b00dbd8u);
}

TEST_CASE("draws are pure functions of their address") {
  const CounterRng a(42);
  const CounterRng b(42);
  for (std::uint64_t p : {0ull, 1ull, 77ull, (1ull << 40)}) {
    for (std::uint32_t s : {0u, 1u, 1000u}) {
      CHECK(a.uniform(p, s) == b.uniform(p, s));
      CHECK(a.normal(p, s) == b.normal(p, s));
    }
  }
  CHECK(a.uniform(0, 0) != CounterRng(43).uniform(0, 0));
}

TEST_CASE("purposes address disjoint streams") {
  const CounterRng rng(7);
  const double dyn = rng.uniform(5, 3, DrawPurpose::dynamics);
  const double ini = rng.uniform(5, 3, DrawPurpose::initial);
  const double res = rng.uniform(5, 3, DrawPurpose::resample);
  const double boo = rng.uniform(5, 3, DrawPurpose::bootstrap);
  CHECK(dyn != ini);
  CHECK(dyn != res);
  CHECK(dyn != boo);
  CHECK(ini != res);
}

TEST_CASE("uniform pairs respect their half-open ranges") {
  const CounterRng rng(123);
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const auto [u1, u2] = rng.uniform_pair(i, 0);
    CHECK(u1 > 0.0);
    CHECK(u1 <= 1.0);
    CHECK(u2 >= 0.0);
    CHECK(u2 < 1.0);
  }
}

TEST_CASE("normal draws have standard moments at Monte Carlo accuracy") {
  const CounterRng rng(2024);
  const std::size_t n = 200000;
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double z = rng.normal(i, 0);
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sumsq / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}
