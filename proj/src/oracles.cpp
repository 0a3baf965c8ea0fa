#include "nmlab/oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nmlab/errors.hpp"

namespace nmlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// surface area of the unit sphere in R^d
double sphere_area(int d) {
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// mass of the profile (C - k r^2)_+^{1/(m-1)} over R^d for a trial constant C.
/// The substitution r = R sin(theta) removes the edge singularity of the integrand.
double profile_mass(double m, int d, double k, double C) {
  const double R = std::sqrt(C / k);
  const double q = 1.0 / (m - 1.0);
  const std::size_t n = 4096;
  const double dth = 0.5 * kPi / static_cast<double>(n);
  double acc = 0.0;
  // composite Simpson in theta
  for (std::size_t i = 0; i <= n; ++i) {
    const double th = dth * static_cast<double>(i);
    const double r = R * std::sin(th);
    const double cs = std::cos(th);
    const double f = std::pow(r, d - 1) * std::pow(C * cs * cs, q) * R * cs;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f;
  }
  acc *= dth / 3.0;
  return (d == 1 ? 2.0 : sphere_area(d)) * acc;
}

}  // namespace

BarenblattShape barenblatt_shape(double m, int d) {
  if (m <= 1.0)
    throw std::invalid_argument(
        "barenblatt_shape: m <= 1 has no compact source solution; use heat_kernel");
  if (d < 1) throw std::invalid_argument("barenblatt_shape: dimension must be >= 1");
  BarenblattShape s;
  s.alpha = d / (d * (m - 1.0) + 2.0);
  s.beta_exp = s.alpha / d;
  s.k = s.alpha * (m - 1.0) / (2.0 * m * d);
  s.C = 0.0;
  return s;
}

double barenblatt_normalization(double m, int d) {
  const BarenblattShape s = barenblatt_shape(m, d);
  double lo = 1e-8, hi = 1e8;
  if (profile_mass(m, d, s.k, lo) > 1.0 || profile_mass(m, d, s.k, hi) < 1.0)
    throw numeric_error("barenblatt_normalization: bracketing failed");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (profile_mass(m, d, s.k, mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double barenblatt_support_radius(double m, int d, double tau) {
  if (tau <= 0.0) throw std::domain_error("barenblatt_support_radius: requires tau > 0");
  BarenblattShape s = barenblatt_shape(m, d);
  s.C = barenblatt_normalization(m, d);
  return std::sqrt(s.C / s.k) * std::pow(tau, s.beta_exp);
}

GridDensity barenblatt(double m, int d, double s, double x0, double t, const GridSpec& grid) {
  if (!(t > s)) throw std::domain_error("barenblatt: requires t > s");
  BarenblattShape sh = barenblatt_shape(m, d);
  sh.C = barenblatt_normalization(m, d);
  const double tau = t - s;
  const double q = 1.0 / (m - 1.0);
  const double ta = std::pow(tau, -sh.alpha);
  const double tb = std::pow(tau, -2.0 * sh.beta_exp);
  std::vector<double> v(grid.n_cells);
  if (d == 1) {
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
      const double dx = grid.center(i) - x0;
      const double arg = sh.C - sh.k * dx * dx * tb;
      v[i] = arg > 0.0 ? ta * std::pow(arg, q) : 0.0;
    }
  } else {
    // radial mass density of the distance from x0
    const double area = sphere_area(d);
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
      const double r = grid.center(i) - x0;
      if (r < 0.0) { v[i] = 0.0; continue; }
      const double arg = sh.C - sh.k * r * r * tb;
      v[i] = arg > 0.0 ? area * std::pow(r, d - 1) * ta * std::pow(arg, q) : 0.0;
    }
  }
  double raw = 0.0;
  for (double w : v) raw += w;
  if (raw * grid.cell_width() < 0.5)
    throw std::invalid_argument("barenblatt: grid does not cover the support");
  return GridDensity::normalized(grid, std::move(v), t);
}

GridDensity heat_kernel(double s, double x0, double t, const GridSpec& grid) {
  if (!(t > s)) throw std::domain_error("heat_kernel: requires t > s");
  const double sigma = std::sqrt(2.0 * (t - s));
  const double inv = 1.0 / (sigma * std::sqrt(2.0));
  std::vector<double> v(grid.n_cells);
  const double h = grid.cell_width();
  double prev = std::erf((grid.left_edge(0) - x0) * inv);
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const double next = std::erf((grid.left_edge(i + 1) - x0) * inv);
    v[i] = 0.5 * (next - prev) / h;  // exact cell average
    prev = next;
  }
  return GridDensity::normalized(grid, std::move(v), t);
}

namespace {

/// one linear segment of the initial CDF: H(y) = alpha + gamma (y - p) on [p, q]
struct CdfSegment {
  double p, q, alpha, gamma;
};

/// Cole-Hopf numerator and denominator contributions of one segment at position x.
/// Completing the square absorbs the linear CDF piece into a shifted Gaussian:
/// the segment integrates in closed form over erf and exp, with the exponent E
/// returned separately so the caller can rescale before summation.
struct SegmentTerms {
  double E, g0, g1;
};

SegmentTerms segment_terms(const CdfSegment& s, double x, double tau) {
  const double c = x - s.gamma * tau;
  const double scale = std::sqrt(4.0 * tau);
  SegmentTerms t;
  t.E = -0.5 * s.alpha + 0.5 * s.gamma * (s.p - x) + 0.25 * s.gamma * s.gamma * tau;
  const double zq = (s.q - c) / scale;
  const double zp = (s.p - c) / scale;
  t.g0 = 0.5 * std::sqrt(kPi) * scale * (std::erf(zq) - std::erf(zp));
  t.g1 = (x - c) * t.g0 + 2.0 * tau * (std::exp(-zq * zq) - std::exp(-zp * zp));
  return t;
}

}  // namespace

GridDensity cole_hopf_burgers(const GridDensity& zeta, double s, double t, const GridSpec& grid) {
  if (!(t > s)) throw std::domain_error("cole_hopf_burgers: requires t > s");
  const double tau = t - s;

  // piecewise-linear initial CDF: one segment per cell of zeta, flat tails outside.
  // The tails are truncated far beyond any Gaussian reach instead of at infinity.
  const GridSpec& zg = zeta.grid();
  const double reach = 16.0 * std::sqrt(2.0 * tau) + (zg.x_max - zg.x_min);
  const double far_l = std::min(grid.x_min, zg.x_min) - reach;
  const double far_r = std::max(grid.x_max, zg.x_max) + reach;
  std::vector<CdfSegment> segs;
  segs.reserve(zg.n_cells + 2);
  segs.push_back({far_l, zg.x_min, 0.0, 0.0});
  double acc = 0.0;
  const double zh = zg.cell_width();
  for (std::size_t i = 0; i < zg.n_cells; ++i) {
    const double gi = zeta.values()[i];
    segs.push_back({zg.left_edge(i), zg.left_edge(i + 1), acc, gi});
    acc += gi * zh;
  }
  segs.push_back({zg.x_max, far_r, acc, 0.0});

  // evaluate u as a two-point Gauss cell average on the output grid
  const double gl = 0.5 / std::sqrt(3.0);
  const double h = grid.cell_width();
  auto eval = [&](double x) {
    double emax = -1e300;
    std::vector<SegmentTerms> terms;
    terms.reserve(segs.size());
    for (const auto& sg : segs) {
      // segments beyond the Gaussian window contribute below double precision
      if (sg.q < x - reach || sg.p > x + reach) continue;
      terms.push_back(segment_terms(sg, x, tau));
      if (terms.back().E > emax) emax = terms.back().E;
    }
    double num = 0.0, den = 0.0;
    for (const auto& tm : terms) {
      const double w = std::exp(tm.E - emax);
      num += w * tm.g1;
      den += w * tm.g0;
    }
    if (den <= 0.0) throw numeric_error("cole_hopf_burgers: quadrature underflow");
    return num / (tau * den);
  };
  std::vector<double> v(grid.n_cells);
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const double c = grid.center(i);
    v[i] = 0.5 * (eval(c - gl * h) + eval(c + gl * h));
  }
  return GridDensity(grid, std::move(v), t);
}

}  // namespace nmlab
