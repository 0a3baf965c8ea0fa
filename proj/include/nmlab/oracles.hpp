#pragma once

#include "nmlab/grid.hpp"

namespace nmlab {

/// self-similarity exponents and profile constant of the source-type solution
struct BarenblattShape {
  double alpha;     // time decay exponent of the peak
  double beta_exp;  // space scaling exponent
  double k;         // parabolic profile curvature
  double C;         // normalization constant fixing unit mass
};

/// exponents alpha = d/(d(m-1)+2), beta = alpha/d, k = alpha(m-1)/(2md) without C
BarenblattShape barenblatt_shape(double m, int d);

/// profile constant C such that the source solution has unit mass,
/// found by bisection on a quadrature of the profile integral
double barenblatt_normalization(double m, int d);

/// source-type solution of the porous medium equation started at (s, x0), evaluated at
/// time t on the grid. For d = 1 the density itself is returned; for d >= 2 the grid is
/// radial about x0 and the returned values are the radial mass density of |X - x0|.
GridDensity barenblatt(double m, int d, double s, double x0, double t, const GridSpec& grid);

/// radius of the support at age tau = t - s
double barenblatt_support_radius(double m, int d, double tau);

/// Gaussian kernel density with variance 2(t-s), exact cell averages via erf
GridDensity heat_kernel(double s, double x0, double t, const GridSpec& grid);

/// solution of the viscous Burgers equation u_t = u_xx - (u^2/2)_x started from zeta at
/// time s, evaluated at time t > s. The Cole-Hopf integrals close over erf segment by
/// segment of the piecewise-linear initial CDF, with a per-segment exponent shift, so the
/// result is exact to rounding
GridDensity cole_hopf_burgers(const GridDensity& zeta, double s, double t, const GridSpec& grid);

}  // namespace nmlab
