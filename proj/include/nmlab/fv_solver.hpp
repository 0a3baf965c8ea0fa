#pragma once

#include <cstddef>
#include <vector>

#include "nmlab/coefficients.hpp"
#include "nmlab/grid.hpp"

namespace nmlab {

struct SolveOptions {
  double cfl_diffusion = 0.4;    // dt <= cfl_diffusion * h^2 / (2 max beta'(u))
  double cfl_advection = 0.9;    // dt <= cfl_advection * h / max |velocity|
  std::size_t max_substeps_per_interval = 4000000;  // stiffness cap
  double boundary_mass_tol = 1e-6;  // mass allowed within ten cells of the boundary
};

/// explicit conservative finite-volume solve of the nonlinear equation
///   d_t u = d_xx beta(u) - d_x (D b0(u) u)        (Nemytskii)
///   d_t u = (sigma^2/2) d_xx u - d_x (V[u] u)     (mean field, V[u] = int h du)
/// with no-flux boundaries on the grid of zeta. Outputs at the given times,
/// the first of which must equal s. Sub-steps follow the CFL bound recomputed
/// at every output interval.
MarginalFlow solve_nlfpke(const CoefficientSet& c, const GridDensity& zeta, double s,
                          const std::vector<double>& times, const SolveOptions& opt = {});

/// same discretization with coefficients frozen along a given flow:
///   d_t nu = d_xx (a(t,x) nu) - d_x (b(t,x) nu),
/// a = beta(u)/u and b = D b0(u) evaluated on the frozen flow, linearly
/// interpolated in time between its outputs
MarginalFlow solve_linearized_fpke(const CoefficientSet& c, const MarginalFlow& frozen,
                                   const GridDensity& eta, const std::vector<double>& times,
                                   const SolveOptions& opt = {});

/// per-time supremum of nu/mu over cells where mu exceeds eps; nu-mass on the
/// remaining cells is tallied and pushes c_star to infinity beyond the budget
DominationReport check_domination(const MarginalFlow& nu, const MarginalFlow& mu,
                                  double eps = 1e-12, double escaped_budget = 1e-8);

/// default simulation domain: the initial datum's extent widened to cover the
/// dynamics until horizon tau (support radius for compacton flows, standard
/// deviations for diffusive ones)
GridSpec default_domain(const CoefficientSet& c, double center, double half_extent_hint,
                        double tau, std::size_t n_cells);

}  // namespace nmlab
