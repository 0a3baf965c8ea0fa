#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "nmlab/coefficients.hpp"
#include "nmlab/fv_solver.hpp"
#include "nmlab/grid.hpp"
#include "nmlab/particles.hpp"

namespace nmlab {

/// uniform bin layout on [lo, hi]
struct BinSpec {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n_bins = 1;

  double width() const { return (hi - lo) / static_cast<double>(n_bins); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
  /// bin index of x, or -1 when x falls outside [lo, hi]
  std::ptrdiff_t index(double x) const;
  /// nearest bin index with x clipped into the layout
  std::size_t index_clipped(double x) const;
};

/// row-stochastic transition table binned from sample pairs; rows with fewer
/// than min_count pairs carry no estimate and are flagged as not retained
struct ConditionalKernel {
  BinSpec y_bins;
  BinSpec z_bins;
  std::vector<double> rows;        // n_y * n_z, row-major, retained rows sum to one
  std::vector<std::size_t> counts;  // conditioning samples per row
  std::vector<bool> retained;
  double dropped_pair_fraction = 0.0;  // pairs whose y fell outside the layout

  double row_value(std::size_t i, std::size_t j) const { return rows[i * z_bins.n_bins + j]; }
};

ConditionalKernel estimate_conditional_kernel(const std::vector<double>& y,
                                              const std::vector<double>& z, const BinSpec& y_bins,
                                              const BinSpec& z_bins, std::size_t min_count = 200);

/// linearly interpolated sample quantile (copies and sorts its input)
double sample_quantile(std::vector<double> samples, double p);

struct MarkovTestOptions {
  BinSpec y_bins;
  std::size_t min_bin_count = 200;
  std::size_t n_bootstrap = 200;
  double bootstrap_level = 0.99;
  double setup_tol = 0.02;        // W1 gap allowed between the two laws at the restart time
  double pass_fraction = 0.9;     // central bins that must fall inside their noise radius
  double transport_allowance = 0.0;  // slack added to every radius (point-restart variants)
  std::uint64_t bootstrap_seed = 20240901;
};

struct MarkovBinOutcome {
  std::size_t bin = 0;
  double y_center = 0.0;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  double w1 = 0.0;
  double radius = 0.0;
  bool pass = false;
};

struct MarkovTestReport {
  double setup_w1 = 0.0;       // restart marginal versus reached marginal at time r
  bool setup_ok = false;
  std::vector<MarkovBinOutcome> central_bins;
  std::size_t n_pass = 0;
  double pass_fraction = 0.0;
  bool passed = false;
};

/// compares the conditional law of X_t given X_r (original run) with the law of
/// the restarted run conditioned the same way, bin by bin over the central
/// inter-quartile range; each bin's distance is judged against a pooled
/// two-sample bootstrap radius. run_a must store rows at r and t, run_b at the
/// same two times with its own start at r
MarkovTestReport test_nonlinear_markov(const PathStore& run_a, const PathStore& run_b, double r,
                                       double t, const MarkovTestOptions& opt);

/// probes whether the conditional law at t depends on the past beyond the time-r
/// position: within each central time-r bin the paths are split at their median
/// position at r_prime and the two halves are compared at t against a pooled
/// bootstrap radius. run must store rows at r_prime, r and t
MarkovTestReport test_past_refinement(const PathStore& run, double r_prime, double r, double t,
                                      const MarkovTestOptions& opt);

/// product test functional evaluated on one path coordinate per time
struct FddSpec {
  std::vector<double> times;
  std::vector<std::function<double(double)>> factors;
};

struct FddResult {
  double reconstructed = 0.0;
  double direct = 0.0;
  double dropped_mass = 0.0;  // weight lost to unretained kernel rows and out-of-range bins
};

/// rebuilds E[f1(X_{t1}) ... fn(X_{tn})] from the first marginal and the chain
/// of restarted transition kernels, then compares with the plain sample average
/// over the original run; restarts[i] must store rows at times[i] and times[i+1]
FddResult reconstruct_fdd(const PathStore& run_a, const std::vector<const PathStore*>& restarts,
                          const FddSpec& spec, const BinSpec& bins, std::size_t min_count = 200);

struct CkReport {
  double residual_l1 = 0.0;    // continued flow versus kernel-mixed flow at t
  double probe_mass = 0.0;     // share of the time-r mass covered by probe cells
  double quadrature_gap = 0.0; // residual shift when every other probe is kept
};

/// Chapman-Kolmogorov composition check on the grid: evolve zeta to r, then
/// compare the continued solve with the mixture of solves restarted from each
/// support cell of the time-r marginal
CkReport test_ck_violation(const CoefficientSet& c, const GridDensity& zeta, double s, double r,
                           double t, double probe_floor = 1e-10, const SolveOptions& opt = {});

/// gap at time t between the continued solve and a solve restarted from the
/// reached time-r marginal (exact flow property makes this vanish); r = s and
/// r = t degenerate to a gap of zero
double pde_flow_restart_gap(const CoefficientSet& c, const GridDensity& zeta, double s, double r,
                            double t, const SolveOptions& opt = {});

struct ParticleFlowGap {
  std::vector<double> per_seed;  // W1 at t between original and restarted clouds
  double worst = 0.0;
};

/// particle version of the restart gap: per seed, simulate (s, init) to t, then
/// resample the smoothed time-r marginal and rerun with an offset seed
ParticleFlowGap particle_flow_restart_gap(const CoefficientSet& c, const InitialDatum& init,
                                          double s, double r, double t, std::size_t n_particles,
                                          double dt, const std::vector<std::uint64_t>& seeds,
                                          const SimOptions& opt = {});

}  // namespace nmlab
