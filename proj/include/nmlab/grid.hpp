#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace nmlab {

/// uniform one-dimensional cell grid on [x_min, x_max]
struct GridSpec {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_cells = 1;

  double cell_width() const { return (x_max - x_min) / static_cast<double>(n_cells); }
  double center(std::size_t i) const { return x_min + (static_cast<double>(i) + 0.5) * cell_width(); }
  double left_edge(std::size_t i) const { return x_min + static_cast<double>(i) * cell_width(); }
  bool operator==(const GridSpec& o) const {
    return x_min == o.x_min && x_max == o.x_max && n_cells == o.n_cells;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// probability density stored as cell averages on a GridSpec.
/// Construction enforces nonnegativity and unit mass (cell_width * sum = 1 within 1e-8);
/// values in (-1e-12, 0) are clipped to zero, anything lower is rejected.
class GridDensity {
 public:
  GridDensity(GridSpec spec, std::vector<double> values, double time_label);

  /// builds a density from raw nonnegative weights by rescaling them to unit mass
  static GridDensity normalized(GridSpec spec, std::vector<double> values, double time_label);

  /// unit point mass represented on the single cell containing x0
  static GridDensity dirac(const GridSpec& spec, double x0, double time_label);

  const GridSpec& grid() const { return spec_; }
  const std::vector<double>& values() const { return values_; }
  double time_label() const { return time_label_; }
  std::size_t size() const { return values_.size(); }

  /// pointwise density: linear interpolation between cell centers, constant on the
  /// outer half cells, zero outside [x_min, x_max]
  double value_at(double x) const;

  double mass() const;
  double mean() const;
  double variance() const;
  double max_value() const;

  /// cumulative mass strictly left of x (piecewise linear, density constant per cell)
  double cdf(double x) const;
  /// inverse of cdf for p in [0, 1]
  double quantile(double p) const;
  /// integral of the density over [a, b], exact for the piecewise constant representation
  double mass_between(double a, double b) const;

 private:
  GridDensity() = default;
  GridSpec spec_;
  std::vector<double> values_;
  double time_label_ = 0.0;
};

/// bookkeeping a solver or simulator attaches to the flow it produced
struct FlowMetadata {
  double continuity_constant = 0.0;   // max over output pairs of W1 / dt
  double mass_defect = 0.0;           // max |mass - 1| over outputs
  double clipped_mass = 0.0;          // total mass clipped away at the negativity floor
  double sup_norm = 0.0;              // max cell value over the whole run
  std::vector<std::size_t> substeps;  // explicit sub-steps taken per output interval
  std::string scheme;
};

/// time-indexed family of marginal densities on a common grid
class MarginalFlow {
 public:
  MarginalFlow(double s, std::vector<double> times, std::vector<GridDensity> densities);

  double start_time() const { return s_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  const GridDensity& density(std::size_t i) const { return densities_[i]; }
  const GridSpec& grid() const { return densities_.front().grid(); }

  /// index of the stored time equal to t (within tolerance); throws if absent
  std::size_t index_of(double t) const;
  const GridDensity& at_time(double t) const { return densities_[index_of(t)]; }

  /// cell values linearly interpolated in time between stored outputs
  std::vector<double> interpolated_values(double t) const;

  FlowMetadata meta;

 private:
  double s_;
  std::vector<double> times_;
  std::vector<GridDensity> densities_;
};

/// outcome of comparing a candidate flow against a reference flow cell by cell
struct DominationReport {
  std::vector<double> times;
  std::vector<double> ratios;        // per-time sup of nu/mu over cells with mu > eps
  std::vector<double> escaped_mass;  // per-time nu-mass sitting where mu <= eps
  double eps = 0.0;
  double escaped_budget = 0.0;
  double c_star = 0.0;               // max ratio, or +inf if escaped mass exceeds the budget
};

}  // namespace nmlab
