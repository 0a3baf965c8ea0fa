#pragma once

#include <vector>

#include "nmlab/grid.hpp"

namespace nmlab {

/// right-continuous cumulative distribution function with finitely many knots.
/// Between knots the function is linear; at a knot it may jump, so both empirical
/// (pure step) and grid (piecewise linear) distributions are represented exactly.
class CdfCurve {
 public:
  /// continuous piecewise-linear CDF with knots at the cell edges of a density
  static CdfCurve from_density(const GridDensity& u);
  /// empirical CDF of a sample set (the input need not be sorted)
  static CdfCurve from_samples(std::vector<double> samples);

  double operator()(double x) const;        // right-continuous evaluation
  double left_limit(double x) const;

  const std::vector<double>& knots() const { return x_; }

  friend double wasserstein1(const CdfCurve& a, const CdfCurve& b);
  friend double ks_statistic(const CdfCurve& a, const CdfCurve& b);

 private:
  std::vector<double> x_;        // strictly increasing knot positions
  std::vector<double> v_left_;   // F(x_i-)
  std::vector<double> v_right_;  // F(x_i+)
};

/// exact L1 distance between the CDFs, i.e. the 1-Wasserstein distance on the line
double wasserstein1(const CdfCurve& a, const CdfCurve& b);
double wasserstein1(const GridDensity& a, const GridDensity& b);
double wasserstein1(const std::vector<double>& samples, const GridDensity& b);
double wasserstein1(const std::vector<double>& samples_a, const std::vector<double>& samples_b);

/// sup-norm distance between the CDFs (Kolmogorov-Smirnov statistic)
double ks_statistic(const CdfCurve& a, const CdfCurve& b);

/// L1 distance between two densities on the same grid
double l1_distance(const GridDensity& a, const GridDensity& b);

/// total variation distance between two probability vectors of equal length
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace nmlab
