#pragma once

#include <vector>

#include "nmlab/grid.hpp"

namespace nmlab {

enum class KernelKind { Gaussian, Epanechnikov };
enum class BandwidthRule { Silverman, Fixed };

struct KdeOptions {
  KernelKind kernel = KernelKind::Gaussian;
  BandwidthRule bandwidth_rule = BandwidthRule::Silverman;
  double fixed_bandwidth = 0.0;  // required positive when the rule is Fixed
  double tap_reach = 6.0;        // truncation radius of the Gaussian kernel, in bandwidths
};

/// 0.9 min(std, IQR/1.34) N^{-1/5}; throws degenerate_bandwidth_error when the
/// sample spread vanishes
double silverman_bandwidth(const std::vector<double>& samples);

/// kernel density estimate on a fixed grid: samples are spread over the two
/// nearest cells (linear binning), the histogram is convolved with a discrete
/// normalized kernel, and the result is rescaled to unit mass so that kernel
/// mass truncated at the domain walls is folded back in
GridDensity kde_density(const std::vector<double>& samples, const GridSpec& grid,
                        const KdeOptions& opt = {}, double time_label = 0.0);

}  // namespace nmlab
