#include "nmlab/kde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nmlab/errors.hpp"

namespace nmlab {

namespace {

/// linearly interpolated quantile of a sorted sample, matching the common
/// (n - 1) * p positioning convention
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[lo + 1];
}

}  // namespace

double silverman_bandwidth(const std::vector<double>& samples) {
  if (samples.size() < 2)
    throw degenerate_bandwidth_error(
        "silverman_bandwidth: need at least two samples, got " + std::to_string(samples.size()));
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= n;
  const double sd = std::sqrt(var);

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = (sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25)) / 1.34;

  const double lo = std::min(sd, iqr);
  const double spread = lo > 0.0 ? lo : std::max(sd, iqr);
  if (!(spread > 0.0))
    throw degenerate_bandwidth_error(
        "silverman_bandwidth: sample spread is zero, cannot pick a bandwidth");
  return 0.9 * spread * std::pow(n, -0.2);
}

GridDensity kde_density(const std::vector<double>& samples, const GridSpec& grid,
                        const KdeOptions& opt, double time_label) {
  if (samples.empty()) throw setup_error("kde_density: empty sample set");
  if (grid.n_cells < 2) throw setup_error("kde_density: grid needs at least two cells");

  double bw;
  if (opt.bandwidth_rule == BandwidthRule::Fixed) {
    if (!(opt.fixed_bandwidth > 0.0))
      throw setup_error("kde_density: fixed bandwidth must be positive");
    bw = opt.fixed_bandwidth;
  } else {
    bw = silverman_bandwidth(samples);
  }

  const std::size_t n = grid.n_cells;
  const double h = grid.cell_width();

  std::vector<double> hist(n, 0.0);
  for (double x : samples) {
    double pos = (x - grid.x_min) / h - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(n - 1));
    std::size_t i0 = std::min(static_cast<std::size_t>(pos), n - 2);
    const double w = pos - static_cast<double>(i0);
    hist[i0] += 1.0 - w;
    hist[i0 + 1] += w;
  }

  const double reach = opt.kernel == KernelKind::Gaussian ? opt.tap_reach : 1.0;
  const auto m_taps = static_cast<std::size_t>(
      std::max(1.0, std::ceil(reach * bw / h)));
  std::vector<double> taps(2 * m_taps + 1, 0.0);
  double tap_sum = 0.0;
  for (std::size_t j = 0; j < taps.size(); ++j) {
    const double z = (static_cast<double>(j) - static_cast<double>(m_taps)) * h / bw;
    taps[j] = opt.kernel == KernelKind::Gaussian ? std::exp(-0.5 * z * z)
                                                 : std::max(0.0, 1.0 - z * z);
    tap_sum += taps[j];
  }
  if (!(tap_sum > 0.0))
    throw degenerate_bandwidth_error("kde_density: kernel taps sum to zero");
  for (double& t : taps) t /= tap_sum;

  std::vector<double> dens(n, 0.0);
  const auto nn = static_cast<std::ptrdiff_t>(n);
  const auto mm = static_cast<std::ptrdiff_t>(m_taps);
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(-mm, -i);
    const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(mm, nn - 1 - i);
    double acc = 0.0;
    for (std::ptrdiff_t j = j_lo; j <= j_hi; ++j)
      acc += hist[static_cast<std::size_t>(i + j)] * taps[static_cast<std::size_t>(mm - j)];
    dens[static_cast<std::size_t>(i)] = acc;
  }

  return GridDensity::normalized(grid, std::move(dens), time_label);
}

}  // namespace nmlab
