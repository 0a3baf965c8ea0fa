#include "nmlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nmlab/errors.hpp"

namespace nmlab {

namespace {

constexpr double kMassTol = 1e-8;
constexpr double kNegativeTol = 1e-12;

void check_spec(const GridSpec& spec, std::size_t n_values) {
  if (!(spec.x_max > spec.x_min))
    throw std::invalid_argument("GridDensity: x_max must exceed x_min");
  if (spec.n_cells == 0 || spec.n_cells != n_values)
    throw std::invalid_argument("GridDensity: value count does not match n_cells");
}

}  // namespace

GridDensity::GridDensity(GridSpec spec, std::vector<double> values, double time_label) {
  check_spec(spec, values.size());
  for (double& v : values) {
    if (v < 0.0) {
      if (v < -kNegativeTol)
        throw std::invalid_argument("GridDensity: negative cell value below tolerance");
      v = 0.0;
    }
    if (!std::isfinite(v)) throw numeric_error("GridDensity: non-finite cell value");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mass = sum * spec.cell_width();
  if (std::fabs(mass - 1.0) > kMassTol)
    throw std::invalid_argument("GridDensity: mass " + std::to_string(mass) +
                                " deviates from 1 beyond tolerance");
  spec_ = spec;
  values_ = std::move(values);
  time_label_ = time_label;
}

GridDensity GridDensity::normalized(GridSpec spec, std::vector<double> values, double time_label) {
  check_spec(spec, values.size());
  double sum = 0.0;
  for (double& v : values) {
    if (!std::isfinite(v)) throw numeric_error("GridDensity: non-finite cell value");
    if (v < 0.0) {
      if (v < -kNegativeTol)
        throw std::invalid_argument("GridDensity: negative cell value below tolerance");
      v = 0.0;
    }
    sum += v;
  }
  if (sum <= 0.0) throw std::invalid_argument("GridDensity: cannot normalize zero weights");
  const double scale = 1.0 / (sum * spec.cell_width());
  for (double& v : values) v *= scale;
  GridDensity out;
  out.spec_ = spec;
  out.values_ = std::move(values);
  out.time_label_ = time_label;
  return out;
}

GridDensity GridDensity::dirac(const GridSpec& spec, double x0, double time_label) {
  if (x0 < spec.x_min || x0 > spec.x_max)
    throw std::invalid_argument("GridDensity: dirac location outside the grid");
  std::vector<double> v(spec.n_cells, 0.0);
  auto idx = static_cast<std::size_t>((x0 - spec.x_min) / spec.cell_width());
  if (idx >= spec.n_cells) idx = spec.n_cells - 1;
  v[idx] = 1.0 / spec.cell_width();
  return GridDensity(spec, std::move(v), time_label);
}

double GridDensity::value_at(double x) const {
  if (x < spec_.x_min || x > spec_.x_max) return 0.0;
  const double h = spec_.cell_width();
  const double pos = (x - spec_.x_min) / h - 0.5;  // fractional index in center coordinates
  if (pos <= 0.0) return values_.front();
  const double last = static_cast<double>(values_.size() - 1);
  if (pos >= last) return values_.back();
  const auto i = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(i);
  return values_[i] * (1.0 - w) + values_[i + 1] * w;
}

double GridDensity::mass() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum * spec_.cell_width();
}

double GridDensity::mean() const {
  const double h = spec_.cell_width();
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) acc += spec_.center(i) * values_[i];
  return acc * h;
}

double GridDensity::variance() const {
  const double h = spec_.cell_width();
  const double mu = mean();
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double d = spec_.center(i) - mu;
    acc += d * d * values_[i];
  }
  // within-cell spread of the piecewise constant representation
  return acc * h + h * h / 12.0;
}

double GridDensity::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

double GridDensity::cdf(double x) const {
  if (x <= spec_.x_min) return 0.0;
  if (x >= spec_.x_max) return 1.0;
  const double h = spec_.cell_width();
  const auto i = static_cast<std::size_t>((x - spec_.x_min) / h);
  double acc = 0.0;
  for (std::size_t j = 0; j < i; ++j) acc += values_[j] * h;
  acc += values_[std::min(i, values_.size() - 1)] * (x - spec_.left_edge(i));
  return std::min(acc, 1.0);
}

double GridDensity::quantile(double p) const {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("GridDensity: quantile level outside [0,1]");
  const double h = spec_.cell_width();
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double cell = values_[i] * h;
    if (acc + cell >= p && cell > 0.0)
      return spec_.left_edge(i) + (p - acc) / values_[i];
    acc += cell;
  }
  return spec_.x_max;
}

double GridDensity::mass_between(double a, double b) const {
  if (b <= a) return 0.0;
  return cdf(b) - cdf(a);
}

MarginalFlow::MarginalFlow(double s, std::vector<double> times, std::vector<GridDensity> densities)
    : s_(s), times_(std::move(times)), densities_(std::move(densities)) {
  if (times_.empty() || times_.size() != densities_.size())
    throw std::invalid_argument("MarginalFlow: need one density per output time");
  if (times_.front() < s_ - 1e-12)
    throw std::invalid_argument("MarginalFlow: first output time precedes the start time");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw std::invalid_argument("MarginalFlow: output times must be strictly increasing");
  for (const auto& d : densities_)
    if (d.grid() != densities_.front().grid())
      throw std::invalid_argument("MarginalFlow: all densities must share one grid");
}

std::size_t MarginalFlow::index_of(double t) const {
  const double span = times_.back() - times_.front();
  const double tol = 1e-9 * std::max(1.0, span);
  for (std::size_t i = 0; i < times_.size(); ++i)
    if (std::fabs(times_[i] - t) <= tol) return i;
  throw std::invalid_argument("MarginalFlow: time " + std::to_string(t) + " is not a stored output");
}

std::vector<double> MarginalFlow::interpolated_values(double t) const {
  if (t <= times_.front()) return densities_.front().values();
  if (t >= times_.back()) return densities_.back().values();
  std::size_t hi = 1;
  while (times_[hi] < t) ++hi;
  const std::size_t lo = hi - 1;
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  const auto& a = densities_[lo].values();
  const auto& b = densities_[hi].values();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * (1.0 - w) + b[i] * w;
  return out;
}

}  // namespace nmlab
