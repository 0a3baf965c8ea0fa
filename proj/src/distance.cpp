#include "nmlab/distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nmlab {

CdfCurve CdfCurve::from_density(const GridDensity& u) {
  const auto& spec = u.grid();
  const double h = spec.cell_width();
  CdfCurve c;
  c.x_.reserve(spec.n_cells + 1);
  c.v_left_.reserve(spec.n_cells + 1);
  c.v_right_.reserve(spec.n_cells + 1);
  double acc = 0.0;
  c.x_.push_back(spec.x_min);
  c.v_left_.push_back(0.0);
  c.v_right_.push_back(0.0);
  for (std::size_t i = 0; i < spec.n_cells; ++i) {
    acc += u.values()[i] * h;
    c.x_.push_back(spec.left_edge(i + 1));
    c.v_left_.push_back(acc);
    c.v_right_.push_back(acc);
  }
  // remove the mass-tolerance wiggle so the curve ends exactly at one
  const double total = acc;
  if (total <= 0.0) throw std::invalid_argument("CdfCurve: density carries no mass");
  for (std::size_t i = 0; i < c.v_left_.size(); ++i) {
    c.v_left_[i] /= total;
    c.v_right_[i] /= total;
  }
  return c;
}

CdfCurve CdfCurve::from_samples(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("CdfCurve: empty sample set");
  std::sort(samples.begin(), samples.end());
  if (!std::isfinite(samples.front()) || !std::isfinite(samples.back()))
    throw std::invalid_argument("CdfCurve: non-finite sample");
  const double n = static_cast<double>(samples.size());
  CdfCurve c;
  std::size_t i = 0;
  std::size_t seen = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    c.x_.push_back(samples[i]);
    c.v_left_.push_back(static_cast<double>(seen) / n);
    seen += j - i;
    c.v_right_.push_back(static_cast<double>(seen) / n);
    i = j;
  }
  return c;
}

double CdfCurve::operator()(double x) const {
  if (x < x_.front()) return 0.0;
  if (x >= x_.back()) return v_right_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
  const std::size_t lo = hi - 1;
  if (x == x_[lo]) return v_right_[lo];
  const double w = (x - x_[lo]) / (x_[hi] - x_[lo]);
  return v_right_[lo] * (1.0 - w) + v_left_[hi] * w;
}

double CdfCurve::left_limit(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x > x_.back()) return v_right_.back();
  const auto it = std::lower_bound(x_.begin(), x_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
  if (hi < x_.size() && x == x_[hi]) return v_left_[hi];
  const std::size_t lo = hi - 1;
  const double w = (x - x_[lo]) / (x_[hi] - x_[lo]);
  return v_right_[lo] * (1.0 - w) + v_left_[hi] * w;
}

double wasserstein1(const CdfCurve& a, const CdfCurve& b) {
  // merged knot sweep; between consecutive knots both CDFs are linear,
  // so the difference is integrated exactly with a sign-change split
  std::vector<double> knots;
  knots.reserve(a.x_.size() + b.x_.size());
  std::merge(a.x_.begin(), a.x_.end(), b.x_.begin(), b.x_.end(), std::back_inserter(knots));
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double l = knots[i];
    const double r = knots[i + 1];
    const double d0 = a(l) - b(l);
    const double d1 = a.left_limit(r) - b.left_limit(r);
    const double w = r - l;
    if (d0 * d1 >= 0.0) {
      total += 0.5 * (std::fabs(d0) + std::fabs(d1)) * w;
    } else {
      const double cross = w * d0 / (d0 - d1);
      total += 0.5 * (std::fabs(d0) * cross + std::fabs(d1) * (w - cross));
    }
  }
  return total;
}

double wasserstein1(const GridDensity& a, const GridDensity& b) {
  return wasserstein1(CdfCurve::from_density(a), CdfCurve::from_density(b));
}

double wasserstein1(const std::vector<double>& samples, const GridDensity& b) {
  return wasserstein1(CdfCurve::from_samples(samples), CdfCurve::from_density(b));
}

double wasserstein1(const std::vector<double>& samples_a, const std::vector<double>& samples_b) {
  return wasserstein1(CdfCurve::from_samples(samples_a), CdfCurve::from_samples(samples_b));
}

double ks_statistic(const CdfCurve& a, const CdfCurve& b) {
  double sup = 0.0;
  for (double x : a.x_) {
    sup = std::max(sup, std::fabs(a(x) - b(x)));
    sup = std::max(sup, std::fabs(a.left_limit(x) - b.left_limit(x)));
  }
  for (double x : b.x_) {
    sup = std::max(sup, std::fabs(a(x) - b(x)));
    sup = std::max(sup, std::fabs(a.left_limit(x) - b.left_limit(x)));
  }
  return sup;
}

double l1_distance(const GridDensity& a, const GridDensity& b) {
  if (a.grid() != b.grid())
    throw std::invalid_argument("l1_distance: densities live on different grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a.values()[i] - b.values()[i]);
  return acc * a.grid().cell_width();
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("total_variation: probability vectors differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::fabs(p[i] - q[i]);
  return 0.5 * acc;
}

}  // namespace nmlab
