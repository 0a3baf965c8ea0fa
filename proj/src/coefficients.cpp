#include "nmlab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nmlab {

ScalarFn ScalarFn::zero() { return ScalarFn{}; }

ScalarFn ScalarFn::constant(double c) {
  ScalarFn f;
  f.kind_ = Kind::Constant;
  f.c_ = c;
  return f;
}

ScalarFn ScalarFn::linear(double c) {
  ScalarFn f;
  f.kind_ = Kind::Linear;
  f.c_ = c;
  return f;
}

ScalarFn ScalarFn::power(double c, double p) {
  if (p < 1.0) throw std::invalid_argument("ScalarFn: power exponent must be >= 1");
  ScalarFn f;
  f.kind_ = Kind::Power;
  f.c_ = c;
  f.p_ = p;
  return f;
}

ScalarFn ScalarFn::abs_power(double c, double p) {
  if (p < 0.0) throw std::invalid_argument("ScalarFn: abs_power exponent must be >= 0");
  ScalarFn f;
  f.kind_ = Kind::AbsPower;
  f.c_ = c;
  f.p_ = p;
  return f;
}

ScalarFn ScalarFn::bump(double amp, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("ScalarFn: bump radius must be positive");
  ScalarFn f;
  f.kind_ = Kind::Bump;
  f.c_ = amp;
  f.p_ = radius;
  return f;
}

ScalarFn ScalarFn::table(std::vector<double> z, std::vector<double> fvals) {
  if (z.size() < 2 || z.size() != fvals.size())
    throw std::invalid_argument("ScalarFn: table needs at least two matching nodes");
  for (std::size_t i = 1; i < z.size(); ++i)
    if (!(z[i] > z[i - 1]))
      throw std::invalid_argument("ScalarFn: table abscissae must be strictly increasing");
  ScalarFn f;
  f.kind_ = Kind::Table;
  f.tz_ = std::move(z);
  f.tf_ = std::move(fvals);
  return f;
}

double ScalarFn::operator()(double z) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return c_;
    case Kind::Linear: return c_ * z;
    case Kind::Power:
      return c_ * std::pow(std::fabs(z), p_ - 1.0) * z;
    case Kind::AbsPower:
      return c_ * std::pow(std::fabs(z), p_);
    case Kind::Bump: {
      const double q = z / p_;
      const double w = 1.0 - q * q;
      return w > 0.0 ? c_ * w * w : 0.0;
    }
    case Kind::Table: {
      if (z < tz_.front() || z > tz_.back())
        throw std::domain_error("ScalarFn: tabulated function evaluated outside its range");
      const auto it = std::upper_bound(tz_.begin(), tz_.end(), z);
      if (it == tz_.end()) return tf_.back();
      const std::size_t hi = static_cast<std::size_t>(it - tz_.begin());
      const std::size_t lo = hi - 1;
      const double w = (z - tz_[lo]) / (tz_[hi] - tz_[lo]);
      return tf_[lo] * (1.0 - w) + tf_[hi] * w;
    }
  }
  return 0.0;
}

double ScalarFn::slope(double z) const {
  switch (kind_) {
    case Kind::Zero:
    case Kind::Constant: return 0.0;
    case Kind::Linear: return c_;
    case Kind::Power:
      return c_ * p_ * std::pow(std::fabs(z), p_ - 1.0);
    case Kind::AbsPower: {
      if (p_ == 0.0) return 0.0;
      const double s = z >= 0.0 ? 1.0 : -1.0;
      return c_ * p_ * std::pow(std::fabs(z), p_ - 1.0) * s;
    }
    case Kind::Bump: {
      const double q = z / p_;
      const double w = 1.0 - q * q;
      return w > 0.0 ? c_ * 2.0 * w * (-2.0 * q / p_) : 0.0;
    }
    case Kind::Table: {
      const double zc = std::clamp(z, tz_.front(), tz_.back());
      auto it = std::upper_bound(tz_.begin(), tz_.end(), zc);
      std::size_t hi = it == tz_.end() ? tz_.size() - 1 : static_cast<std::size_t>(it - tz_.begin());
      if (hi == 0) hi = 1;
      return (tf_[hi] - tf_[hi - 1]) / (tz_[hi] - tz_[hi - 1]);
    }
  }
  return 0.0;
}

std::string ScalarFn::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Zero: os << "0"; break;
    case Kind::Constant: os << c_; break;
    case Kind::Linear: os << c_ << "*z"; break;
    case Kind::Power: os << c_ << "*|z|^" << (p_ - 1.0) << "*z"; break;
    case Kind::AbsPower: os << c_ << "*|z|^" << p_; break;
    case Kind::Bump: os << c_ << "*(1-(z/" << p_ << ")^2)^2"; break;
    case Kind::Table: os << "table[" << tz_.size() << "]"; break;
  }
  return os.str();
}

void validate_coefficients(const CoefficientSet& c) {
  if (c.dim < 1)
    throw std::invalid_argument("CoefficientSet: dim must be >= 1");
  if (c.m < 1.0) throw std::invalid_argument("CoefficientSet: exponent m must be >= 1");
  if (c.eps_floor <= 0.0) throw std::invalid_argument("CoefficientSet: eps_floor must be positive");
  if (c.kind == CoefficientKind::Nemytskii) {
    if (!c.h.is_zero())
      throw std::invalid_argument("CoefficientSet: Nemytskii sets must leave h empty");
  } else {
    if (!c.beta.is_zero() || !c.b0.is_zero())
      throw std::invalid_argument("CoefficientSet: mean-field sets must leave beta and b0 empty");
    if (c.sigma_const < 0.0)
      throw std::invalid_argument("CoefficientSet: sigma must be nonnegative");
  }
}

void validate_on_range(const CoefficientSet& c, double u_max, std::size_t n_samples) {
  if (c.kind != CoefficientKind::Nemytskii) return;
  if (u_max <= 0.0 || n_samples < 2)
    throw std::invalid_argument("validate_on_range: need a positive range and >= 2 samples");
  if (std::fabs(c.beta(0.0)) > 1e-14)
    throw std::invalid_argument("CoefficientSet: beta(0) must vanish");
  double prev = c.beta(0.0);
  for (std::size_t i = 1; i < n_samples; ++i) {
    const double z = u_max * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    const double b = c.beta(z);
    if (b < prev - 1e-12)
      throw std::invalid_argument("CoefficientSet: beta is not nondecreasing on [0, u_max]");
    prev = b;
    if (!std::isfinite(c.b0(z)))
      throw std::invalid_argument("CoefficientSet: b0 is unbounded on [0, u_max]");
  }
}

double drift_from_value(const CoefficientSet& c, double u_at_x, double x) {
  if (c.kind == CoefficientKind::MeanField) return u_at_x;  // the precomputed average
  if (c.b0.is_zero()) return 0.0;
  return c.b0(u_at_x) * (c.D.is_zero() ? 0.0 : c.D(x));
}

double drift_at(const CoefficientSet& c, const GridDensity& u, double x) {
  if (x < u.grid().x_min || x > u.grid().x_max)
    throw std::domain_error("drift_at: x lies outside the density's domain");
  if (c.kind == CoefficientKind::MeanField) return mean_field_drift(c, u);
  return drift_from_value(c, u.value_at(x), x);
}

double a_coefficient(const CoefficientSet& c, double u_val) {
  if (c.kind == CoefficientKind::MeanField) return 0.5 * c.sigma_const * c.sigma_const;
  const double uf = std::max(u_val, c.eps_floor);
  // power-law nonlinearities cancel analytically: beta(u)/u = c * u^(p-1)
  switch (c.beta.kind()) {
    case ScalarFn::Kind::Linear: return c.beta.param_c();
    case ScalarFn::Kind::Power:
      return c.beta.param_c() * std::pow(uf, c.beta.param_p() - 1.0);
    default:
      return c.beta(uf) / uf;
  }
}

double diffusion_from_value(const CoefficientSet& c, double u_at_x) {
  if (c.kind == CoefficientKind::MeanField) return c.sigma_const;
  return std::sqrt(2.0 * a_coefficient(c, u_at_x));
}

double diffusion_at(const CoefficientSet& c, const GridDensity& u, double x) {
  if (x < u.grid().x_min || x > u.grid().x_max)
    throw std::domain_error("diffusion_at: x lies outside the density's domain");
  return diffusion_from_value(c, u.value_at(x));
}

double mean_field_drift(const CoefficientSet& c, const GridDensity& u) {
  const double h = u.grid().cell_width();
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = u.values()[i];
    if (v > 0.0) acc += c.h(u.grid().center(i)) * v;
  }
  return acc * h;
}

CoefficientSet registry_lookup(const std::string& name, const RegistryParams& params) {
  CoefficientSet c;
  c.name = name;
  c.eps_floor = params.eps_floor;
  c.dim = params.d;
  if (name == "heat") {
    c.beta = ScalarFn::linear(1.0);
    c.b0 = ScalarFn::zero();
    c.D = ScalarFn::zero();
    c.m = 1.0;
  } else if (name == "pme") {
    if (params.m < 1.0) throw std::invalid_argument("registry_lookup: pme requires m >= 1");
    c.beta = params.m == 1.0 ? ScalarFn::linear(1.0) : ScalarFn::power(1.0, params.m);
    c.b0 = ScalarFn::zero();
    c.D = ScalarFn::zero();
    c.m = params.m;
  } else if (name == "burgers") {
    c.beta = ScalarFn::linear(1.0);
    c.b0 = ScalarFn::linear(0.5);
    c.D = ScalarFn::constant(1.0);
    c.m = 1.0;
  } else if (name == "gpme") {
    if (params.m < 1.0) throw std::invalid_argument("registry_lookup: gpme requires m >= 1");
    c.beta = params.m == 1.0 ? ScalarFn::linear(1.0) : ScalarFn::power(1.0, params.m);
    c.b0 = ScalarFn::abs_power(params.drift_scale, params.m - 1.0);
    c.D = ScalarFn::constant(params.direction);
    c.m = params.m;
  } else if (name == "meanfield") {
    c.kind = CoefficientKind::MeanField;
    c.h = ScalarFn::bump(params.h_amp, params.h_radius);
    c.sigma_const = params.sigma;
  } else {
    throw std::invalid_argument("registry_lookup: unknown coefficient set '" + name +
                                "' (known: burgers, gpme, heat, meanfield, pme)");
  }
  validate_coefficients(c);
  return c;
}

}  // namespace nmlab
