#pragma once

#include <string>
#include <vector>

#include "nmlab/grid.hpp"

namespace nmlab {

/// scalar function of one variable, either a registry closed form or a tabulated
/// curve with linear interpolation; immutable and safe for concurrent reads
class ScalarFn {
 public:
  static ScalarFn zero();
  static ScalarFn constant(double c);
  static ScalarFn linear(double c);                // c * z
  static ScalarFn power(double c, double p);       // c * |z|^(p-1) * z, odd continuation
  static ScalarFn abs_power(double c, double p);   // c * |z|^p
  static ScalarFn bump(double amp, double radius); // amp * (1 - (z/radius)^2)^2 inside |z| < radius
  static ScalarFn table(std::vector<double> z, std::vector<double> f);

  double operator()(double z) const;
  /// derivative (closed form) or local secant slope on a table; used for CFL bounds
  double slope(double z) const;
  bool is_zero() const { return kind_ == Kind::Zero; }
  /// short human-readable form for manifests and summaries
  std::string describe() const;

  enum class Kind { Zero, Constant, Linear, Power, AbsPower, Bump, Table };
  Kind kind() const { return kind_; }
  double param_c() const { return c_; }
  double param_p() const { return p_; }

 private:
  Kind kind_ = Kind::Zero;
  double c_ = 0.0;
  double p_ = 1.0;
  std::vector<double> tz_, tf_;
};

enum class CoefficientKind { Nemytskii, MeanField };

/// coefficient bundle: either Nemytskii local coefficients built from the density value,
/// or a mean-field drift averaging an interaction kernel against the whole measure
struct CoefficientSet {
  CoefficientKind kind = CoefficientKind::Nemytskii;
  ScalarFn beta;          // diffusion nonlinearity beta(u)
  ScalarFn b0;            // drift nonlinearity b0(u)
  ScalarFn D;             // stationary drift field D(x)
  ScalarFn h;             // mean-field interaction h(y)
  double m = 1.0;         // porous-medium exponent when beta is a power law
  int dim = 1;
  double sigma_const = 0.0;  // constant noise level in the mean-field case
  double eps_floor = 1e-12;  // density floor guarding the beta(u)/u ratio
  std::string name;          // registry name, empty for hand-built sets
};

/// throws invalid_argument when the bundle mixes the two kinds or violates basic bounds
void validate_coefficients(const CoefficientSet& c);

/// optional diagnostics for user-supplied coefficients: samples beta for monotonicity
/// and beta(0)=0, and b0 for boundedness, on [0, u_max]
void validate_on_range(const CoefficientSet& c, double u_max, std::size_t n_samples = 1024);

/// drift field evaluated at x under the current density u
double drift_at(const CoefficientSet& c, const GridDensity& u, double x);
/// same drift with the density value at x already extracted (mean-field drift needs the
/// full measure, so that kind accepts the precomputed average instead)
double drift_from_value(const CoefficientSet& c, double u_at_x, double x);

/// noise amplitude at x under the current density u
double diffusion_at(const CoefficientSet& c, const GridDensity& u, double x);
double diffusion_from_value(const CoefficientSet& c, double u_at_x);

/// linearized diffusion coefficient a(u) = beta(u)/u with the exact power-law limit at u = 0
double a_coefficient(const CoefficientSet& c, double u_val);

/// average of the interaction kernel against a density (the mean-field drift value)
double mean_field_drift(const CoefficientSet& c, const GridDensity& u);

struct RegistryParams {
  double m = 2.0;
  int d = 1;
  double drift_scale = 1.0;  // gpme drift strength
  double direction = 1.0;    // gpme constant drift field D
  double h_amp = 1.0;
  double h_radius = 1.0;
  double sigma = 0.0;
  double eps_floor = 1e-12;
};

/// named coefficient sets: "pme", "burgers", "gpme", "meanfield", "heat"
CoefficientSet registry_lookup(const std::string& name, const RegistryParams& params = {});

}  // namespace nmlab
