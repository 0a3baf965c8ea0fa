#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nmlab/coefficients.hpp"
#include "nmlab/grid.hpp"
#include "nmlab/kde.hpp"

namespace nmlab {

/// law of the particles at the start time
struct InitialDatum {
  enum class Kind { Dirac, Uniform, Gaussian, Density };
  Kind kind = Kind::Dirac;
  double a = 0.0;  // dirac point, uniform left end, gaussian mean
  double b = 0.0;  // uniform right end, gaussian standard deviation
  std::vector<double> density_values;  // tabulated density on sim_grid
  GridSpec density_grid;

  static InitialDatum dirac(double x0) { return {Kind::Dirac, x0, 0.0, {}, {}}; }
  static InitialDatum uniform(double lo, double hi) { return {Kind::Uniform, lo, hi, {}, {}}; }
  static InitialDatum gaussian(double mean, double sd) { return {Kind::Gaussian, mean, sd, {}, {}}; }
  static InitialDatum density(const GridDensity& u);
};

/// particle positions stored at the requested output times, row per time
class PathStore {
 public:
  PathStore(std::vector<double> times, std::size_t n_particles);

  std::size_t n_particles() const { return n_particles_; }
  std::size_t n_times() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  std::size_t index_of(double t) const;

  const double* row(std::size_t k) const { return data_.data() + k * n_particles_; }
  double* row(std::size_t k) { return data_.data() + k * n_particles_; }
  std::vector<double> positions_at(double t) const;
  double position(std::size_t k, std::size_t particle) const {
    return data_[k * n_particles_ + particle];
  }

  std::uint64_t seed = 0;
  double dt = 0.0;
  std::string scheme;
  double drift_min = 0.0;  // smallest drift seen across all particles and sub-steps
  double drift_max = 0.0;
  double bandwidth_last = 0.0;  // feedback bandwidth used on the final sub-step

 private:
  std::vector<double> times_;
  std::size_t n_particles_;
  std::vector<double> data_;
};

struct SimOptions {
  GridSpec feedback_grid{0.0, 1.0, 0};  // n_cells == 0 requests an automatic domain
  std::size_t feedback_cells = 1024;    // cell count for the automatic domain
  std::size_t bootstrap_steps = 10;     // sub-steps with the fixed sqrt(dt) bandwidth
  KdeOptions kde;
};

/// Euler-Maruyama simulation of the distribution-dependent dynamics: every
/// sub-step re-estimates the particle density by kernel smoothing and feeds it
/// back into the coefficients. The step dt must divide every output gap. The
/// first bootstrap_steps sub-steps use the fixed bandwidth sqrt(dt), which
/// carries a point-mass start until the cloud has spread
PathStore simulate_ddsde(const CoefficientSet& c, const InitialDatum& init, double s,
                         const std::vector<double>& times, std::size_t n_particles, double dt,
                         std::uint64_t seed, const SimOptions& opt = {});

/// same stepping with the density feedback replaced by a frozen marginal flow,
/// linearly interpolated in time; the process is then an ordinary SDE
PathStore simulate_linearized_sde(const CoefficientSet& c, const MarginalFlow& frozen,
                                  const InitialDatum& init, const std::vector<double>& times,
                                  std::size_t n_particles, double dt, std::uint64_t seed);

/// i.i.d. draws from a grid density by inverting its piecewise linear cdf
std::vector<double> resample_from_marginal(const GridDensity& u, std::size_t n,
                                           std::uint64_t seed);

}  // namespace nmlab
