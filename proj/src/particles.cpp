#include "nmlab/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "nmlab/errors.hpp"
#include "nmlab/fv_solver.hpp"
#include "nmlab/rng.hpp"

namespace nmlab {

InitialDatum InitialDatum::density(const GridDensity& u) {
  InitialDatum d;
  d.kind = Kind::Density;
  d.density_values = u.values();
  d.density_grid = u.grid();
  return d;
}

PathStore::PathStore(std::vector<double> times, std::size_t n_particles)
    : times_(std::move(times)), n_particles_(n_particles) {
  if (times_.empty()) throw setup_error("PathStore: no output times given");
  if (n_particles_ == 0) throw setup_error("PathStore: need at least one particle");
  for (std::size_t k = 1; k < times_.size(); ++k)
    if (!(times_[k] > times_[k - 1]))
      throw setup_error("PathStore: output times must be strictly increasing");
  data_.assign(times_.size() * n_particles_, 0.0);
}

std::size_t PathStore::index_of(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(times_.back()));
  for (std::size_t k = 0; k < times_.size(); ++k)
    if (std::abs(times_[k] - t) <= tol) return k;
  std::ostringstream os;
  os << "PathStore: no stored row at t = " << t;
  throw setup_error(os.str());
}

std::vector<double> PathStore::positions_at(double t) const {
  const std::size_t k = index_of(t);
  return std::vector<double>(row(k), row(k) + n_particles_);
}

namespace {

struct StepPlan {
  std::vector<std::size_t> steps_per_interval;
  std::size_t total = 0;
};

StepPlan plan_steps(const char* who, const std::vector<double>& times, double dt) {
  if (!(dt > 0.0)) throw setup_error(std::string(who) + ": dt must be positive");
  StepPlan plan;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double gap = times[k] - times[k - 1];
    const double ratio = gap / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, rounded)) {
      std::ostringstream os;
      os << who << ": dt = " << dt << " does not divide the output gap " << gap
         << " starting at t = " << times[k - 1];
      throw setup_error(os.str());
    }
    const auto n = static_cast<std::size_t>(rounded);
    plan.steps_per_interval.push_back(n);
    plan.total += n;
  }
  if (plan.total > std::numeric_limits<std::uint32_t>::max())
    throw setup_error(std::string(who) + ": too many sub-steps for the counter layout");
  return plan;
}

void sample_initial(const char* who, const InitialDatum& init, const CounterRng& rng,
                    std::vector<double>& x) {
  switch (init.kind) {
    case InitialDatum::Kind::Dirac:
      std::fill(x.begin(), x.end(), init.a);
      break;
    case InitialDatum::Kind::Uniform:
      if (!(init.b > init.a))
        throw setup_error(std::string(who) + ": uniform initial datum needs a < b");
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = init.a + (init.b - init.a) * rng.uniform(i, 0, DrawPurpose::initial);
      break;
    case InitialDatum::Kind::Gaussian:
      if (!(init.b > 0.0))
        throw setup_error(std::string(who) + ": gaussian initial datum needs a positive sd");
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = init.a + init.b * rng.normal(i, 0, DrawPurpose::initial);
      break;
    case InitialDatum::Kind::Density: {
      const GridDensity u(init.density_grid, init.density_values, 0.0);
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = u.quantile(rng.uniform(i, 0, DrawPurpose::initial));
      break;
    }
  }
}

void check_finite(const char* who, const std::vector<double>& x, double t) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i])) {
      std::ostringstream os;
      os << who << ": particle " << i << " became non-finite at t = " << t;
      throw numeric_error(os.str());
    }
}

}  // namespace

PathStore simulate_ddsde(const CoefficientSet& c, const InitialDatum& init, double s,
                         const std::vector<double>& times, std::size_t n_particles, double dt,
                         std::uint64_t seed, const SimOptions& opt) {
  validate_coefficients(c);
  if (times.empty()) throw setup_error("simulate_ddsde: no output times given");
  if (std::abs(times.front() - s) > 1e-9 * std::max(1.0, std::abs(s)))
    throw setup_error("simulate_ddsde: first output time must equal the start time");
  const StepPlan plan = plan_steps("simulate_ddsde", times, dt);

  PathStore store(times, n_particles);
  store.seed = seed;
  store.dt = dt;
  store.scheme = "euler-maruyama-kde-feedback";
  store.drift_min = std::numeric_limits<double>::infinity();
  store.drift_max = -std::numeric_limits<double>::infinity();

  const CounterRng rng(seed);
  std::vector<double> x(n_particles, 0.0);
  sample_initial("simulate_ddsde", init, rng, x);
  check_finite("simulate_ddsde", x, s);
  std::copy(x.begin(), x.end(), store.row(0));

  const bool mean_field = c.kind == CoefficientKind::MeanField;

  GridSpec feed = opt.feedback_grid;
  if (!mean_field && feed.n_cells == 0) {
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    feed = default_domain(c, 0.5 * (*lo_it + *hi_it), 0.5 * (*hi_it - *lo_it), times.back() - s,
                          opt.feedback_cells);
  }

  const double sqrt_dt = std::sqrt(dt);
  KdeOptions kde = opt.kde;
  kde.bandwidth_rule = BandwidthRule::Fixed;
  std::size_t expansions = 0;
  std::uint32_t step = 0;

  for (std::size_t k = 1; k < times.size(); ++k) {
    for (std::size_t q = 0; q < plan.steps_per_interval[k - 1]; ++q, ++step) {
      const double t_cur = times[k - 1] + static_cast<double>(q) * dt;

      double mf_drift = 0.0;
      std::optional<GridDensity> dens;
      if (mean_field) {
        for (double xi : x) mf_drift += c.h(xi);
        mf_drift /= static_cast<double>(n_particles);
      } else {
        const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
        if (*lo_it < feed.x_min || *hi_it > feed.x_max) {
          if (expansions++ > 0)
            throw setup_error(
                "simulate_ddsde: particles left the feedback domain twice; give a wider grid");
          const double center = 0.5 * (*lo_it + *hi_it);
          const double half =
              2.0 * std::max(0.5 * (*hi_it - *lo_it), 0.5 * (feed.x_max - feed.x_min));
          feed = GridSpec{center - half, center + half, feed.n_cells};
        }
        if (step < opt.bootstrap_steps)
          kde.fixed_bandwidth = sqrt_dt;
        else if (opt.kde.bandwidth_rule == BandwidthRule::Fixed)
          kde.fixed_bandwidth = opt.kde.fixed_bandwidth;
        else
          kde.fixed_bandwidth = silverman_bandwidth(x);
        dens.emplace(kde_density(x, feed, kde, t_cur));
        store.bandwidth_last = kde.fixed_bandwidth;
      }

      for (std::size_t i = 0; i < n_particles; ++i) {
        double drift;
        double diff;
        if (mean_field) {
          drift = mf_drift;
          diff = c.sigma_const;
        } else {
          const double u_here = dens->value_at(x[i]);
          drift = drift_from_value(c, u_here, x[i]);
          diff = diffusion_from_value(c, u_here);
        }
        store.drift_min = std::min(store.drift_min, drift);
        store.drift_max = std::max(store.drift_max, drift);
        const double noise = diff > 0.0 ? diff * sqrt_dt * rng.normal(i, step, DrawPurpose::dynamics)
                                        : 0.0;
        x[i] += drift * dt + noise;
      }
      check_finite("simulate_ddsde", x, t_cur + dt);
    }
    std::copy(x.begin(), x.end(), store.row(k));
  }
  if (store.drift_min > store.drift_max) {
    store.drift_min = 0.0;
    store.drift_max = 0.0;
  }
  return store;
}

PathStore simulate_linearized_sde(const CoefficientSet& c, const MarginalFlow& frozen,
                                  const InitialDatum& init, const std::vector<double>& times,
                                  std::size_t n_particles, double dt, std::uint64_t seed) {
  validate_coefficients(c);
  if (times.empty()) throw setup_error("simulate_linearized_sde: no output times given");
  if (times.front() < frozen.times().front() - 1e-12 ||
      times.back() > frozen.times().back() + 1e-12)
    throw setup_error("simulate_linearized_sde: output times leave the span of the frozen flow");
  const StepPlan plan = plan_steps("simulate_linearized_sde", times, dt);

  PathStore store(times, n_particles);
  store.seed = seed;
  store.dt = dt;
  store.scheme = "euler-maruyama-frozen-flow";
  store.drift_min = std::numeric_limits<double>::infinity();
  store.drift_max = -std::numeric_limits<double>::infinity();

  const CounterRng rng(seed);
  std::vector<double> x(n_particles, 0.0);
  sample_initial("simulate_linearized_sde", init, rng, x);
  check_finite("simulate_linearized_sde", x, times.front());
  std::copy(x.begin(), x.end(), store.row(0));

  const bool mean_field = c.kind == CoefficientKind::MeanField;
  const double sqrt_dt = std::sqrt(dt);
  std::uint32_t step = 0;

  for (std::size_t k = 1; k < times.size(); ++k) {
    for (std::size_t q = 0; q < plan.steps_per_interval[k - 1]; ++q, ++step) {
      const double t_cur = times[k - 1] + static_cast<double>(q) * dt;
      const GridDensity dens(frozen.grid(), frozen.interpolated_values(t_cur), t_cur);

      double mf_drift = 0.0;
      if (mean_field) mf_drift = mean_field_drift(c, dens);

      for (std::size_t i = 0; i < n_particles; ++i) {
        double drift;
        double diff;
        if (mean_field) {
          drift = mf_drift;
          diff = c.sigma_const;
        } else {
          const double u_here = dens.value_at(x[i]);
          drift = drift_from_value(c, u_here, x[i]);
          diff = diffusion_from_value(c, u_here);
        }
        store.drift_min = std::min(store.drift_min, drift);
        store.drift_max = std::max(store.drift_max, drift);
        const double noise = diff > 0.0 ? diff * sqrt_dt * rng.normal(i, step, DrawPurpose::dynamics)
                                        : 0.0;
        x[i] += drift * dt + noise;
      }
      check_finite("simulate_linearized_sde", x, t_cur + dt);
    }
    std::copy(x.begin(), x.end(), store.row(k));
  }
  if (store.drift_min > store.drift_max) {
    store.drift_min = 0.0;
    store.drift_max = 0.0;
  }
  return store;
}

std::vector<double> resample_from_marginal(const GridDensity& u, std::size_t n,
                                           std::uint64_t seed) {
  if (n == 0) throw setup_error("resample_from_marginal: need at least one draw");
  const CounterRng rng(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = u.quantile(rng.uniform(i, 0, DrawPurpose::resample));
  return out;
}

}  // namespace nmlab
