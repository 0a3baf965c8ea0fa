#include "nmlab/fv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nmlab/distance.hpp"
#include "nmlab/errors.hpp"

namespace nmlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_output_times(const char* who, double s, const std::vector<double>& times) {
  if (times.empty()) throw setup_error(std::string(who) + ": no output times given");
  if (std::abs(times.front() - s) > 1e-9 * std::max(1.0, std::abs(s))) {
    std::ostringstream os;
    os << who << ": first output time " << times.front() << " must equal the start time " << s;
    throw setup_error(os.str());
  }
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw setup_error(std::string(who) + ": output times must be strictly increasing");
}

void check_boundary_mass(const char* who, const std::vector<double>& u, double h, double tol,
                         double t) {
  const std::size_t k = std::min<std::size_t>(10, u.size() / 2);
  double near_wall = 0.0;
  for (std::size_t i = 0; i < k; ++i) near_wall += (u[i] + u[u.size() - 1 - i]) * h;
  if (near_wall > tol) {
    std::ostringstream os;
    os << who << ": mass " << near_wall << " within ten cells of the boundary at t = " << t
       << " exceeds the budget " << tol << "; widen the domain";
    throw setup_error(os.str());
  }
}

std::size_t substep_count(const char* who, double gap, double dt_bound, std::size_t cap,
                          double t_left) {
  if (!(dt_bound > 0.0))
    throw numeric_error(std::string(who) + ": non-positive stable step size");
  std::size_t nsub = dt_bound == kInf
                         ? 1
                         : static_cast<std::size_t>(std::max(1.0, std::ceil(gap / dt_bound)));
  if (nsub > cap) {
    std::ostringstream os;
    os << who << ": interval starting at t = " << t_left << " needs " << nsub
       << " explicit sub-steps, above the cap " << cap
       << "; coarsen the grid or raise max_substeps_per_interval";
    throw stiffness_error(os.str());
  }
  return nsub;
}

/// drift field D(x) sampled at the interior cell edges, index i = edge left of cell i
std::vector<double> edge_drift_field(const CoefficientSet& c, const GridSpec& g) {
  std::vector<double> d(g.n_cells + 1, 0.0);
  if (c.kind == CoefficientKind::Nemytskii && !c.D.is_zero() && !c.b0.is_zero())
    for (std::size_t i = 1; i < g.n_cells; ++i) d[i] = c.D(g.left_edge(i));
  return d;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct StepResult {
  double clipped = 0.0;
  double sup = 0.0;
};

/// one conservative explicit step; flux[i] sits on the left edge of cell i and the
/// outermost fluxes stay zero (no-flux walls)
StepResult apply_fluxes(std::vector<double>& u, std::vector<double>& flux, double h, double dt) {
  const std::size_t n = u.size();
  flux[0] = 0.0;
  flux[n] = 0.0;
  StepResult r;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] -= dt / h * (flux[i + 1] - flux[i]);
    if (u[i] < 0.0) {
      r.clipped += -u[i] * h;
      u[i] = 0.0;
    }
    r.sup = std::max(r.sup, u[i]);
  }
  return r;
}

void finish_metadata(FlowMetadata& meta, const std::vector<GridDensity>& out,
                     const std::vector<double>& times) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    meta.mass_defect = std::max(meta.mass_defect, std::abs(out[k].mass() - 1.0));
    if (k > 0) {
      const double w1 = wasserstein1(out[k - 1], out[k]);
      meta.continuity_constant =
          std::max(meta.continuity_constant, w1 / (times[k] - times[k - 1]));
    }
  }
}

}  // namespace

MarginalFlow solve_nlfpke(const CoefficientSet& c, const GridDensity& zeta, double s,
                          const std::vector<double>& times, const SolveOptions& opt) {
  validate_coefficients(c);
  if (c.dim != 1)
    throw setup_error("solve_nlfpke: grid solver handles dim = 1, got dim = " +
                      std::to_string(c.dim));
  check_output_times("solve_nlfpke", s, times);

  const GridSpec grid = zeta.grid();
  const double h = grid.cell_width();
  const std::size_t n = grid.n_cells;
  const std::vector<double> d_edge = edge_drift_field(c, grid);
  const bool mean_field = c.kind == CoefficientKind::MeanField;
  const double half_sigma2 = 0.5 * c.sigma_const * c.sigma_const;

  std::vector<double> h_at_center;
  double h_sup = 0.0;
  if (mean_field) {
    h_at_center.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      h_at_center[i] = c.h(grid.center(i));
      h_sup = std::max(h_sup, std::abs(h_at_center[i]));
    }
  }

  std::vector<double> u = zeta.values();
  std::vector<double> bu(n, 0.0);
  std::vector<double> flux(n + 1, 0.0);

  std::vector<GridDensity> out;
  out.reserve(times.size());
  out.emplace_back(grid, u, times.front());
  check_boundary_mass("solve_nlfpke", u, h, opt.boundary_mass_tol, times.front());

  FlowMetadata meta;
  meta.scheme = "fv-upwind-explicit";
  meta.sup_norm = zeta.max_value();

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double gap = times[k] - times[k - 1];

    double beta_slope_max = 0.0;
    double speed_max = 0.0;
    if (mean_field) {
      beta_slope_max = half_sigma2;
      speed_max = h_sup;
    } else {
      double nonlin_speed = 0.0;
      for (double v : u) {
        beta_slope_max = std::max(beta_slope_max, c.beta.slope(v));
        nonlin_speed = std::max(nonlin_speed, std::abs(c.b0(v)) + std::abs(c.b0.slope(v)) * v);
      }
      speed_max = max_abs(d_edge) * nonlin_speed;
    }
    double dt_bound = kInf;
    if (beta_slope_max > 0.0)
      dt_bound = opt.cfl_diffusion * h * h / (2.0 * beta_slope_max);
    if (speed_max > 0.0) dt_bound = std::min(dt_bound, opt.cfl_advection * h / speed_max);

    const std::size_t nsub = substep_count("solve_nlfpke", gap, dt_bound,
                                           opt.max_substeps_per_interval, times[k - 1]);
    const double dt = gap / static_cast<double>(nsub);

    for (std::size_t q = 0; q < nsub; ++q) {
      double mf_drift = 0.0;
      if (mean_field) {
        for (std::size_t i = 0; i < n; ++i) mf_drift += h_at_center[i] * u[i];
        mf_drift *= h;
      } else {
        for (std::size_t i = 0; i < n; ++i) bu[i] = c.beta(u[i]);
      }
      for (std::size_t i = 1; i < n; ++i) {
        double adv = 0.0;
        if (mean_field) {
          adv = mf_drift * (mf_drift >= 0.0 ? u[i - 1] : u[i]);
        } else if (d_edge[i] != 0.0) {
          const double up = d_edge[i] >= 0.0 ? u[i - 1] : u[i];
          adv = d_edge[i] * c.b0(up) * up;
        }
        const double dif = mean_field ? -half_sigma2 * (u[i] - u[i - 1]) / h
                                      : -(bu[i] - bu[i - 1]) / h;
        flux[i] = adv + dif;
      }
      const StepResult r = apply_fluxes(u, flux, h, dt);
      meta.clipped_mass += r.clipped;
      meta.sup_norm = std::max(meta.sup_norm, r.sup);
    }

    out.emplace_back(grid, u, times[k]);
    check_boundary_mass("solve_nlfpke", u, h, opt.boundary_mass_tol, times[k]);
    meta.substeps.push_back(nsub);
  }

  finish_metadata(meta, out, times);
  MarginalFlow flow(s, times, std::move(out));
  flow.meta = meta;
  return flow;
}

MarginalFlow solve_linearized_fpke(const CoefficientSet& c, const MarginalFlow& frozen,
                                   const GridDensity& eta, const std::vector<double>& times,
                                   const SolveOptions& opt) {
  validate_coefficients(c);
  if (eta.grid() != frozen.grid())
    throw setup_error("solve_linearized_fpke: initial datum and frozen flow use different grids");
  if (times.empty()) throw setup_error("solve_linearized_fpke: no output times given");
  check_output_times("solve_linearized_fpke", times.front(), times);
  if (times.front() < frozen.times().front() - 1e-12 ||
      times.back() > frozen.times().back() + 1e-12)
    throw setup_error("solve_linearized_fpke: output times leave the span of the frozen flow");

  const GridSpec grid = eta.grid();
  const double h = grid.cell_width();
  const std::size_t n = grid.n_cells;
  const std::vector<double> d_edge = edge_drift_field(c, grid);
  const bool mean_field = c.kind == CoefficientKind::MeanField;
  const double half_sigma2 = 0.5 * c.sigma_const * c.sigma_const;

  std::vector<double> h_at_center;
  if (mean_field) {
    h_at_center.resize(n);
    for (std::size_t i = 0; i < n; ++i) h_at_center[i] = c.h(grid.center(i));
  }

  std::vector<double> nu = eta.values();
  std::vector<double> ufr(n, 0.0);
  std::vector<double> an(n, 0.0);
  std::vector<double> flux(n + 1, 0.0);

  std::vector<GridDensity> out;
  out.reserve(times.size());
  out.emplace_back(grid, nu, times.front());
  check_boundary_mass("solve_linearized_fpke", nu, h, opt.boundary_mass_tol, times.front());

  FlowMetadata meta;
  meta.scheme = "fv-upwind-explicit-frozen";
  meta.sup_norm = eta.max_value();

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double gap = times[k] - times[k - 1];

    // worst frozen value over the interval endpoints drives the stable step,
    // matching the step the nonlinear solve would take on the same flow
    double u_end_max = 0.0;
    for (double t : {times[k - 1], times[k]})
      for (double v : frozen.interpolated_values(t)) u_end_max = std::max(u_end_max, v);
    double beta_slope_max;
    double a_max;
    double speed_max;
    if (mean_field) {
      beta_slope_max = half_sigma2;
      a_max = half_sigma2;
      double h_sup = 0.0;
      for (double v : h_at_center) h_sup = std::max(h_sup, std::abs(v));
      speed_max = h_sup;
    } else {
      beta_slope_max = c.beta.slope(u_end_max);
      a_max = a_coefficient(c, u_end_max);
      double b0_sup = 0.0;
      for (int j = 0; j <= 64; ++j)
        b0_sup = std::max(b0_sup, std::abs(c.b0(u_end_max * static_cast<double>(j) / 64.0)));
      speed_max = max_abs(d_edge) * b0_sup;
    }
    double dt_bound = kInf;
    const double diff_scale = std::max(beta_slope_max, a_max);
    if (diff_scale > 0.0) dt_bound = opt.cfl_diffusion * h * h / (2.0 * diff_scale);
    if (speed_max > 0.0) dt_bound = std::min(dt_bound, opt.cfl_advection * h / speed_max);

    const std::size_t nsub = substep_count("solve_linearized_fpke", gap, dt_bound,
                                           opt.max_substeps_per_interval, times[k - 1]);
    const double dt = gap / static_cast<double>(nsub);

    for (std::size_t q = 0; q < nsub; ++q) {
      const double t_cur = times[k - 1] + static_cast<double>(q) * dt;
      ufr = frozen.interpolated_values(t_cur);

      double mf_drift = 0.0;
      if (mean_field) {
        for (std::size_t i = 0; i < n; ++i) mf_drift += h_at_center[i] * ufr[i];
        mf_drift *= h;
      } else {
        for (std::size_t i = 0; i < n; ++i) an[i] = a_coefficient(c, ufr[i]) * nu[i];
      }
      for (std::size_t i = 1; i < n; ++i) {
        double adv = 0.0;
        if (mean_field) {
          adv = mf_drift * (mf_drift >= 0.0 ? nu[i - 1] : nu[i]);
        } else if (d_edge[i] != 0.0) {
          const double u_edge = 0.5 * (ufr[i - 1] + ufr[i]);
          const double b_edge = d_edge[i] * c.b0(u_edge);
          adv = b_edge * (b_edge >= 0.0 ? nu[i - 1] : nu[i]);
        }
        const double dif = mean_field ? -half_sigma2 * (nu[i] - nu[i - 1]) / h
                                      : -(an[i] - an[i - 1]) / h;
        flux[i] = adv + dif;
      }
      const StepResult r = apply_fluxes(nu, flux, h, dt);
      meta.clipped_mass += r.clipped;
      meta.sup_norm = std::max(meta.sup_norm, r.sup);
    }

    out.emplace_back(grid, nu, times[k]);
    check_boundary_mass("solve_linearized_fpke", nu, h, opt.boundary_mass_tol, times[k]);
    meta.substeps.push_back(nsub);
  }

  finish_metadata(meta, out, times);
  MarginalFlow flow(times.front(), times, std::move(out));
  flow.meta = meta;
  return flow;
}

DominationReport check_domination(const MarginalFlow& nu, const MarginalFlow& mu, double eps,
                                  double escaped_budget) {
  if (nu.grid() != mu.grid())
    throw setup_error("check_domination: flows live on different grids");
  if (nu.size() != mu.size())
    throw setup_error("check_domination: flows store different numbers of outputs");
  for (std::size_t k = 0; k < nu.size(); ++k)
    if (std::abs(nu.times()[k] - mu.times()[k]) > 1e-12)
      throw setup_error("check_domination: flows store different output times");
  if (!(eps > 0.0)) throw setup_error("check_domination: eps must be positive");

  DominationReport rep;
  rep.eps = eps;
  rep.escaped_budget = escaped_budget;
  rep.times = nu.times();
  const double h = nu.grid().cell_width();

  double worst_ratio = 0.0;
  double worst_escape = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    const std::vector<double>& a = nu.density(k).values();
    const std::vector<double>& b = mu.density(k).values();
    double ratio = 0.0;
    double escaped = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (b[i] > eps)
        ratio = std::max(ratio, a[i] / b[i]);
      else
        escaped += a[i] * h;
    }
    rep.ratios.push_back(ratio);
    rep.escaped_mass.push_back(escaped);
    worst_ratio = std::max(worst_ratio, ratio);
    worst_escape = std::max(worst_escape, escaped);
  }
  rep.c_star = worst_escape > escaped_budget ? kInf : worst_ratio;
  return rep;
}

GridSpec default_domain(const CoefficientSet& c, double center, double half_extent_hint,
                        double tau, std::size_t n_cells) {
  if (n_cells == 0) throw setup_error("default_domain: n_cells must be positive");
  if (tau < 0.0) throw setup_error("default_domain: negative horizon");

  // crude reach estimate: diffusive spread at a unit density scale plus drift transport
  double a_scale = 0.0;
  double speed = 0.0;
  if (c.kind == CoefficientKind::MeanField) {
    a_scale = 0.5 * c.sigma_const * c.sigma_const;
    speed = std::abs(c.h(0.0));
    for (double z : {0.25, 0.5, 1.0, 2.0})
      speed = std::max({speed, std::abs(c.h(z)), std::abs(c.h(-z))});
  } else {
    for (double z : {0.25, 0.5, 1.0, 2.0}) a_scale = std::max(a_scale, a_coefficient(c, z));
    double d_max = 0.0;
    for (double z : {-2.0, -1.0, 0.0, 1.0, 2.0})
      d_max = std::max(d_max, std::abs(c.D(center + z * std::max(1.0, half_extent_hint))));
    double b_max = 0.0;
    for (double z : {0.25, 0.5, 1.0, 2.0}) b_max = std::max(b_max, std::abs(c.b0(z)));
    speed = d_max * b_max;
  }
  const double reach = half_extent_hint + 8.0 * std::sqrt(2.0 * a_scale * std::max(tau, 1e-6)) +
                       speed * tau + 1.0;
  return GridSpec{center - reach, center + reach, n_cells};
}

}  // namespace nmlab
