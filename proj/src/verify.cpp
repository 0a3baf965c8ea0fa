#include "nmlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nmlab/distance.hpp"
#include "nmlab/errors.hpp"
#include "nmlab/kde.hpp"
#include "nmlab/rng.hpp"

namespace nmlab {

namespace {

double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[lo + 1];
}

void check_bins(const char* who, const BinSpec& b) {
  if (!(b.hi > b.lo) || b.n_bins == 0)
    throw setup_error(std::string(who) + ": bin layout needs lo < hi and at least one bin");
}

/// level quantile of W1 between two resamples of the pooled set, the null of a
/// common conditional law
double pooled_bootstrap_radius(const std::vector<double>& za, const std::vector<double>& zb,
                               const CounterRng& rng, std::uint64_t tag,
                               const MarkovTestOptions& opt) {
  std::vector<double> pool = za;
  pool.insert(pool.end(), zb.begin(), zb.end());
  std::vector<double> boot_a(za.size());
  std::vector<double> boot_b(zb.size());
  std::vector<double> boot_dist;
  boot_dist.reserve(opt.n_bootstrap);
  for (std::size_t b = 0; b < opt.n_bootstrap; ++b) {
    for (std::size_t i = 0; i < za.size(); ++i) {
      const double u = rng.uniform(tag | i, static_cast<std::uint32_t>(b), DrawPurpose::bootstrap);
      boot_a[i] = pool[std::min(pool.size() - 1,
                                static_cast<std::size_t>(u * static_cast<double>(pool.size())))];
    }
    for (std::size_t i = 0; i < zb.size(); ++i) {
      const double u = rng.uniform(tag | (za.size() + i), static_cast<std::uint32_t>(b),
                                   DrawPurpose::bootstrap);
      boot_b[i] = pool[std::min(pool.size() - 1,
                                static_cast<std::size_t>(u * static_cast<double>(pool.size())))];
    }
    boot_dist.push_back(wasserstein1(boot_a, boot_b));
  }
  std::sort(boot_dist.begin(), boot_dist.end());
  return sorted_quantile(boot_dist, opt.bootstrap_level) + opt.transport_allowance;
}

}  // namespace

double sample_quantile(std::vector<double> samples, double p) {
  if (samples.empty()) throw setup_error("sample_quantile: empty sample set");
  std::sort(samples.begin(), samples.end());
  return sorted_quantile(samples, std::clamp(p, 0.0, 1.0));
}

std::ptrdiff_t BinSpec::index(double x) const {
  if (x < lo || x > hi) return -1;
  const auto i = static_cast<std::ptrdiff_t>((x - lo) / width());
  return std::min<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(n_bins) - 1);
}

std::size_t BinSpec::index_clipped(double x) const {
  const std::ptrdiff_t i = index(std::clamp(x, lo, hi));
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(i, 0));
}

ConditionalKernel estimate_conditional_kernel(const std::vector<double>& y,
                                              const std::vector<double>& z, const BinSpec& y_bins,
                                              const BinSpec& z_bins, std::size_t min_count) {
  if (y.size() != z.size())
    throw setup_error("estimate_conditional_kernel: sample vectors differ in length");
  if (y.empty()) throw setup_error("estimate_conditional_kernel: no sample pairs");
  check_bins("estimate_conditional_kernel", y_bins);
  check_bins("estimate_conditional_kernel", z_bins);

  ConditionalKernel k;
  k.y_bins = y_bins;
  k.z_bins = z_bins;
  k.rows.assign(y_bins.n_bins * z_bins.n_bins, 0.0);
  k.counts.assign(y_bins.n_bins, 0);
  k.retained.assign(y_bins.n_bins, false);

  std::size_t dropped = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::ptrdiff_t yi = y_bins.index(y[i]);
    if (yi < 0) {
      ++dropped;
      continue;
    }
    const std::size_t zi = z_bins.index_clipped(z[i]);
    k.rows[static_cast<std::size_t>(yi) * z_bins.n_bins + zi] += 1.0;
    ++k.counts[static_cast<std::size_t>(yi)];
  }
  k.dropped_pair_fraction = static_cast<double>(dropped) / static_cast<double>(y.size());

  for (std::size_t i = 0; i < y_bins.n_bins; ++i) {
    if (k.counts[i] < min_count) {
      std::fill_n(k.rows.begin() + static_cast<std::ptrdiff_t>(i * z_bins.n_bins), z_bins.n_bins,
                  0.0);
      continue;
    }
    k.retained[i] = true;
    const double inv = 1.0 / static_cast<double>(k.counts[i]);
    for (std::size_t j = 0; j < z_bins.n_bins; ++j) k.rows[i * z_bins.n_bins + j] *= inv;
  }
  return k;
}

MarkovTestReport test_nonlinear_markov(const PathStore& run_a, const PathStore& run_b, double r,
                                       double t, const MarkovTestOptions& opt) {
  check_bins("test_nonlinear_markov", opt.y_bins);
  const std::vector<double> ra = run_a.positions_at(r);
  const std::vector<double> ta = run_a.positions_at(t);
  const std::vector<double> rb = run_b.positions_at(r);
  const std::vector<double> tb = run_b.positions_at(t);

  MarkovTestReport rep;
  rep.setup_w1 = wasserstein1(ra, rb);
  rep.setup_ok = rep.setup_w1 <= opt.setup_tol;

  std::vector<double> sorted_ra = ra;
  std::sort(sorted_ra.begin(), sorted_ra.end());
  const double q25 = sorted_quantile(sorted_ra, 0.25);
  const double q75 = sorted_quantile(sorted_ra, 0.75);

  const CounterRng rng(opt.bootstrap_seed);
  std::vector<double> za, zb;

  for (std::size_t bin = 0; bin < opt.y_bins.n_bins; ++bin) {
    const double yc = opt.y_bins.center(bin);
    if (yc < q25 || yc > q75) continue;

    za.clear();
    zb.clear();
    for (std::size_t i = 0; i < ra.size(); ++i)
      if (opt.y_bins.index(ra[i]) == static_cast<std::ptrdiff_t>(bin)) za.push_back(ta[i]);
    for (std::size_t i = 0; i < rb.size(); ++i)
      if (opt.y_bins.index(rb[i]) == static_cast<std::ptrdiff_t>(bin)) zb.push_back(tb[i]);
    if (za.size() < opt.min_bin_count || zb.size() < opt.min_bin_count) continue;

    MarkovBinOutcome out;
    out.bin = bin;
    out.y_center = yc;
    out.count_a = za.size();
    out.count_b = zb.size();
    out.w1 = wasserstein1(za, zb);
    out.radius = pooled_bootstrap_radius(za, zb, rng, static_cast<std::uint64_t>(bin) << 32, opt);
    out.pass = out.w1 <= out.radius;
    rep.central_bins.push_back(out);
    if (out.pass) ++rep.n_pass;
  }

  if (!rep.central_bins.empty())
    rep.pass_fraction =
        static_cast<double>(rep.n_pass) / static_cast<double>(rep.central_bins.size());
  rep.passed = rep.setup_ok && !rep.central_bins.empty() && rep.pass_fraction >= opt.pass_fraction;
  return rep;
}

MarkovTestReport test_past_refinement(const PathStore& run, double r_prime, double r, double t,
                                      const MarkovTestOptions& opt) {
  check_bins("test_past_refinement", opt.y_bins);
  if (!(r_prime < r && r < t))
    throw setup_error("test_past_refinement: need r_prime < r < t");
  const std::vector<double> xp = run.positions_at(r_prime);
  const std::vector<double> xr = run.positions_at(r);
  const std::vector<double> xt = run.positions_at(t);

  MarkovTestReport rep;
  rep.setup_w1 = 0.0;
  rep.setup_ok = true;

  std::vector<double> sorted_r = xr;
  std::sort(sorted_r.begin(), sorted_r.end());
  const double q25 = sorted_quantile(sorted_r, 0.25);
  const double q75 = sorted_quantile(sorted_r, 0.75);

  const CounterRng rng(opt.bootstrap_seed);
  std::vector<double> past, za, zb;

  for (std::size_t bin = 0; bin < opt.y_bins.n_bins; ++bin) {
    const double yc = opt.y_bins.center(bin);
    if (yc < q25 || yc > q75) continue;

    past.clear();
    for (std::size_t i = 0; i < xr.size(); ++i)
      if (opt.y_bins.index(xr[i]) == static_cast<std::ptrdiff_t>(bin)) past.push_back(xp[i]);
    if (past.size() < 2 * opt.min_bin_count) continue;
    const double med = sample_quantile(past, 0.5);

    za.clear();
    zb.clear();
    for (std::size_t i = 0; i < xr.size(); ++i) {
      if (opt.y_bins.index(xr[i]) != static_cast<std::ptrdiff_t>(bin)) continue;
      (xp[i] <= med ? za : zb).push_back(xt[i]);
    }
    if (za.size() < opt.min_bin_count || zb.size() < opt.min_bin_count) continue;

    MarkovBinOutcome out;
    out.bin = bin;
    out.y_center = yc;
    out.count_a = za.size();
    out.count_b = zb.size();
    out.w1 = wasserstein1(za, zb);
    out.radius = pooled_bootstrap_radius(za, zb, rng, static_cast<std::uint64_t>(bin) << 32, opt);
    out.pass = out.w1 <= out.radius;
    rep.central_bins.push_back(out);
    if (out.pass) ++rep.n_pass;
  }

  if (!rep.central_bins.empty())
    rep.pass_fraction =
        static_cast<double>(rep.n_pass) / static_cast<double>(rep.central_bins.size());
  rep.passed = !rep.central_bins.empty() && rep.pass_fraction >= opt.pass_fraction;
  return rep;
}

FddResult reconstruct_fdd(const PathStore& run_a, const std::vector<const PathStore*>& restarts,
                          const FddSpec& spec, const BinSpec& bins, std::size_t min_count) {
  if (spec.times.empty()) throw setup_error("reconstruct_fdd: no times in the spec");
  if (spec.times.size() != spec.factors.size())
    throw setup_error("reconstruct_fdd: one factor per time is required");
  if (restarts.size() + 1 != spec.times.size())
    throw setup_error("reconstruct_fdd: need exactly one restart run per time gap");
  check_bins("reconstruct_fdd", bins);

  const std::size_t n_times = spec.times.size();
  const std::size_t n_particles = run_a.n_particles();

  // plain sample average of the product functional over the original run
  std::vector<std::size_t> rows(n_times);
  for (std::size_t k = 0; k < n_times; ++k) rows[k] = run_a.index_of(spec.times[k]);
  double direct = 0.0;
  for (std::size_t i = 0; i < n_particles; ++i) {
    double prod = 1.0;
    for (std::size_t k = 0; k < n_times; ++k)
      prod *= spec.factors[k](run_a.position(rows[k], i));
    direct += prod;
  }
  direct /= static_cast<double>(n_particles);

  // weights of the first marginal over the bin layout
  std::vector<double> weight(bins.n_bins, 0.0);
  double dropped = 0.0;
  {
    const double unit = 1.0 / static_cast<double>(n_particles);
    for (std::size_t i = 0; i < n_particles; ++i) {
      const std::ptrdiff_t bi = bins.index(run_a.position(rows[0], i));
      if (bi < 0)
        dropped += unit;
      else
        weight[static_cast<std::size_t>(bi)] += unit;
    }
  }

  // forward recursion carrying the payoff-weighted measure through each kernel
  std::vector<double> value(bins.n_bins, 0.0);
  for (std::size_t j = 0; j < bins.n_bins; ++j)
    value[j] = weight[j] * spec.factors[0](bins.center(j));

  for (std::size_t k = 0; k + 1 < n_times; ++k) {
    const PathStore& rs = *restarts[k];
    const ConditionalKernel kern = estimate_conditional_kernel(
        rs.positions_at(spec.times[k]), rs.positions_at(spec.times[k + 1]), bins, bins, min_count);

    std::vector<double> next_w(bins.n_bins, 0.0);
    std::vector<double> next_v(bins.n_bins, 0.0);
    for (std::size_t j = 0; j < bins.n_bins; ++j) {
      if (!kern.retained[j]) {
        dropped += weight[j];
        continue;
      }
      for (std::size_t l = 0; l < bins.n_bins; ++l) {
        const double p = kern.row_value(j, l);
        next_w[l] += weight[j] * p;
        next_v[l] += value[j] * p;
      }
    }
    for (std::size_t l = 0; l < bins.n_bins; ++l) next_v[l] *= spec.factors[k + 1](bins.center(l));
    weight = std::move(next_w);
    value = std::move(next_v);
  }

  FddResult res;
  res.direct = direct;
  res.dropped_mass = dropped;
  double total = 0.0;
  for (double v : value) total += v;
  const double retained_mass = 1.0 - dropped;
  if (retained_mass <= 0.0)
    throw setup_error("reconstruct_fdd: every kernel row along the chain was dropped");
  res.reconstructed = total / retained_mass;
  return res;
}

CkReport test_ck_violation(const CoefficientSet& c, const GridDensity& zeta, double s, double r,
                           double t, double probe_floor, const SolveOptions& opt) {
  if (r < s || t < r) throw setup_error("test_ck_violation: need s <= r <= t");

  std::vector<double> to_r = {s};
  if (r > s) to_r.push_back(r);
  const MarginalFlow flow_sr = solve_nlfpke(c, zeta, s, to_r, opt);
  GridDensity mu_r = flow_sr.density(flow_sr.size() - 1);

  std::vector<double> to_t = {r};
  if (t > r) to_t.push_back(t);
  const MarginalFlow lhs_flow = solve_nlfpke(c, mu_r, r, to_t, opt);
  const std::vector<double>& lhs = lhs_flow.density(lhs_flow.size() - 1).values();

  const GridSpec grid = zeta.grid();
  const double h = grid.cell_width();

  std::vector<std::pair<double, std::vector<double>>> probes;
  for (std::size_t j = 0; j < grid.n_cells; ++j) {
    const double w = mu_r.values()[j] * h;
    if (w < probe_floor) continue;
    const MarginalFlow pf =
        solve_nlfpke(c, GridDensity::dirac(grid, grid.center(j), r), r, to_t, opt);
    probes.emplace_back(w, pf.density(pf.size() - 1).values());
  }
  if (probes.empty()) throw setup_error("test_ck_violation: no probe cell clears the floor");

  const auto mix = [&grid](const std::vector<std::pair<double, std::vector<double>>>& ps,
                           std::size_t stride) {
    std::vector<double> acc(grid.n_cells, 0.0);
    double wsum = 0.0;
    for (std::size_t q = 0; q < ps.size(); q += stride) {
      wsum += ps[q].first;
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += ps[q].first * ps[q].second[i];
    }
    for (double& v : acc) v /= wsum;
    return std::make_pair(acc, wsum);
  };

  const auto [rhs, wsum] = mix(probes, 1);
  const auto [rhs_half, wsum_half] = mix(probes, 2);

  CkReport rep;
  rep.probe_mass = wsum;
  for (std::size_t i = 0; i < rhs.size(); ++i) rep.residual_l1 += std::abs(lhs[i] - rhs[i]) * h;
  for (std::size_t i = 0; i < rhs.size(); ++i)
    rep.quadrature_gap += std::abs(rhs[i] - rhs_half[i]) * h;
  return rep;
}

double pde_flow_restart_gap(const CoefficientSet& c, const GridDensity& zeta, double s, double r,
                            double t, const SolveOptions& opt) {
  if (!(s <= r && r <= t)) throw setup_error("pde_flow_restart_gap: need s <= r <= t");
  std::vector<double> ahead = {s};
  if (r > s) ahead.push_back(r);
  if (t > r) ahead.push_back(t);
  const MarginalFlow continued = solve_nlfpke(c, zeta, s, ahead, opt);
  std::vector<double> tail = {r};
  if (t > r) tail.push_back(t);
  const MarginalFlow restarted = solve_nlfpke(c, continued.at_time(r), r, tail, opt);
  return l1_distance(continued.at_time(t), restarted.at_time(t));
}

ParticleFlowGap particle_flow_restart_gap(const CoefficientSet& c, const InitialDatum& init,
                                          double s, double r, double t, std::size_t n_particles,
                                          double dt, const std::vector<std::uint64_t>& seeds,
                                          const SimOptions& opt) {
  if (!(s <= r && r <= t)) throw setup_error("particle_flow_restart_gap: need s <= r <= t");
  if (seeds.empty()) throw setup_error("particle_flow_restart_gap: no seeds given");

  std::vector<double> ahead = {s};
  if (r > s) ahead.push_back(r);
  if (t > r) ahead.push_back(t);
  std::vector<double> tail = {r};
  if (t > r) tail.push_back(t);

  ParticleFlowGap gap;
  for (const std::uint64_t seed : seeds) {
    const PathStore run_a = simulate_ddsde(c, init, s, ahead, n_particles, dt, seed, opt);
    const std::vector<double> at_r = run_a.positions_at(r);

    GridSpec g = opt.feedback_grid;
    if (g.n_cells == 0) {
      const auto [lo, hi] = std::minmax_element(at_r.begin(), at_r.end());
      g = default_domain(c, 0.5 * (*lo + *hi), 0.5 * (*hi - *lo), std::max(t - r, 1e-6),
                         opt.feedback_cells);
    }
    const GridDensity mu_r = kde_density(at_r, g, opt.kde, r);

    const PathStore run_b = simulate_ddsde(c, InitialDatum::density(mu_r), r, tail, n_particles,
                                           dt, seed ^ 0x9e3779b97f4a7c15ULL, opt);
    const double w1 = wasserstein1(run_a.positions_at(t), run_b.positions_at(t));
    gap.per_seed.push_back(w1);
    gap.worst = std::max(gap.worst, w1);
  }
  return gap;
}

}  // namespace nmlab
