#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nmlab/config.hpp"
#include "nmlab/errors.hpp"
#include "nmlab/io.hpp"
#include "nmlab/runner.hpp"
#include "nmlab/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace nmlab;

struct Override {
  std::string section;
  std::string key;
  std::string value;
};

void apply_override(ConfigFile& f, const Override& o) {
  ConfigSection* sec = nullptr;
  for (ConfigSection& s : f.sections)
    if (s.name == o.section) sec = &s;
  if (!sec) {
    f.sections.push_back(ConfigSection{o.section, 0, {}});
    sec = &f.sections.back();
  }
  for (ConfigEntry& e : sec->entries) {
    if (e.key == o.key) {
      e.raw = o.value;
      e.line = 0;
      return;
    }
  }
  sec->entries.push_back(ConfigEntry{o.key, o.value, 0});
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// flag > NMLAB_OUT_DIR > config; the environment variable re-roots relative
/// directories so batches keep their per-experiment layout
std::string resolve_out_dir(const std::string& configured, bool flag_given) {
  if (flag_given) return configured;
  const char* env = std::getenv("NMLAB_OUT_DIR");
  if (!env || !*env) return configured;
  const fs::path p(configured);
  if (p.is_absolute()) return configured;
  return (fs::path(env) / p).string();
}

std::size_t resolve_workers(std::size_t flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("NMLAB_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

int report_archive(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw setup_error("report: cannot open '" + path + "'");
  char magic[4] = {};
  probe.read(magic, 4);
  if (probe.gcount() != 4) throw setup_error("report: '" + path + "' is not a run archive");
  probe.close();

  const std::string tag(magic, 4);
  if (tag == "NMFA") {
    const MarginalFlow flow = read_flow_archive(path);
    std::size_t substeps = 0;
    for (std::size_t n : flow.meta.substeps) substeps += n;
    std::cout << "kind = flow\n";
    std::cout << "x_min = " << fmt(flow.grid().x_min) << "\n";
    std::cout << "x_max = " << fmt(flow.grid().x_max) << "\n";
    std::cout << "n_cells = " << flow.grid().n_cells << "\n";
    std::cout << "start = " << fmt(flow.start_time()) << "\n";
    std::cout << "n_times = " << flow.size() << "\n";
    std::cout << "t_first = " << fmt(flow.times().front()) << "\n";
    std::cout << "t_last = " << fmt(flow.times().back()) << "\n";
    std::cout << "substeps_total = " << substeps << "\n";
    std::cout << "mass_defect = " << fmt(flow.meta.mass_defect) << "\n";
    std::cout << "clipped_mass = " << fmt(flow.meta.clipped_mass) << "\n";
    std::cout << "sup_norm = " << fmt(flow.meta.sup_norm) << "\n";
    std::cout << "continuity_constant = " << fmt(flow.meta.continuity_constant) << "\n";
    std::cout << "scheme = " << flow.meta.scheme << "\n";
    return 0;
  }
  if (tag == "NMPA") {
    const PathStore paths = read_paths_archive(path);
    std::cout << "kind = paths\n";
    std::cout << "n_particles = " << paths.n_particles() << "\n";
    std::cout << "n_times = " << paths.n_times() << "\n";
    std::cout << "t_first = " << fmt(paths.times().front()) << "\n";
    std::cout << "t_last = " << fmt(paths.times().back()) << "\n";
    std::cout << "seed = " << paths.seed << "\n";
    std::cout << "dt = " << fmt(paths.dt) << "\n";
    std::cout << "drift_min = " << fmt(paths.drift_min) << "\n";
    std::cout << "drift_max = " << fmt(paths.drift_max) << "\n";
    std::cout << "bandwidth_last = " << fmt(paths.bandwidth_last) << "\n";
    std::cout << "scheme = " << paths.scheme << "\n";
    return 0;
  }
  throw setup_error("report: '" + path + "' is not a run archive");
}

struct BatchOutcome {
  int code = 0;
  std::string line;
};

int run_batch(const std::vector<std::string>& paths, std::size_t workers) {
  std::vector<BatchOutcome> results(paths.size());
  std::atomic<std::size_t> next{0};

  const auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= paths.size()) return;
      BatchOutcome& out = results[i];
      try {
        ExperimentConfig cfg = ExperimentConfig::from_file(ConfigFile::load(paths[i]));
        cfg.out_dir = resolve_out_dir(cfg.out_dir, false);
        const RunResult res = run_experiment(cfg);
        out.code = res.exit_code;
        out.line = res.summary + " -> " + cfg.out_dir;
      } catch (const config_error& ex) {
        out.code = 2;
        out.line = ex.what();
      } catch (const setup_error& ex) {
        out.code = 2;
        out.line = ex.what();
      } catch (const std::exception& ex) {
        out.code = 1;
        out.line = ex.what();
      }
    }
  };

  workers = std::min(workers, paths.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& th : pool) th.join();

  int code = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    (results[i].code == 0 ? std::cout : std::cerr)
        << paths[i] << ": " << results[i].line << "\n";
    code = std::max(code, results[i].code);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-volume flows, interacting-particle simulations and structural checks "
               "for distribution dependent diffusions"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::deque<Override> overrides;
  std::string config_path;
  bool out_flag_given = false;

  const auto mirror = [&](CLI::App* sub, const std::string& flag, const char* section,
                          const char* key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag,
        [&overrides, section, key](const std::string& v) {
          overrides.push_back(Override{section, key, v});
        },
        help);
  };

  const auto experiment_subcommand = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment file; flags override its keys")
        ->check(CLI::ExistingFile);
    mirror(sub, "--name", "experiment", "name", "experiment name for the manifest");
    mirror(sub, "--set", "coefficients", "set", "coefficient set (heat pme gpme burgers meanfield)");
    mirror(sub, "--m", "coefficients", "m", "porous medium exponent");
    mirror(sub, "--d", "coefficients", "d", "spatial dimension of the coefficient set");
    mirror(sub, "--drift-scale", "coefficients", "drift_scale", "drift prefactor");
    mirror(sub, "--direction", "coefficients", "direction", "drift direction field sign");
    mirror(sub, "--h-amp", "coefficients", "h_amp", "mean-field interaction amplitude");
    mirror(sub, "--h-radius", "coefficients", "h_radius", "mean-field interaction radius");
    mirror(sub, "--sigma", "coefficients", "sigma", "constant diffusion of the mean-field set");
    mirror(sub, "--eps-floor", "coefficients", "eps_floor", "density floor inside the sde diffusion");
    mirror(sub, "--x-min", "grid", "x_min", "left domain edge");
    mirror(sub, "--x-max", "grid", "x_max", "right domain edge");
    mirror(sub, "--n-cells", "grid", "n_cells", "cell count");
    mirror(sub, "--s", "times", "start", "start time");
    mirror(sub, "--outputs", "times", "outputs", "comma list of output times after the start");
    mirror(sub, "--initial", "initial", "kind", "initial datum kind (dirac uniform gaussian barenblatt)");
    mirror(sub, "--x0", "initial", "x0", "dirac or barenblatt center");
    mirror(sub, "--a", "initial", "a", "uniform lower edge");
    mirror(sub, "--b", "initial", "b", "uniform upper edge");
    mirror(sub, "--mean", "initial", "mean", "gaussian mean");
    mirror(sub, "--sd", "initial", "sd", "gaussian standard deviation");
    mirror(sub, "--tau0", "initial", "tau0", "barenblatt pre-age");
    mirror(sub, "--n", "particles", "n", "particle count");
    mirror(sub, "--dt", "particles", "dt", "euler step");
    mirror(sub, "--seed", "particles", "seed", "rng seed");
    mirror(sub, "--feedback-cells", "particles", "feedback_cells", "cells of the smoothing grid");
    mirror(sub, "--r", "verify", "r", "restart time");
    mirror(sub, "--t", "verify", "t", "final comparison time");
    mirror(sub, "--mode", "verify", "mode", "flow check mode (pde or particles)");
    mirror(sub, "--y-bins", "verify", "y_bins", "conditioning bin count");
    mirror(sub, "--min-bin-count", "verify", "min_bin_count", "samples a retained bin needs");
    mirror(sub, "--n-bootstrap", "verify", "n_bootstrap", "bootstrap resamples per bin");
    mirror(sub, "--bootstrap-level", "verify", "bootstrap_level", "bootstrap confidence level");
    mirror(sub, "--setup-tol", "verify", "setup_tol", "allowed marginal gap at the restart time");
    mirror(sub, "--pass-fraction", "verify", "pass_fraction", "central bins that must pass");
    mirror(sub, "--seeds", "verify", "seeds", "comma list for the flow check battery");
    mirror(sub, "--flow-tol", "verify", "flow_tol", "restart gap tolerance");
    mirror(sub, "--probe-floor", "verify", "probe_floor", "cell mass a composition probe needs");
    mirror(sub, "--ck-factor", "verify", "ck_factor", "required residual ratio over the control");
    mirror(sub, "--ck-floor", "verify", "ck_floor", "control residual floor");
    mirror(sub, "--fdd-times", "verify", "fdd_times", "comma list of reconstruction times");
    mirror(sub, "--fdd-factors", "verify", "fdd_factors", "factor per time (x x2 pos one)");
    mirror(sub, "--fdd-tol", "verify", "fdd_tol", "reconstruction error tolerance");
    sub->add_flag_callback(
        "--negative-control",
        [&overrides] { overrides.push_back(Override{"verify", "negative_control", "true"}); },
        "restart from the matched linear flow's final marginal instead of the reached one");
    sub->add_option_function<std::string>(
        "--out",
        [&overrides, &out_flag_given](const std::string& v) {
          overrides.push_back(Override{"output", "dir", v});
          out_flag_given = true;
        },
        "output directory");
    sub->add_flag_callback(
        "--no-csv", [&overrides] { overrides.push_back(Override{"output", "csv", "false"}); },
        "skip csv artifacts");
    sub->add_flag_callback(
        "--no-archive",
        [&overrides] { overrides.push_back(Override{"output", "archive", "false"}); },
        "skip binary archives");
    return sub;
  };

  std::vector<CLI::App*> experiment_subs = {
      experiment_subcommand("solve", "evolve a density with the finite-volume solver"),
      experiment_subcommand("simulate", "run the interacting-particle system"),
      experiment_subcommand("verify-markov",
                            "compare conditional laws of a run against its restarted copy"),
      experiment_subcommand("verify-flow", "measure the restart gap of the marginal flow"),
      experiment_subcommand("verify-ck",
                            "measure the composition residual against a linear control"),
      experiment_subcommand("reconstruct-fdd",
                            "rebuild a path expectation from restarted transition kernels"),
  };

  std::string archive_path;
  CLI::App* report = app.add_subcommand("report", "print the summary of a stored run archive");
  report->add_option("archive", archive_path, "flow or paths archive")->required();

  std::vector<std::string> batch_paths;
  std::size_t workers_flag = 0;
  CLI::App* run = app.add_subcommand("run", "execute a batch of experiment files");
  run->add_option("configs", batch_paths, "experiment files")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--workers", workers_flag,
                  "concurrent experiments (default NMLAB_WORKERS or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) return report_archive(archive_path);
    if (run->parsed()) return run_batch(batch_paths, resolve_workers(workers_flag));

    for (CLI::App* sub : experiment_subs) {
      if (!sub->parsed()) continue;
      ConfigFile file = config_path.empty() ? ConfigFile::parse("") : ConfigFile::load(config_path);
      apply_override(file, Override{"experiment", "kind", sub->get_name()});
      for (const Override& o : overrides) apply_override(file, o);
      file.source = file.render();

      ExperimentConfig cfg = ExperimentConfig::from_file(file);
      cfg.out_dir = resolve_out_dir(cfg.out_dir, out_flag_given);
      const RunResult res = run_experiment(cfg);
      std::cout << res.summary << " -> " << cfg.out_dir << "\n";
      return res.exit_code;
    }
    return 2;
  } catch (const config_error& ex) {
    std::cerr << ex.what() << "\n";
    return 2;
  } catch (const setup_error& ex) {
    std::cerr << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << ex.what() << "\n";
    return 1;
  }
}
