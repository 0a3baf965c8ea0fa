#include "doctest.h"

#include <string>
#include <vector>

#include "nmlab/config.hpp"
#include "nmlab/errors.hpp"
#include "nmlab/io.hpp"

using namespace nmlab;

TEST_CASE("parsing keeps sections, entries, and line anchors") {
  const std::string text =
      "# density experiment\n"
      "[experiment]\n"
      "name = demo   # trailing note\n"
      "\n"
      "[grid]\n"
      "x_min = -4\n"
      "x_max = 4\n"
      "n_cells = 16\n";
  const ConfigFile f = ConfigFile::parse(text);
  CHECK(f.source == text);
  REQUIRE(f.sections.size() == 2);
  CHECK(f.sections[0].name == "experiment");
  CHECK(f.sections[0].line == 2);
  REQUIRE(f.sections[0].entries.size() == 1);
  CHECK(f.sections[0].entries[0].key == "name");
  CHECK(f.sections[0].entries[0].raw == "demo");
  CHECK(f.sections[0].entries[0].line == 3);

  const ConfigSection* gr = f.find("grid");
  REQUIRE(gr != nullptr);
  CHECK(gr->line == 5);
  CHECK(gr->entries.size() == 3);
  CHECK(gr->find("x_max")->raw == "4");
  CHECK(gr->find("x_max")->line == 7);
  CHECK(gr->find("spacing") == nullptr);
  CHECK(f.find("solver") == nullptr);
}

TEST_CASE("render reaches a fixpoint after one round trip") {
  const std::string text =
      "  [times]   # when to write\n"
      "start=0\n"
      "outputs =   0.5, 1.0\n"
      "[output]\n"
      "dir = runs\n";
  const std::string once = ConfigFile::parse(text).render();
  CHECK(once ==
        "[times]\n"
        "start = 0\n"
        "outputs = 0.5, 1.0\n"
        "\n"
        "[output]\n"
        "dir = runs\n");
  CHECK(ConfigFile::parse(once).render() == once);
}

TEST_CASE("malformed lines fail with their line number") {
  CHECK_THROWS_WITH_AS(ConfigFile::parse("[grid\n"),
                       "config: line 1: malformed section header '[grid'", config_error);
  CHECK_THROWS_WITH_AS(ConfigFile::parse("[ ]\n"), "config: line 1: empty section name",
                       config_error);
  CHECK_THROWS_WITH_AS(ConfigFile::parse("[grid]\n[grid]\n"),
                       "config: line 2: section [grid] appears twice", config_error);
  CHECK_THROWS_WITH_AS(ConfigFile::parse("[grid]\nx_min\n"),
                       "config: line 2: expected 'key = value', got 'x_min'", config_error);
  CHECK_THROWS_WITH_AS(ConfigFile::parse("[grid]\n= 3\n"), "config: line 2: empty key",
                       config_error);
  CHECK_THROWS_WITH_AS(ConfigFile::parse("[grid]\nx_min =\n"),
                       "config: line 2: key 'x_min' has no value", config_error);
  CHECK_THROWS_WITH_AS(ConfigFile::parse("x_min = 0\n"),
                       "config: line 1: key 'x_min' appears before any [section]", config_error);
  CHECK_THROWS_WITH_AS(ConfigFile::parse("[grid]\nx_min = 0\nx_min = 1\n"),
                       "config: line 3: key 'x_min' appears twice in section [grid]",
                       config_error);
}

TEST_CASE("loading a missing file names the path") {
  CHECK_THROWS_WITH_AS(ConfigFile::load("/nonexistent/nmlab.conf"),
                       "config: cannot open '/nonexistent/nmlab.conf'", config_error);
}

TEST_CASE("typed readers reject mismatched values at their lines") {
  const ConfigFile f = ConfigFile::parse(
      "[verify]\n"
      "r = fast\n"
      "y_bins = -3\n"
      "negative_control = maybe\n"
      "seeds = 1, two\n"
      "fdd_times = ,\n"
      "mode = pde\n");
  const ConfigSection& s = f.sections[0];
  CHECK_THROWS_WITH_AS(entry_double(s, "r"),
                       "config: line 2: key 'r' expects a number, got 'fast'", config_error);
  CHECK_THROWS_WITH_AS(entry_size(s, "y_bins"),
                       "config: line 3: key 'y_bins' expects a nonnegative integer, got '-3'",
                       config_error);
  CHECK_THROWS_WITH_AS(
      entry_bool_or(&s, "negative_control", false),
      "config: line 4: key 'negative_control' expects true or false, got 'maybe'", config_error);
  CHECK_THROWS_WITH_AS(entry_u64_list_or(&s, "seeds", {}),
                       "config: line 5: key 'seeds' expects a comma-separated integer list",
                       config_error);
  CHECK_THROWS_WITH_AS(entry_double_list(s, "fdd_times"),
                       "config: line 6: key 'fdd_times' lists no values", config_error);
  CHECK_THROWS_WITH_AS(entry_double(s, "t"),
                       "config: line 1: section [verify] is missing required key 't'",
                       config_error);

  CHECK(entry_double_or(nullptr, "r", 2.5) == 2.5);
  CHECK(entry_string_or(&s, "mode", "particles") == "pde");
  CHECK(entry_string_or(&s, "absent", "particles") == "particles");
  CHECK(entry_u64_list_or(&s, "absent", {7}) == std::vector<std::uint64_t>{7});
}

TEST_CASE("entries injected without a line report the command line") {
  ConfigSection s;
  s.name = "grid";
  s.line = 0;
  s.entries.push_back(ConfigEntry{"x_min", "wide", 0});
  CHECK_THROWS_WITH_AS(entry_double(s, "x_min"),
                       "config: command line: key 'x_min' expects a number, got 'wide'",
                       config_error);
  CHECK_THROWS_WITH_AS(entry_double(s, "x_max"),
                       "config: command line: section [grid] is missing required key 'x_max'",
                       config_error);
}

TEST_CASE("schema validation anchors unknown names to their lines") {
  CHECK_THROWS_WITH_AS(validate_known_keys(ConfigFile::parse("[solver]\ncfl = 0.4\n")),
                       "config: line 1: unknown section [solver]", config_error);
  CHECK_THROWS_WITH_AS(
      validate_known_keys(ConfigFile::parse("[grid]\nn_cells = 4\nwidth = 2\n")),
      "config: line 3: unknown key 'width' in section [grid]", config_error);
  CHECK_NOTHROW(validate_known_keys(ConfigFile::parse("[verify]\nck_floor = 1e-3\n")));
}

TEST_CASE("an empty file yields the default experiment") {
  const ExperimentConfig cfg = ExperimentConfig::from_file(ConfigFile::parse(""));
  CHECK(cfg.kind == "solve");
  CHECK(cfg.coefficient_set == "heat");
  CHECK(!cfg.grid_given);
  CHECK(cfg.output_times == std::vector<double>{0.0});
  CHECK(cfg.initial.kind == "dirac");
  CHECK(cfg.n_particles == 10000);
  CHECK(!cfg.y_bins_given);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{11, 12, 13, 14, 15});
  CHECK(cfg.out_dir == "out");
  CHECK(!cfg.out_dir_given);
  CHECK(cfg.config_hash == fnv1a(""));
}

TEST_CASE("a full experiment file reads every section") {
  const std::string text =
      "[experiment]\n"
      "name = pme-spread\n"
      "kind = simulate\n"
      "\n"
      "[coefficients]\n"
      "set = pme\n"
      "m = 2\n"
      "\n"
      "[grid]\n"
      "x_min = -6\n"
      "x_max = 6\n"
      "n_cells = 512\n"
      "\n"
      "[times]\n"
      "start = 0.0\n"
      "outputs = 0.25, 0.5, 1\n"
      "\n"
      "[initial]\n"
      "kind = barenblatt\n"
      "tau0 = 0.2\n"
      "\n"
      "[particles]\n"
      "n = 4000\n"
      "dt = 0.002\n"
      "seed = 9\n"
      "feedback_cells = 256\n"
      "\n"
      "[verify]\n"
      "r = 0.5\n"
      "t = 1.0\n"
      "mode = particles\n"
      "y_bins = 12\n"
      "negative_control = yes\n"
      "seeds = 3, 4, 5\n"
      "fdd_times = 0.25, 0.75\n"
      "fdd_factors = x, pos\n"
      "\n"
      "[output]\n"
      "dir = runs/pme\n"
      "csv = false\n"
      "archive = true\n";
  const ExperimentConfig cfg = ExperimentConfig::from_file(ConfigFile::parse(text));
  CHECK(cfg.name == "pme-spread");
  CHECK(cfg.kind == "simulate");
  CHECK(cfg.coefficient_set == "pme");
  CHECK(cfg.reg.m == 2.0);
  CHECK(cfg.grid_given);
  CHECK(cfg.grid == GridSpec{-6.0, 6.0, 512});
  CHECK(cfg.output_times == std::vector<double>{0.0, 0.25, 0.5, 1.0});
  CHECK(cfg.initial.kind == "barenblatt");
  CHECK(cfg.initial.tau0 == 0.2);
  CHECK(cfg.n_particles == 4000);
  CHECK(cfg.dt == 0.002);
  CHECK(cfg.seed == 9);
  CHECK(cfg.feedback_cells == 256);
  CHECK(cfg.verify_r == 0.5);
  CHECK(cfg.verify_t == 1.0);
  CHECK(cfg.flow_mode == "particles");
  CHECK(cfg.y_bins == 12);
  CHECK(cfg.y_bins_given);
  CHECK(cfg.negative_control);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4, 5});
  CHECK(cfg.fdd_times == std::vector<double>{0.25, 0.75});
  CHECK(cfg.fdd_factors == std::vector<std::string>{"x", "pos"});
  CHECK(cfg.out_dir == "runs/pme");
  CHECK(cfg.out_dir_given);
  CHECK(!cfg.write_csv);
  CHECK(cfg.write_archive);
  CHECK(cfg.config_hash == fnv1a(text));
  CHECK(cfg.config_text == text);
}

TEST_CASE("experiment validation is line-anchored") {
  const auto from = [](const std::string& text) {
    return ExperimentConfig::from_file(ConfigFile::parse(text));
  };
  CHECK_THROWS_WITH_AS(from("[experiment]\nkind = train\n"),
                       "config: line 2: unknown experiment kind 'train'", config_error);
  CHECK_THROWS_WITH_AS(from("[coefficients]\nset = pme\nm = 0.5\n"),
                       "config: line 2: registry_lookup: pme requires m >= 1", config_error);
  CHECK_THROWS_WITH_AS(from("[grid]\nx_min = 2\nx_max = -2\nn_cells = 8\n"),
                       "config: line 1: [grid] needs x_min < x_max and n_cells >= 1",
                       config_error);
  CHECK_THROWS_WITH_AS(from("[times]\nstart = 0\noutputs = 0.5, 0.25\n"),
                       "config: line 3: [times] outputs must increase strictly from the start",
                       config_error);
  CHECK_THROWS_WITH_AS(from("[initial]\nkind = delta\n"),
                       "config: line 2: unknown initial datum kind 'delta'", config_error);
  CHECK_THROWS_WITH_AS(from("[initial]\nkind = uniform\na = 1\nb = -1\n"),
                       "config: line 1: uniform initial datum needs a < b", config_error);
  CHECK_THROWS_WITH_AS(from("[initial]\nkind = barenblatt\ntau0 = 0\n"),
                       "config: line 1: barenblatt initial datum needs tau0 > 0", config_error);
  CHECK_THROWS_WITH_AS(from("[particles]\nn = 100\ndt = 0\n"),
                       "config: line 1: [particles] dt must be positive", config_error);
  CHECK_THROWS_WITH_AS(from("[verify]\nmode = hybrid\n"),
                       "config: line 2: verify mode must be pde or particles", config_error);
  CHECK_THROWS_WITH_AS(from("[verify]\nbootstrap_level = 1.5\n"),
                       "config: line 1: bootstrap_level must sit inside (0, 1)", config_error);
  CHECK_THROWS_WITH_AS(from("[verify]\npass_fraction = 0\n"),
                       "config: line 1: pass_fraction must sit inside (0, 1]", config_error);
  CHECK_THROWS_WITH_AS(from("[verify]\nfdd_times = 0.5, 0.5\n"),
                       "config: line 2: fdd_times must increase strictly", config_error);
  CHECK_THROWS_WITH_AS(from("[verify]\nfdd_factors = x, cube\n"),
                       "config: line 2: unknown fdd factor 'cube'", config_error);
}
