#include "nmlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nmlab/errors.hpp"
#include "nmlab/io.hpp"

namespace nmlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  if (line == 0) throw config_error("config: command line: " + msg);
  throw config_error("config: line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> parts;
  std::string cur;
  std::stringstream ss(raw);
  while (std::getline(ss, cur, ',')) parts.push_back(trim(cur));
  while (!parts.empty() && parts.back().empty()) parts.pop_back();
  return parts;
}

double parse_double(const ConfigEntry& e) {
  const std::string t = trim(e.raw);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    fail(e.line, "key '" + e.key + "' expects a number, got '" + e.raw + "'");
  return v;
}

std::uint64_t parse_u64(const ConfigEntry& e) {
  const std::string t = trim(e.raw);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || t[0] == '-')
    fail(e.line, "key '" + e.key + "' expects a nonnegative integer, got '" + e.raw + "'");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const ConfigEntry& e) {
  const std::string t = trim(e.raw);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  fail(e.line, "key '" + e.key + "' expects true or false, got '" + e.raw + "'");
}

const ConfigEntry& require(const ConfigSection& s, const std::string& key) {
  const ConfigEntry* e = s.find(key);
  if (!e) fail(s.line, "section [" + s.name + "] is missing required key '" + key + "'");
  return *e;
}

}  // namespace

const ConfigEntry* ConfigSection::find(const std::string& key) const {
  for (const ConfigEntry& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile f;
  f.source = text;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  ConfigSection* current = nullptr;

  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;

    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) fail(lineno, "malformed section header '" + t + "'");
      const std::string name = trim(t.substr(1, t.size() - 2));
      if (name.empty()) fail(lineno, "empty section name");
      for (const ConfigSection& s : f.sections)
        if (s.name == name) fail(lineno, "section [" + name + "] appears twice");
      f.sections.push_back(ConfigSection{name, lineno, {}});
      current = &f.sections.back();
      continue;
    }

    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail(lineno, "empty key");
    if (value.empty()) fail(lineno, "key '" + key + "' has no value");
    if (!current) fail(lineno, "key '" + key + "' appears before any [section]");
    if (current->find(key))
      fail(lineno, "key '" + key + "' appears twice in section [" + current->name + "]");
    current->entries.push_back(ConfigEntry{key, value, lineno});
  }
  return f;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ConfigFile::render() const {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) out += "\n";
    out += "[" + sections[i].name + "]\n";
    for (const ConfigEntry& e : sections[i].entries) out += e.key + " = " + e.raw + "\n";
  }
  return out;
}

const ConfigSection* ConfigFile::find(const std::string& name) const {
  for (const ConfigSection& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

double entry_double(const ConfigSection& s, const std::string& key) {
  return parse_double(require(s, key));
}

double entry_double_or(const ConfigSection* s, const std::string& key, double fallback) {
  if (!s) return fallback;
  const ConfigEntry* e = s->find(key);
  return e ? parse_double(*e) : fallback;
}

std::size_t entry_size(const ConfigSection& s, const std::string& key) {
  return static_cast<std::size_t>(parse_u64(require(s, key)));
}

std::size_t entry_size_or(const ConfigSection* s, const std::string& key, std::size_t fallback) {
  if (!s) return fallback;
  const ConfigEntry* e = s->find(key);
  return e ? static_cast<std::size_t>(parse_u64(*e)) : fallback;
}

std::uint64_t entry_u64_or(const ConfigSection* s, const std::string& key,
                           std::uint64_t fallback) {
  if (!s) return fallback;
  const ConfigEntry* e = s->find(key);
  return e ? parse_u64(*e) : fallback;
}

bool entry_bool_or(const ConfigSection* s, const std::string& key, bool fallback) {
  if (!s) return fallback;
  const ConfigEntry* e = s->find(key);
  return e ? parse_bool(*e) : fallback;
}

std::string entry_string(const ConfigSection& s, const std::string& key) {
  return trim(require(s, key).raw);
}

std::string entry_string_or(const ConfigSection* s, const std::string& key,
                            const std::string& fallback) {
  if (!s) return fallback;
  const ConfigEntry* e = s->find(key);
  return e ? trim(e->raw) : fallback;
}

std::vector<double> entry_double_list(const ConfigSection& s, const std::string& key) {
  const ConfigEntry& e = require(s, key);
  std::vector<double> out;
  for (const std::string& part : split_list(e.raw)) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size())
      fail(e.line, "key '" + key + "' expects a comma-separated number list");
    out.push_back(v);
  }
  if (out.empty()) fail(e.line, "key '" + key + "' lists no values");
  return out;
}

std::vector<std::uint64_t> entry_u64_list_or(const ConfigSection* s, const std::string& key,
                                             const std::vector<std::uint64_t>& fallback) {
  if (!s || !s->find(key)) return fallback;
  const ConfigEntry& e = *s->find(key);
  std::vector<std::uint64_t> out;
  for (const std::string& part : split_list(e.raw)) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(part.c_str(), &end, 10);
    if (part.empty() || end != part.c_str() + part.size())
      fail(e.line, "key '" + key + "' expects a comma-separated integer list");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty()) fail(e.line, "key '" + key + "' lists no values");
  return out;
}

void validate_known_keys(const ConfigFile& f) {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"experiment", {"name", "kind"}},
      {"coefficients",
       {"set", "m", "d", "drift_scale", "direction", "h_amp", "h_radius", "sigma", "eps_floor"}},
      {"grid", {"x_min", "x_max", "n_cells"}},
      {"times", {"start", "outputs"}},
      {"initial", {"kind", "x0", "a", "b", "mean", "sd", "tau0"}},
      {"particles", {"n", "dt", "seed", "feedback_cells"}},
      {"verify",
       {"r", "t", "mode", "y_bins", "min_bin_count", "n_bootstrap", "bootstrap_level",
        "setup_tol", "pass_fraction", "negative_control", "seeds", "flow_tol", "probe_floor",
        "ck_factor", "ck_floor", "fdd_times", "fdd_factors", "fdd_tol"}},
      {"output", {"dir", "csv", "archive"}},
  };
  for (const ConfigSection& s : f.sections) {
    const auto it = schema.find(s.name);
    if (it == schema.end()) fail(s.line, "unknown section [" + s.name + "]");
    for (const ConfigEntry& e : s.entries)
      if (!it->second.count(e.key))
        fail(e.line, "unknown key '" + e.key + "' in section [" + s.name + "]");
  }
}

ExperimentConfig ExperimentConfig::from_file(const ConfigFile& f) {
  validate_known_keys(f);
  ExperimentConfig cfg;
  cfg.config_text = f.source;
  cfg.config_hash = fnv1a(f.source);

  const ConfigSection* exp = f.find("experiment");
  cfg.name = entry_string_or(exp, "name", cfg.name);
  cfg.kind = entry_string_or(exp, "kind", cfg.kind);
  static const std::set<std::string> kinds = {"solve",       "simulate",      "verify-markov",
                                              "verify-flow", "verify-ck",     "reconstruct-fdd"};
  if (!kinds.count(cfg.kind)) {
    const std::size_t line = exp && exp->find("kind") ? exp->find("kind")->line : 1;
    fail(line, "unknown experiment kind '" + cfg.kind + "'");
  }

  if (const ConfigSection* co = f.find("coefficients")) {
    cfg.coefficient_set = entry_string_or(co, "set", cfg.coefficient_set);
    cfg.reg.m = entry_double_or(co, "m", cfg.reg.m);
    cfg.reg.d = static_cast<int>(entry_size_or(co, "d", static_cast<std::size_t>(cfg.reg.d)));
    cfg.reg.drift_scale = entry_double_or(co, "drift_scale", cfg.reg.drift_scale);
    cfg.reg.direction = entry_double_or(co, "direction", cfg.reg.direction);
    cfg.reg.h_amp = entry_double_or(co, "h_amp", cfg.reg.h_amp);
    cfg.reg.h_radius = entry_double_or(co, "h_radius", cfg.reg.h_radius);
    cfg.reg.sigma = entry_double_or(co, "sigma", cfg.reg.sigma);
    cfg.reg.eps_floor = entry_double_or(co, "eps_floor", cfg.reg.eps_floor);
    try {
      registry_lookup(cfg.coefficient_set, cfg.reg);
    } catch (const std::exception& ex) {
      fail(co->find("set") ? co->find("set")->line : co->line, ex.what());
    }
  }

  if (const ConfigSection* gr = f.find("grid")) {
    cfg.grid.x_min = entry_double(*gr, "x_min");
    cfg.grid.x_max = entry_double(*gr, "x_max");
    cfg.grid.n_cells = entry_size(*gr, "n_cells");
    cfg.grid_given = true;
    if (!(cfg.grid.x_min < cfg.grid.x_max) || cfg.grid.n_cells == 0)
      fail(gr->line, "[grid] needs x_min < x_max and n_cells >= 1");
  }

  const ConfigSection* tm = f.find("times");
  cfg.start_time = entry_double_or(tm, "start", cfg.start_time);
  cfg.output_times = {cfg.start_time};
  if (tm && tm->find("outputs")) {
    const std::vector<double> outs = entry_double_list(*tm, "outputs");
    double prev = cfg.start_time;
    for (const double t : outs) {
      if (!(t > prev))
        fail(tm->find("outputs")->line, "[times] outputs must increase strictly from the start");
      cfg.output_times.push_back(t);
      prev = t;
    }
  }

  if (const ConfigSection* in = f.find("initial")) {
    cfg.initial.kind = entry_string_or(in, "kind", cfg.initial.kind);
    static const std::set<std::string> datum_kinds = {"dirac", "uniform", "gaussian",
                                                      "barenblatt"};
    if (!datum_kinds.count(cfg.initial.kind))
      fail(in->find("kind") ? in->find("kind")->line : in->line,
           "unknown initial datum kind '" + cfg.initial.kind + "'");
    cfg.initial.x0 = entry_double_or(in, "x0", cfg.initial.x0);
    cfg.initial.a = entry_double_or(in, "a", cfg.initial.a);
    cfg.initial.b = entry_double_or(in, "b", cfg.initial.b);
    cfg.initial.mean = entry_double_or(in, "mean", cfg.initial.mean);
    cfg.initial.sd = entry_double_or(in, "sd", cfg.initial.sd);
    cfg.initial.tau0 = entry_double_or(in, "tau0", cfg.initial.tau0);
    if (cfg.initial.kind == "uniform" && !(cfg.initial.a < cfg.initial.b))
      fail(in->line, "uniform initial datum needs a < b");
    if (cfg.initial.kind == "gaussian" && !(cfg.initial.sd > 0.0))
      fail(in->line, "gaussian initial datum needs sd > 0");
    if (cfg.initial.kind == "barenblatt" && !(cfg.initial.tau0 > 0.0))
      fail(in->line, "barenblatt initial datum needs tau0 > 0");
  }

  if (const ConfigSection* pa = f.find("particles")) {
    cfg.n_particles = entry_size_or(pa, "n", cfg.n_particles);
    cfg.dt = entry_double_or(pa, "dt", cfg.dt);
    cfg.seed = entry_u64_or(pa, "seed", cfg.seed);
    cfg.feedback_cells = entry_size_or(pa, "feedback_cells", cfg.feedback_cells);
    if (!(cfg.dt > 0.0)) fail(pa->line, "[particles] dt must be positive");
    if (cfg.n_particles == 0) fail(pa->line, "[particles] n must be positive");
  }

  if (const ConfigSection* ve = f.find("verify")) {
    cfg.verify_r = entry_double_or(ve, "r", cfg.verify_r);
    cfg.verify_t = entry_double_or(ve, "t", cfg.verify_t);
    cfg.flow_mode = entry_string_or(ve, "mode", cfg.flow_mode);
    if (cfg.flow_mode != "pde" && cfg.flow_mode != "particles")
      fail(ve->find("mode") ? ve->find("mode")->line : ve->line,
           "verify mode must be pde or particles");
    cfg.y_bins = entry_size_or(ve, "y_bins", cfg.y_bins);
    cfg.y_bins_given = ve->find("y_bins") != nullptr;
    cfg.min_bin_count = entry_size_or(ve, "min_bin_count", cfg.min_bin_count);
    cfg.n_bootstrap = entry_size_or(ve, "n_bootstrap", cfg.n_bootstrap);
    cfg.bootstrap_level = entry_double_or(ve, "bootstrap_level", cfg.bootstrap_level);
    cfg.setup_tol = entry_double_or(ve, "setup_tol", cfg.setup_tol);
    cfg.pass_fraction = entry_double_or(ve, "pass_fraction", cfg.pass_fraction);
    cfg.negative_control = entry_bool_or(ve, "negative_control", cfg.negative_control);
    cfg.seeds = entry_u64_list_or(ve, "seeds", cfg.seeds);
    cfg.flow_tol = entry_double_or(ve, "flow_tol", cfg.flow_tol);
    cfg.probe_floor = entry_double_or(ve, "probe_floor", cfg.probe_floor);
    cfg.ck_factor = entry_double_or(ve, "ck_factor", cfg.ck_factor);
    cfg.ck_floor = entry_double_or(ve, "ck_floor", cfg.ck_floor);
    if (ve->find("fdd_times")) cfg.fdd_times = entry_double_list(*ve, "fdd_times");
    if (ve->find("fdd_factors")) {
      cfg.fdd_factors.clear();
      for (const std::string& name : split_list(ve->find("fdd_factors")->raw)) {
        static const std::set<std::string> known = {"x", "x2", "pos", "one"};
        if (!known.count(name))
          fail(ve->find("fdd_factors")->line, "unknown fdd factor '" + name + "'");
        cfg.fdd_factors.push_back(name);
      }
    }
    cfg.fdd_tol = entry_double_or(ve, "fdd_tol", cfg.fdd_tol);
    if (!(cfg.bootstrap_level > 0.0 && cfg.bootstrap_level < 1.0))
      fail(ve->line, "bootstrap_level must sit inside (0, 1)");
    if (!(cfg.pass_fraction > 0.0 && cfg.pass_fraction <= 1.0))
      fail(ve->line, "pass_fraction must sit inside (0, 1]");
    for (std::size_t i = 1; i < cfg.fdd_times.size(); ++i)
      if (!(cfg.fdd_times[i] > cfg.fdd_times[i - 1]))
        fail(ve->find("fdd_times")->line, "fdd_times must increase strictly");
  }

  if (const ConfigSection* ou = f.find("output")) {
    cfg.out_dir = entry_string_or(ou, "dir", cfg.out_dir);
    cfg.out_dir_given = ou->find("dir") != nullptr;
    cfg.write_csv = entry_bool_or(ou, "csv", cfg.write_csv);
    cfg.write_archive = entry_bool_or(ou, "archive", cfg.write_archive);
  }

  return cfg;
}

CoefficientSet build_coefficients(const ExperimentConfig& cfg) {
  return registry_lookup(cfg.coefficient_set, cfg.reg);
}

}  // namespace nmlab
