#include "nmlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include "nmlab/errors.hpp"

namespace nmlab {

namespace {

void write_row(std::ofstream& out, double a, double b, double c) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", a, b, c);
  out << buf;
}

std::ofstream open_out(const char* who, const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw setup_error(std::string(who) + ": cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const char* who, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw setup_error(std::string(who) + ": cannot open '" + path + "' for reading");
  return in;
}

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(const char* who, std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw setup_error(std::string(who) + ": archive ended early");
  return v;
}

void put_string(std::ofstream& out, const std::string& s) {
  put(out, static_cast<std::uint64_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(const char* who, std::ifstream& in) {
  const auto len = get<std::uint64_t>(who, in);
  if (len > (1u << 20)) throw setup_error(std::string(who) + ": unreasonable string length");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw setup_error(std::string(who) + ": archive ended early");
  return s;
}

void check_magic(const char* who, std::ifstream& in, const char expect[4]) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(expect, 4))
    throw setup_error(std::string(who) + ": bad magic, not an archive of this kind");
  const auto version = get<std::uint32_t>(who, in);
  if (version != 1)
    throw setup_error(std::string(who) + ": unsupported version " + std::to_string(version));
}

}  // namespace

void write_flow_csv(const MarginalFlow& flow, const std::string& path) {
  auto out = open_out("write_flow_csv", path, std::ios::out);
  out << "time,x,u\n";
  const GridSpec& g = flow.grid();
  for (std::size_t k = 0; k < flow.size(); ++k) {
    const std::vector<double>& v = flow.density(k).values();
    for (std::size_t i = 0; i < v.size(); ++i)
      write_row(out, flow.times()[k], g.center(i), v[i]);
  }
  if (!out) throw setup_error("write_flow_csv: write to '" + path + "' failed");
}

void write_paths_csv(const PathStore& paths, const std::string& path) {
  auto out = open_out("write_paths_csv", path, std::ios::out);
  out << "time,particle,x\n";
  char buf[96];
  for (std::size_t k = 0; k < paths.n_times(); ++k)
    for (std::size_t i = 0; i < paths.n_particles(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%zu,%.17g\n", paths.times()[k], i,
                    paths.position(k, i));
      out << buf;
    }
  if (!out) throw setup_error("write_paths_csv: write to '" + path + "' failed");
}

void write_flow_archive(const MarginalFlow& flow, const std::string& path) {
  auto out = open_out("write_flow_archive", path, std::ios::binary);
  out.write("NMFA", 4);
  put(out, static_cast<std::uint32_t>(1));
  const GridSpec& g = flow.grid();
  put(out, g.x_min);
  put(out, g.x_max);
  put(out, static_cast<std::uint64_t>(g.n_cells));
  put(out, flow.start_time());
  put(out, static_cast<std::uint64_t>(flow.size()));
  for (double t : flow.times()) put(out, t);
  for (std::size_t k = 0; k < flow.size(); ++k)
    for (double v : flow.density(k).values()) put(out, v);
  put(out, flow.meta.continuity_constant);
  put(out, flow.meta.mass_defect);
  put(out, flow.meta.clipped_mass);
  put(out, flow.meta.sup_norm);
  put(out, static_cast<std::uint64_t>(flow.meta.substeps.size()));
  for (std::size_t n : flow.meta.substeps) put(out, static_cast<std::uint64_t>(n));
  put_string(out, flow.meta.scheme);
  if (!out) throw setup_error("write_flow_archive: write to '" + path + "' failed");
}

MarginalFlow read_flow_archive(const std::string& path) {
  const char* who = "read_flow_archive";
  auto in = open_in(who, path);
  check_magic(who, in, "NMFA");
  GridSpec g;
  g.x_min = get<double>(who, in);
  g.x_max = get<double>(who, in);
  g.n_cells = static_cast<std::size_t>(get<std::uint64_t>(who, in));
  const double s = get<double>(who, in);
  const auto n_times = static_cast<std::size_t>(get<std::uint64_t>(who, in));
  if (g.n_cells == 0 || n_times == 0 || g.n_cells > (1u << 26) || n_times > (1u << 26))
    throw setup_error(std::string(who) + ": implausible archive dimensions");
  std::vector<double> times(n_times);
  for (double& t : times) t = get<double>(who, in);
  std::vector<GridDensity> dens;
  dens.reserve(n_times);
  for (std::size_t k = 0; k < n_times; ++k) {
    std::vector<double> v(g.n_cells);
    for (double& x : v) x = get<double>(who, in);
    dens.emplace_back(g, std::move(v), times[k]);
  }
  MarginalFlow flow(s, times, std::move(dens));
  flow.meta.continuity_constant = get<double>(who, in);
  flow.meta.mass_defect = get<double>(who, in);
  flow.meta.clipped_mass = get<double>(who, in);
  flow.meta.sup_norm = get<double>(who, in);
  const auto n_iv = static_cast<std::size_t>(get<std::uint64_t>(who, in));
  if (n_iv > n_times) throw setup_error(std::string(who) + ": implausible interval count");
  flow.meta.substeps.resize(n_iv);
  for (std::size_t& n : flow.meta.substeps)
    n = static_cast<std::size_t>(get<std::uint64_t>(who, in));
  flow.meta.scheme = get_string(who, in);
  return flow;
}

void write_paths_archive(const PathStore& paths, const std::string& path) {
  auto out = open_out("write_paths_archive", path, std::ios::binary);
  out.write("NMPA", 4);
  put(out, static_cast<std::uint32_t>(1));
  put(out, static_cast<std::uint64_t>(paths.n_times()));
  for (double t : paths.times()) put(out, t);
  put(out, static_cast<std::uint64_t>(paths.n_particles()));
  put(out, paths.seed);
  put(out, paths.dt);
  put(out, paths.drift_min);
  put(out, paths.drift_max);
  put(out, paths.bandwidth_last);
  put_string(out, paths.scheme);
  for (std::size_t k = 0; k < paths.n_times(); ++k)
    out.write(reinterpret_cast<const char*>(paths.row(k)),
              static_cast<std::streamsize>(paths.n_particles() * sizeof(double)));
  if (!out) throw setup_error("write_paths_archive: write to '" + path + "' failed");
}

PathStore read_paths_archive(const std::string& path) {
  const char* who = "read_paths_archive";
  auto in = open_in(who, path);
  check_magic(who, in, "NMPA");
  const auto n_times = static_cast<std::size_t>(get<std::uint64_t>(who, in));
  if (n_times == 0 || n_times > (1u << 20))
    throw setup_error(std::string(who) + ": implausible time count");
  std::vector<double> times(n_times);
  for (double& t : times) t = get<double>(who, in);
  const auto n_particles = static_cast<std::size_t>(get<std::uint64_t>(who, in));
  if (n_particles == 0 || n_particles > (1u << 28))
    throw setup_error(std::string(who) + ": implausible particle count");
  PathStore store(times, n_particles);
  store.seed = get<std::uint64_t>(who, in);
  store.dt = get<double>(who, in);
  store.drift_min = get<double>(who, in);
  store.drift_max = get<double>(who, in);
  store.bandwidth_last = get<double>(who, in);
  store.scheme = get_string(who, in);
  for (std::size_t k = 0; k < n_times; ++k) {
    in.read(reinterpret_cast<char*>(store.row(k)),
            static_cast<std::streamsize>(n_particles * sizeof(double)));
    if (!in) throw setup_error(std::string(who) + ": archive ended early");
  }
  return store;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char ch : text) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace nmlab
