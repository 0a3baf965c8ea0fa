#include "doctest.h"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nmlab/errors.hpp"
#include "nmlab/grid.hpp"
#include "nmlab/io.hpp"
#include "nmlab/particles.hpp"

using namespace nmlab;

namespace {

MarginalFlow sample_flow() {
  const GridSpec g{-1.0, 1.0, 8};
  std::vector<GridDensity> dens;
  dens.push_back(GridDensity::normalized(g, {1.0, 2.0, 3.0, 5.0, 7.0, 3.0, 2.0, 1.0}, 0.0));
  dens.push_back(GridDensity::normalized(g, {0.0, 1.0, 4.0, 9.0, 9.0, 4.0, 1.0, 0.0}, 0.25));
  MarginalFlow flow(0.0, {0.0, 0.25}, std::move(dens));
  flow.meta.continuity_constant = 1.0 / 3.0;
  flow.meta.mass_defect = 2.2e-16;
  flow.meta.clipped_mass = 1.5e-13;
  flow.meta.sup_norm = 7.0 / 4.8;
  flow.meta.substeps = {3, 17};
  flow.meta.scheme = "fv-nemytskii";
  return flow;
}

PathStore sample_paths() {
  PathStore store({0.0, 0.5, 1.0}, 4);
  double v = -2.0;
  for (std::size_t k = 0; k < store.n_times(); ++k)
    for (std::size_t i = 0; i < store.n_particles(); ++i) {
      store.row(k)[i] = v / 3.0;
      v += 0.7;
    }
  store.seed = 424242;
  store.dt = 1e-3;
  store.scheme = "euler-maruyama-kde";
  store.drift_min = -0.125;
  store.drift_max = 2.0 / 7.0;
  store.bandwidth_last = 0.31622776601683794;
  return store;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<double> split_doubles(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(std::strtod(part.c_str(), nullptr));
  return out;
}

}  // namespace

TEST_CASE("flow archives round-trip bit for bit") {
  const std::string path = "io_flow_roundtrip.nmfa";
  const MarginalFlow flow = sample_flow();
  write_flow_archive(flow, path);
  const MarginalFlow back = read_flow_archive(path);

  CHECK(back.grid() == flow.grid());
  CHECK(back.start_time() == flow.start_time());
  REQUIRE(back.times() == flow.times());
  for (std::size_t k = 0; k < flow.size(); ++k)
    CHECK(back.density(k).values() == flow.density(k).values());
  CHECK(back.meta.continuity_constant == flow.meta.continuity_constant);
  CHECK(back.meta.mass_defect == flow.meta.mass_defect);
  CHECK(back.meta.clipped_mass == flow.meta.clipped_mass);
  CHECK(back.meta.sup_norm == flow.meta.sup_norm);
  CHECK(back.meta.substeps == flow.meta.substeps);
  CHECK(back.meta.scheme == flow.meta.scheme);
  std::remove(path.c_str());
}

TEST_CASE("path archives round-trip bit for bit") {
  const std::string path = "io_paths_roundtrip.nmpa";
  const PathStore store = sample_paths();
  write_paths_archive(store, path);
  const PathStore back = read_paths_archive(path);

  REQUIRE(back.n_times() == store.n_times());
  REQUIRE(back.n_particles() == store.n_particles());
  CHECK(back.times() == store.times());
  for (std::size_t k = 0; k < store.n_times(); ++k)
    for (std::size_t i = 0; i < store.n_particles(); ++i)
      CHECK(back.position(k, i) == store.position(k, i));
  CHECK(back.seed == store.seed);
  CHECK(back.dt == store.dt);
  CHECK(back.scheme == store.scheme);
  CHECK(back.drift_min == store.drift_min);
  CHECK(back.drift_max == store.drift_max);
  CHECK(back.bandwidth_last == store.bandwidth_last);
  std::remove(path.c_str());
}

TEST_CASE("flow csv rows carry full double precision") {
  const std::string path = "io_flow.csv";
  const MarginalFlow flow = sample_flow();
  write_flow_csv(flow, path);
  const std::vector<std::string> lines = read_lines(path);

  REQUIRE(lines.size() == 1 + flow.size() * flow.grid().n_cells);
  CHECK(lines[0] == "time,x,u");
  for (std::size_t k = 0; k < flow.size(); ++k)
    for (std::size_t i = 0; i < flow.grid().n_cells; ++i) {
      const std::vector<double> row = split_doubles(lines[1 + k * flow.grid().n_cells + i]);
      REQUIRE(row.size() == 3);
      CHECK(row[0] == flow.times()[k]);
      CHECK(row[1] == flow.grid().center(i));
      CHECK(row[2] == flow.density(k).values()[i]);
    }
  std::remove(path.c_str());
}

TEST_CASE("path csv rows name the particle index") {
  const std::string path = "io_paths.csv";
  const PathStore store = sample_paths();
  write_paths_csv(store, path);
  const std::vector<std::string> lines = read_lines(path);

  REQUIRE(lines.size() == 1 + store.n_times() * store.n_particles());
  CHECK(lines[0] == "time,particle,x");
  CHECK(lines[1].substr(0, 4) == "0,0,");
  for (std::size_t k = 0; k < store.n_times(); ++k)
    for (std::size_t i = 0; i < store.n_particles(); ++i) {
      const std::vector<double> row = split_doubles(lines[1 + k * store.n_particles() + i]);
      REQUIRE(row.size() == 3);
      CHECK(row[0] == store.times()[k]);
      CHECK(row[1] == static_cast<double>(i));
      CHECK(row[2] == store.position(k, i));
    }
  std::remove(path.c_str());
}

TEST_CASE("corrupt archives are rejected with a reason") {
  const std::string flow_path = "io_corrupt.nmfa";
  const std::string paths_path = "io_corrupt.nmpa";
  write_flow_archive(sample_flow(), flow_path);
  write_paths_archive(sample_paths(), paths_path);

  SUBCASE("a missing file names the path") {
    CHECK_THROWS_WITH_AS(read_flow_archive("/nonexistent/x.nmfa"),
                         "read_flow_archive: cannot open '/nonexistent/x.nmfa' for reading",
                         setup_error);
  }
  SUBCASE("the two archive kinds do not interchange") {
    CHECK_THROWS_WITH_AS(read_flow_archive(paths_path),
                         "read_flow_archive: bad magic, not an archive of this kind",
                         setup_error);
    CHECK_THROWS_WITH_AS(read_paths_archive(flow_path),
                         "read_paths_archive: bad magic, not an archive of this kind",
                         setup_error);
  }
  SUBCASE("unknown versions are refused") {
    std::string bytes = read_all(flow_path);
    bytes[4] = 2;
    std::ofstream(flow_path, std::ios::binary).write(bytes.data(), bytes.size());
    CHECK_THROWS_WITH_AS(read_flow_archive(flow_path),
                         "read_flow_archive: unsupported version 2", setup_error);
  }
  SUBCASE("a truncated body ends the read early") {
    const std::string bytes = read_all(flow_path);
    std::ofstream(flow_path, std::ios::binary).write(bytes.data(), bytes.size() - 9);
    CHECK_THROWS_WITH_AS(read_flow_archive(flow_path), "read_flow_archive: archive ended early",
                         setup_error);
  }
  SUBCASE("implausible dimensions are refused") {
    std::string bytes = read_all(flow_path);
    for (std::size_t i = 24; i < 32; ++i) bytes[i] = 0;
    std::ofstream(flow_path, std::ios::binary).write(bytes.data(), bytes.size());
    CHECK_THROWS_WITH_AS(read_flow_archive(flow_path),
                         "read_flow_archive: implausible archive dimensions", setup_error);
  }
  std::remove(flow_path.c_str());
  std::remove(paths_path.c_str());
}

TEST_CASE("config fingerprints match the reference fnv1a vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(fnv1a("[experiment]") != fnv1a("[experiment] "));
}
