#pragma once

#include <cstdint>
#include <string>

#include "nmlab/grid.hpp"
#include "nmlab/particles.hpp"

namespace nmlab {

/// rows of "time,x,u" with full double precision, one row per output cell
void write_flow_csv(const MarginalFlow& flow, const std::string& path);

/// rows of "time,particle,x", one row per stored particle position
void write_paths_csv(const PathStore& paths, const std::string& path);

/// little-endian archive of a marginal flow (magic NMFA, version 1); the cell
/// values round-trip bit for bit
void write_flow_archive(const MarginalFlow& flow, const std::string& path);
MarginalFlow read_flow_archive(const std::string& path);

/// little-endian archive of stored particle rows (magic NMPA, version 1)
void write_paths_archive(const PathStore& paths, const std::string& path);
PathStore read_paths_archive(const std::string& path);

/// FNV-1a over the raw bytes, used to fingerprint configuration text
std::uint64_t fnv1a(const std::string& text);

}  // namespace nmlab
