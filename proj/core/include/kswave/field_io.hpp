#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kswave/field_ops.hpp"

namespace kswave {

/// Decoded snapshot file. `tag` is PERT, NP or NC; fields come in the order
/// (phi1, phi2, psi), (n, p1, p2) or (n, logc).
struct Snapshot {
  std::string tag;
  std::size_t nz = 0;
  std::size_t ny = 0;
  double t = 0.0;
  double L_z = 0.0;
  double lambda = 0.0;
  std::vector<Field> fields;

  StripGrid grid(Discretization disc = {}) const;
  PerturbState to_perturb(Discretization disc = {}) const;
  PrimitiveState to_primitive(Discretization disc = {}) const;
};

// Layout: 64-byte ASCII header "KSWAVE1 <tag> <nz> <ny> <t>" padded with
// spaces and terminated by '\n', then little-endian doubles L_z, lambda and
// every field in row-major (i * ny + j) order.
void write_snapshot(const std::filesystem::path& path, const PerturbState& s);
void write_snapshot(const std::filesystem::path& path, const PrimitiveState& s);
Snapshot read_snapshot(const std::filesystem::path& path);

/// CSV with columns z,y,<fields>; refuses grids above max_nodes.
void write_field_csv(const std::filesystem::path& path, const PerturbState& s, std::size_t max_nodes = 1 << 16);
void write_field_csv(const std::filesystem::path& path, const PrimitiveState& s, std::size_t max_nodes = 1 << 16);

}  // namespace kswave
