#pragma once

#include <filesystem>
#include <iosfwd>

#include "bht/liouville.hpp"

namespace bht {

/// Binary density-matrix checkpoint.
///
/// Layout: one ASCII line `BHRHO v1 <L> <N> <hermitian 0|1>\n`, then N*N
/// (re, im) pairs of little-endian IEEE-754 doubles in row-major order.
struct Checkpoint {
  int sites = 0;
  int particles = 0;
  bool hermitian = false;
  Matrix data;
};

void write_checkpoint(std::ostream& out, const DensityMatrix& rho);
void write_checkpoint(const std::filesystem::path& path, const DensityMatrix& rho);

Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Reads a checkpoint and attaches it to `basis`, which must match its (L, N).
DensityMatrix load_density_matrix(const std::filesystem::path& path, const BasisPtr& basis);

}  // namespace bht
