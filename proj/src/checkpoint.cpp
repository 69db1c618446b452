#include "bht/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace bht {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

void put_double(std::ostream& out, double value) {
  const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(value));
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.write(bytes, 8);
}

double get_double(const char* bytes) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, bytes, 8);
  return std::bit_cast<double>(to_little_endian(bits));
}

}  // namespace

void write_checkpoint(std::ostream& out, const DensityMatrix& rho) {
  const Matrix& m = rho.matrix();
  const bool hermitian = rho.hermiticity_error() == 0.0;
  out << "BHRHO v1 " << rho.basis().sites() << ' ' << rho.basis().particles() << ' ' << (hermitian ? 1 : 0) << '\n';
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      put_double(out, m(r, c).real());
      put_double(out, m(r, c).imag());
    }
  if (!out) throw std::runtime_error("write_checkpoint: write failed");
}

void write_checkpoint(const std::filesystem::path& path, const DensityMatrix& rho) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_checkpoint: cannot open " + path.string());
  write_checkpoint(out, rho);
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "read_checkpoint: missing header");
  std::istringstream header(line);
  std::string magic, version;
  Checkpoint cp;
  int hermitian = -1;
  header >> magic >> version >> cp.sites >> cp.particles >> hermitian;
  require(!header.fail() && magic == "BHRHO" && version == "v1" && (hermitian == 0 || hermitian == 1),
          "read_checkpoint: malformed header '" + line + "'");
  cp.hermitian = hermitian == 1;
  const Index n = count_states(cp.sites, cp.particles);
  require(n > 0, "read_checkpoint: invalid (L, N) in header");

  const std::size_t bytes = static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * 16;
  std::string payload(bytes, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(bytes));
  require(static_cast<std::size_t>(in.gcount()) == bytes, "read_checkpoint: truncated payload");

  cp.data.resize(n, n);
  const char* p = payload.data();
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c, p += 16) cp.data(r, c) = Complex(get_double(p), get_double(p + 8));
  return cp;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("read_checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

DensityMatrix load_density_matrix(const std::filesystem::path& path, const BasisPtr& basis) {
  Checkpoint cp = read_checkpoint(path);
  require(cp.sites == basis->sites() && cp.particles == basis->particles(),
          "load_density_matrix: checkpoint (L, N) does not match basis");
  return {basis, std::move(cp.data)};
}

}  // namespace bht
