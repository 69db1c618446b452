#include "bht/fock.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace bht {

namespace {

using Triplet = Eigen::Triplet<Complex>;

// Site indices below are 0-based.
void enumerate(int sites, int remaining, int site, std::vector<int>& current, std::vector<int>& out) {
  if (site == sites - 1) {
    current[site] = remaining;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int n = remaining; n >= 0; --n) {
    current[site] = n;
    enumerate(sites, remaining - n, site + 1, current, out);
  }
}

SparseMatrix from_triplets(Index dim, const std::vector<Triplet>& entries) {
  SparseMatrix m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

}  // namespace

Index count_states(int sites, int particles) {
  if (sites <= 0 || particles < 0) return sites == 0 && particles == 0 ? 1 : 0;
  // binomial(particles + sites - 1, sites - 1), built incrementally so each
  // intermediate value is itself a binomial coefficient.
  const int k = std::min(particles, sites - 1);
  const int n = particles + sites - 1;
  Index result = 1;
  for (int i = 1; i <= k; ++i) {
    const Index factor = n - k + i;
    if (result > std::numeric_limits<Index>::max() / factor) return -1;
    result = result * factor / i;
  }
  return result;
}

FockBasis::FockBasis(int sites, int particles, std::size_t memory_cap)
    : sites_(sites), particles_(particles) {
  require(sites >= 1, "enumerate_basis: L must be >= 1 (got " + std::to_string(sites) + ")");
  require(particles >= 0, "enumerate_basis: N must be >= 0 (got " + std::to_string(particles) + ")");
  dimension_ = count_states(sites, particles);
  const double dense_bytes = static_cast<double>(dimension_) * static_cast<double>(dimension_) *
                             static_cast<double>(sizeof(Complex));
  if (dimension_ < 0 || dense_bytes > static_cast<double>(memory_cap)) {
    std::ostringstream msg;
    msg << "enumerate_basis: (L=" << sites << ", N=" << particles
        << ") needs dense matrices larger than the memory cap of " << memory_cap << " bytes";
    throw ValidationError(msg.str());
  }

  counts_.assign(sites + 1, std::vector<Index>(particles + 1, 0));
  for (int s = 0; s <= sites; ++s)
    for (int p = 0; p <= particles; ++p) counts_[s][p] = count_states(s, p);

  occupations_.reserve(static_cast<std::size_t>(dimension_) * sites);
  std::vector<int> current(sites, 0);
  enumerate(sites, particles, 0, current, occupations_);

  reflected_.resize(dimension_);
  std::vector<int> mirror(sites);
  for (Index i = 0; i < dimension_; ++i) {
    const auto s = state(i);
    std::copy(s.rbegin(), s.rend(), mirror.begin());
    reflected_[i] = rank(mirror);
  }
}

Index FockBasis::rank(std::span<const int> occ) const {
  // States preceding `occ` in decreasing-lex order: at each site k, every
  // completion with a larger occupation there. Summing over those larger
  // values collapses (hockey stick) into one count with an extra site.
  Index r = 0;
  int remaining = particles_;
  for (int k = 0; k + 1 < sites_; ++k) {
    const int larger = remaining - occ[k] - 1;
    if (larger >= 0) r += counts_[sites_ - k][larger];
    remaining -= occ[k];
  }
  return r;
}

Index FockBasis::index_of(std::span<const int> occ) const {
  require(static_cast<int>(occ.size()) == sites_, "index_of: occupation vector has wrong length");
  int total = 0;
  for (int n : occ) {
    require(n >= 0, "index_of: negative occupation");
    total += n;
  }
  require(total == particles_, "index_of: occupations do not sum to N");
  return rank(occ);
}

bool FockBasis::is_hardcore(Index i) const {
  for (int n : state(i))
    if (n > 1) return false;
  return true;
}

std::string FockBasis::label(Index i) const {
  std::string out = "|";
  const auto s = state(i);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(s[k]);
  }
  return out + ">";
}

BasisPtr enumerate_basis(int sites, int particles, std::size_t memory_cap) {
  return std::make_shared<const FockBasis>(sites, particles, memory_cap);
}

ChainOperator::ChainOperator(BasisPtr basis, SparseMatrix matrix, bool hermitian, std::string kind)
    : basis_(std::move(basis)), matrix_(std::move(matrix)), hermitian_(hermitian), kind_(std::move(kind)) {
  require(basis_ != nullptr, "ChainOperator: null basis");
  require(matrix_.rows() == basis_->dimension() && matrix_.cols() == basis_->dimension(),
          "ChainOperator: matrix shape does not match basis dimension");
}

ChainOperator ChainOperator::adjoint() const {
  return {basis_, SparseMatrix(matrix_.adjoint()), hermitian_, kind_ + "^dagger"};
}

ChainOperator ChainOperator::scaled(Complex factor) const {
  const bool stays_hermitian = hermitian_ && factor.imag() == 0.0;
  return {basis_, SparseMatrix(matrix_ * factor), stays_hermitian, kind_};
}

namespace {

// Visits every allowed hop of one particle from site `from` to site `to`
// (0-based) with its ladder amplitude sqrt(n_from (n_to + 1)).
template <typename F>
void for_each_hop(const FockBasis& basis, int from, int to, F&& visit) {
  std::vector<int> target(basis.sites());
  for (Index i = 0; i < basis.dimension(); ++i) {
    const auto s = basis.state(i);
    if (s[from] == 0) continue;
    std::copy(s.begin(), s.end(), target.begin());
    const double amplitude = std::sqrt(static_cast<double>(s[from]) * (s[to] + 1));
    --target[from];
    ++target[to];
    visit(i, basis.index_of(target), amplitude);
  }
}

}  // namespace

ChainOperator build_hamiltonian(const BasisPtr& basis, double hopping, double interaction) {
  const FockBasis& b = *basis;
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(b.dimension()) * (2 * b.sites() - 1));
  for (Index i = 0; i < b.dimension(); ++i) {
    double onsite = 0.0;
    for (int n : b.state(i)) onsite += 0.5 * interaction * n * (n - 1);
    if (onsite != 0.0) entries.emplace_back(i, i, onsite);
  }
  for (int l = 0; l + 1 < b.sites(); ++l) {
    for_each_hop(b, l, l + 1, [&](Index from, Index to, double amplitude) {
      const Complex element = -0.5 * hopping * amplitude;
      entries.emplace_back(to, from, element);
      entries.emplace_back(from, to, element);
    });
  }
  return {basis, from_triplets(b.dimension(), entries), true, "hamiltonian"};
}

ChainOperator build_current(const BasisPtr& basis, double hopping) {
  const FockBasis& b = *basis;
  std::vector<Triplet> entries;
  // (J/2i) (a+_l a_{l+1} - a+_{l+1} a_l): the a+_{l+1} a_l part enters with
  // -(J/2i) = iJ/2, its conjugate with -iJ/2.
  for (int l = 0; l + 1 < b.sites(); ++l) {
    for_each_hop(b, l, l + 1, [&](Index from, Index to, double amplitude) {
      const Complex element(0.0, 0.5 * hopping * amplitude);
      entries.emplace_back(to, from, element);
      entries.emplace_back(from, to, std::conj(element));
    });
  }
  return {basis, from_triplets(b.dimension(), entries), true, "current"};
}

ChainOperator build_number_operator(const BasisPtr& basis, int site) {
  const FockBasis& b = *basis;
  require(site >= 1 && site <= b.sites(),
          "build_number_operator: site " + std::to_string(site) + " outside 1.." + std::to_string(b.sites()));
  std::vector<Triplet> entries;
  for (Index i = 0; i < b.dimension(); ++i) {
    const int n = b.occupation(i, site);
    if (n != 0) entries.emplace_back(i, i, static_cast<double>(n));
  }
  return {basis, from_triplets(b.dimension(), entries), true, "number_" + std::to_string(site)};
}

ChainOperator build_jump_operator(const BasisPtr& basis) {
  const FockBasis& b = *basis;
  require(b.sites() >= 2, "build_jump_operator: requires L >= 2");
  std::vector<Triplet> entries;
  for_each_hop(b, b.sites() - 1, 0, [&](Index from, Index to, double amplitude) {
    entries.emplace_back(to, from, amplitude);
  });
  return {basis, from_triplets(b.dimension(), entries), false, "jump"};
}

void write_triplets(std::ostream& out, const ChainOperator& op) {
  const auto old_precision = out.precision(17);
  out << "# " << op.basis().sites() << ' ' << op.basis().particles() << ' ' << op.kind() << '\n';
  const SparseMatrix& m = op.matrix();
  for (Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
  out.precision(old_precision);
}

ChainOperator read_triplets(std::istream& in, const BasisPtr& basis) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "read_triplets: missing header");
  std::istringstream header(line);
  std::string hash, kind;
  int sites = 0, particles = 0;
  header >> hash >> sites >> particles >> kind;
  require(hash == "#" && !header.fail(), "read_triplets: malformed header '" + line + "'");
  require(sites == basis->sites() && particles == basis->particles(),
          "read_triplets: header does not match basis");
  std::vector<Triplet> entries;
  Index row = 0, col = 0;
  double re = 0.0, im = 0.0;
  const Index dim = basis->dimension();
  while (in >> row >> col >> re >> im) {
    require(row >= 0 && row < dim && col >= 0 && col < dim, "read_triplets: index out of range");
    entries.emplace_back(row, col, Complex(re, im));
  }
  SparseMatrix m = from_triplets(dim, entries);
  const bool hermitian = (SparseMatrix(m.adjoint()) - m).norm() == 0.0;
  return {basis, std::move(m), hermitian, kind};
}

}  // namespace bht
