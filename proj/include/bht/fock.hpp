#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bht/types.hpp"

namespace bht {

/// Default bound on the bytes needed by one dense complex N x N matrix.
inline constexpr std::size_t kDefaultMemoryCap = std::size_t{4} << 30;

/// Number of occupation vectors of `particles` bosons on `sites` sites,
/// binomial(particles + sites - 1, particles). Returns -1 on int64 overflow.
Index count_states(int sites, int particles);

/// Fixed-particle-number bosonic Fock basis.
///
/// States are ordered lexicographically decreasing in the occupation vector,
/// so the first state is (N, 0, ..., 0) and the last is (0, ..., 0, N).
/// Lookup uses combinatorial ranking and costs O(L).
class FockBasis {
 public:
  FockBasis(int sites, int particles, std::size_t memory_cap = kDefaultMemoryCap);

  int sites() const { return sites_; }
  int particles() const { return particles_; }
  Index dimension() const { return dimension_; }

  /// Occupations of state `i`, site 1 first.
  std::span<const int> state(Index i) const {
    return {occupations_.data() + i * sites_, static_cast<std::size_t>(sites_)};
  }
  int occupation(Index i, int site) const { return occupations_[i * sites_ + site - 1]; }

  /// Position of `occupations` in the basis; throws ValidationError when the
  /// vector has the wrong length, a negative entry, or the wrong total.
  Index index_of(std::span<const int> occupations) const;

  /// Index of the mirror image (site l -> L + 1 - l) of state `i`.
  Index reflected_index(Index i) const { return reflected_[i]; }

  bool is_hardcore(Index i) const;

  std::string label(Index i) const;

 private:
  Index rank(std::span<const int> occupations) const;

  int sites_;
  int particles_;
  Index dimension_;
  std::vector<int> occupations_;
  std::vector<Index> reflected_;
  // counts_[s][p] = count_states(s, p)
  std::vector<std::vector<Index>> counts_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr enumerate_basis(int sites, int particles, std::size_t memory_cap = kDefaultMemoryCap);

/// Sparse operator on a Fock basis. Immutable after construction.
class ChainOperator {
 public:
  ChainOperator(BasisPtr basis, SparseMatrix matrix, bool hermitian, std::string kind);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const SparseMatrix& matrix() const { return matrix_; }
  bool hermitian() const { return hermitian_; }
  const std::string& kind() const { return kind_; }
  Index dimension() const { return matrix_.rows(); }

  Matrix dense() const { return Matrix(matrix_); }
  ChainOperator adjoint() const;
  ChainOperator scaled(Complex factor) const;

 private:
  BasisPtr basis_;
  SparseMatrix matrix_;
  bool hermitian_;
  std::string kind_;
};

/// H = -(J/2) sum_{l<L} (a+_{l+1} a_l + h.c.) + (U/2) sum_l n_l (n_l - 1), open chain.
ChainOperator build_hamiltonian(const BasisPtr& basis, double hopping, double interaction);

/// Particle current from site l to l+1, summed over bonds:
/// I = (J/2i) sum_{l<L} (a+_l a_{l+1} - a+_{l+1} a_l).
/// With this orientation -i[H, I] = J^2 (n_L - n_1) / 2 at U = 0.
ChainOperator build_current(const BasisPtr& basis, double hopping);

/// Diagonal occupation operator of `site` (1-based).
ChainOperator build_number_operator(const BasisPtr& basis, int site);

/// V = a+_1 a_L: moves one particle from the last site to the first.
ChainOperator build_jump_operator(const BasisPtr& basis);

/// Text export: header `# L N kind`, then one `row col re im` line per stored entry.
void write_triplets(std::ostream& out, const ChainOperator& op);

/// Parses the triplet format back onto `basis`; the header must match it.
ChainOperator read_triplets(std::istream& in, const BasisPtr& basis);

}  // namespace bht
