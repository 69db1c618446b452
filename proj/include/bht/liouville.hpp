#pragma once

#include <cstdint>
#include <vector>

#include "bht/fock.hpp"
#include "bht/model.hpp"

namespace bht {

/// Dense N x N complex matrix on a Fock basis. Houses physical density
/// matrices (trace 1) and traceless deviation matrices alike.
class DensityMatrix {
 public:
  DensityMatrix(BasisPtr basis, Matrix data);

  static DensityMatrix maximally_mixed(const BasisPtr& basis);
  static DensityMatrix zero(const BasisPtr& basis);
  /// Random full-rank physical state, reproducible from `seed`.
  static DensityMatrix random_physical(const BasisPtr& basis, std::uint64_t seed);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const Matrix& matrix() const { return data_; }
  Matrix& matrix() { return data_; }
  Index dimension() const { return data_.rows(); }

  Complex trace() const { return data_.trace(); }
  double hermiticity_error() const { return bht::hermiticity_error(data_); }
  /// Replaces the matrix by (R + R^dagger)/2 when the drift exceeds
  /// `tolerance`; returns whether it did.
  bool hermitize(double tolerance = 1e-10);
  double min_eigenvalue() const;

 private:
  BasisPtr basis_;
  Matrix data_;
};

void require_same_basis(const FockBasis& a, const FockBasis& b, const char* where);

/// Operators entering the master equation, built once per (L, N, J, U).
///
/// The jump operator V = a+_1 a_L is injective on its support, so it is kept
/// as a partial map state -> (target, weight) next to its sparse form;
/// V^dagger V and V V^dagger are diagonal.
struct LindbladOperators {
  ChainOperator hamiltonian;
  ChainOperator jump;
  std::vector<Index> jump_target;  // -1 where V annihilates the state
  RealVector jump_weight;
  RealVector vdv;                  // diag(V^dagger V) = n_L (n_1 + 1)
  RealVector vvd;                  // diag(V V^dagger) = n_1 (n_L + 1)
  RealVector imbalance;            // diag(n_L - n_1)

  static LindbladOperators build(const BasisPtr& basis, const ModelParams& params);
  const BasisPtr& basis_ptr() const { return hamiltonian.basis_ptr(); }
  Index dimension() const { return hamiltonian.dimension(); }
};

/// out = -i[H, R] - g1 L1(R) - g2 L2(R), with L1/L2 the incoherent
/// last-to-first and first-to-last transfer terms. Matrix-free: cost O(N^2 L).
class Liouvillian {
 public:
  Liouvillian(const LindbladOperators& ops, double gamma1, double gamma2);

  void apply(const Matrix& rho, Matrix& out) const;
  Matrix operator()(const Matrix& rho) const {
    Matrix out;
    apply(rho, out);
    return out;
  }

  const LindbladOperators& operators() const { return *ops_; }

 private:
  const LindbladOperators* ops_;
  double gamma1_;
  double gamma2_;
  RealVector decay_;  // g1 diag(V^dagger V) + g2 diag(V V^dagger)
};

/// V^dagger V R + R V^dagger V - 2 V R V^dagger
DensityMatrix dissipator_L1(const DensityMatrix& rho, const ChainOperator& jump);
/// V V^dagger R + R V V^dagger - 2 V^dagger R V
DensityMatrix dissipator_L2(const DensityMatrix& rho, const ChainOperator& jump);

/// -i[H, R] - Gamma1 L1(R) - Gamma2 L2(R)
DensityMatrix master_rhs(const DensityMatrix& rho, const ModelParams& params, const LindbladOperators& ops);

/// The linear-response source 2 (n_L - n_1) / N.
Matrix linear_response_source(const LindbladOperators& ops);

/// Frobenius norm of -i[H, Rt] - Gamma (L1 + L2)(Rt) - 2 (n_L - n_1)/N.
double steady_state_residual(const DensityMatrix& deviation, const ModelParams& params,
                             const LindbladOperators& ops);

/// P R P with P the site-reversal permutation l -> L + 1 - l.
DensityMatrix reflect(const DensityMatrix& rho);

}  // namespace bht
