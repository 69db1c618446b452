#pragma once

#include <utility>
#include <vector>

#include "bht/gmres.hpp"
#include "bht/liouville.hpp"

namespace bht {

struct PropagationOptions {
  /// Stop once |master_rhs(R)|_F < tol * |drive|_F, drive = 2 dGamma (n_L - n_1)/N.
  /// For dGamma = 0 the reference uses Gamma in place of dGamma.
  double tolerance = 1e-6;
  double t_max = 1e5;
  /// Cap on the absolute local-error tolerance, per unit of dimension. The
  /// stepper uses min(value * N, 5e-4 * threshold).
  double atol_per_dimension = 1e-10;
  double rtol = 0.0;
  /// Model time between convergence checks; 0 means 1/Gamma.
  double check_interval = 0.0;
  double hermiticity_tolerance = 1e-10;
};

struct PropagationReport {
  double elapsed_time = 0.0;
  long steps = 0;
  long rejected_steps = 0;
  double residual = 0.0;
  double threshold = 0.0;
  bool converged = false;
  double max_trace_drift = 0.0;
  double max_hermiticity_drift = 0.0;
  int resymmetrizations = 0;
};

/// Integrates the master equation from `initial` until the stationarity
/// residual drops below the threshold or t_max is reached. The state at the
/// stopping time is returned in both cases; the report says which.
std::pair<DensityMatrix, PropagationReport> propagate_to_steady_state(const DensityMatrix& initial,
                                                                      const ModelParams& params,
                                                                      const LindbladOperators& ops,
                                                                      const PropagationOptions& options = {});

std::pair<DensityMatrix, PropagationReport> propagate_to_steady_state(const DensityMatrix& initial,
                                                                      const ModelParams& params,
                                                                      double tolerance, double t_max);

struct DirectSolveOptions {
  Index max_dimension = 400;
  GmresOptions gmres{};
  /// Levels closer than this (in units of Gamma) are grouped by the
  /// preconditioner; see SecularPreconditioner.
  double cluster_width = 0.25;
  /// Largest number of unknowns in the exactly solved block.
  Index block_cap = 7000;
};

struct DirectSolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Approximate inverse of the linear-response superoperator, applied in the
/// eigenbasis of H. Levels are grouped into clusters of near-degenerate
/// energies (neighbours closer than `cluster_width`). The populations and the
/// coherences inside each cluster are coupled strongly by the dissipator and
/// are solved together exactly, with the trace as one of the equations. Every
/// other coherence is divided by its secular denominator
/// -i(E_a - E_b) - Gamma(A_aa + A_bb), A = V^dagger V + V V^dagger.
///
/// Without the clusters, tunnelling doublets at large U (splittings far below
/// Gamma) leave GMRES stagnating. If the block would exceed `block_cap`
/// unknowns the width is reduced, and as a last resort the largest clusters
/// are split into single levels.
class SecularPreconditioner {
 public:
  SecularPreconditioner(const LindbladOperators& ops, double gamma, double cluster_width = 0.25,
                        Index block_cap = 7000);
  void apply(const Matrix& residual, Matrix& out) const;

  Index block_size() const { return block_size_; }

 private:
  struct Cluster {
    Index start, size, offset;
  };
  RealMatrix eigenvectors_;
  Matrix inverse_denominator_;
  std::vector<Cluster> clusters_;
  Index block_size_ = 0;
  Eigen::PartialPivLU<Matrix> block_;
  mutable RealMatrix work_re_, work_im_, tmp_;
  mutable Vector block_rhs_;
};

/// Traceless solution of -i[H, Rt] - Gamma (L1 + L2)(Rt) = 2 (n_L - n_1)/N by
/// preconditioned restarted GMRES, matrix-free. Throws ValidationError above
/// the dimension cap and ConvergenceError if GMRES stalls.
std::pair<DensityMatrix, DirectSolveReport> solve_deviation_direct(const ModelParams& params,
                                                                   const LindbladOperators& ops,
                                                                   const DirectSolveOptions& options = {});

DensityMatrix solve_deviation_direct(const ModelParams& params);

/// (R - 1/N) / dGamma
DensityMatrix extract_deviation(const DensityMatrix& steady, double delta_gamma);

/// (R - P R P) / (2 dGamma), P the site reversal. Reversing the chain swaps
/// the two transfer directions, so this keeps only the odd orders in dGamma.
DensityMatrix extract_deviation_odd(const DensityMatrix& steady, double delta_gamma);

/// Combines odd-order extractions at dGamma and dGamma/2 to cancel the
/// dGamma^2 term: (4 half - full) / 3.
DensityMatrix richardson_deviation(const DensityMatrix& full_step, const DensityMatrix& half_step);

}  // namespace bht
