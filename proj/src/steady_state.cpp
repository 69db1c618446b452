#include "bht/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bht/integrator.hpp"

namespace bht {

namespace {

void require_physical(const DensityMatrix& rho) {
  require(rho.hermiticity_error() <= 1e-8, "propagate_to_steady_state: initial state is not Hermitian");
  require(std::abs(rho.trace() - 1.0) <= 1e-9, "propagate_to_steady_state: initial state must have trace 1");
}

}  // namespace

std::pair<DensityMatrix, PropagationReport> propagate_to_steady_state(const DensityMatrix& initial,
                                                                      const ModelParams& params,
                                                                      const LindbladOperators& ops,
                                                                      const PropagationOptions& options) {
  params.validate();
  require_same_basis(initial.basis(), ops.hamiltonian.basis(), "propagate_to_steady_state");
  require_physical(initial);

  const Index n = initial.dimension();
  const Liouvillian liouvillian(ops, params.gamma1(), params.gamma2());
  const double drive_rate = params.delta_gamma != 0.0 ? std::abs(params.delta_gamma) : params.gamma;
  const double drive_norm = 2.0 * drive_rate * ops.imbalance.norm() / static_cast<double>(n);

  PropagationReport report;
  report.threshold = options.tolerance * drive_norm;

  StepControl control;
  // At stationarity an explicit stepper rides its stability limit and leaves
  // a residual of a few hundred times atol, so atol has to sit well below the
  // stopping threshold or the run can never converge.
  control.atol = std::min(options.atol_per_dimension * static_cast<double>(n), 5e-4 * report.threshold);
  control.rtol = options.rtol;
  auto rhs = [&liouvillian](const Matrix& y, Matrix& dydt) { liouvillian.apply(y, dydt); };
  DormandPrince45<Matrix, decltype(rhs)> stepper(rhs, control);

  Matrix rho = initial.matrix();
  Matrix derivative;
  double t = 0.0;
  const double interval = options.check_interval > 0.0 ? options.check_interval : 1.0 / params.gamma;

  auto check = [&]() {
    report.max_trace_drift = std::max(report.max_trace_drift, std::abs(rho.trace() - 1.0));
    const double drift = hermiticity_error(rho);
    report.max_hermiticity_drift = std::max(report.max_hermiticity_drift, drift);
    if (drift > options.hermiticity_tolerance) {
      rho = 0.5 * (rho + rho.adjoint()).eval();
      ++report.resymmetrizations;
      stepper.invalidate();
    }
    liouvillian.apply(rho, derivative);
    report.residual = derivative.norm();
    return report.residual < report.threshold;
  };

  report.converged = check();
  while (!report.converged && t < options.t_max) {
    const bool ok = stepper.advance(rho, t, std::min(t + interval, options.t_max));
    report.converged = check();
    if (!ok) break;
  }
  report.elapsed_time = t;
  report.steps = stepper.accepted_steps();
  report.rejected_steps = stepper.rejected_steps();
  return {DensityMatrix(initial.basis_ptr(), std::move(rho)), report};
}

std::pair<DensityMatrix, PropagationReport> propagate_to_steady_state(const DensityMatrix& initial,
                                                                      const ModelParams& params,
                                                                      double tolerance, double t_max) {
  const LindbladOperators ops = LindbladOperators::build(initial.basis_ptr(), params);
  PropagationOptions options;
  options.tolerance = tolerance;
  options.t_max = t_max;
  return propagate_to_steady_state(initial, params, ops, options);
}

SecularPreconditioner::SecularPreconditioner(const LindbladOperators& ops, double gamma, double cluster_width,
                                             Index block_cap) {
  const Index n = ops.dimension();
  require(block_cap >= n, "SecularPreconditioner: block_cap must be at least the dimension");
  const RealMatrix h = Matrix(ops.hamiltonian.matrix()).real();
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
  eigenvectors_ = solver.eigenvectors();
  const RealVector& energy = solver.eigenvalues();
  const RealMatrix& q = eigenvectors_;

  // V and A = V^T V + V V^T in the energy basis. A is diagonal in Fock space.
  RealMatrix scratch = RealMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    if (ops.jump_target[i] >= 0) scratch.row(ops.jump_target[i]) += ops.jump_weight[i] * q.row(i);
  const RealMatrix v = q.transpose() * scratch;
  scratch = (ops.vdv + ops.vvd).asDiagonal() * q;
  const RealMatrix a = q.transpose() * scratch;
  scratch.resize(0, 0);

  // Chain neighbouring levels into clusters, narrowing the width until the
  // block fits.
  std::vector<Index> sizes;
  double width = cluster_width * gamma;
  auto block_unknowns = [&] {
    Index k = 0;
    for (Index s : sizes) k += s * s;
    return k;
  };
  for (;;) {
    sizes.clear();
    Index first = 0;
    for (Index i = 1; i <= n; ++i) {
      if (i < n && energy[i] - energy[i - 1] < width) continue;
      sizes.push_back(i - first);
      first = i;
    }
    if (block_unknowns() <= block_cap || width < 1e-12 * gamma) break;
    width *= 0.8;
  }
  // Exact degeneracies can still be too many: split the largest clusters.
  while (block_unknowns() > block_cap) {
    auto largest = std::max_element(sizes.begin(), sizes.end());
    const Index s = *largest;
    *largest = 1;
    sizes.insert(largest + 1, static_cast<std::size_t>(s - 1), Index{1});
  }

  std::vector<Index> cluster_of(static_cast<std::size_t>(n));
  Index start = 0, offset = 0;
  for (Index s : sizes) {
    for (Index i = start; i < start + s; ++i) cluster_of[static_cast<std::size_t>(i)] = static_cast<Index>(clusters_.size());
    clusters_.push_back({start, s, offset});
    start += s;
    offset += s * s;
  }
  block_size_ = offset;

  // Block equations: for (i,j) and (k,l) each inside a cluster,
  //   -i(E_i - E_j) X_ij + 2 Gamma sum_kl (V_ik V_jl + V_ki V_lj) X_kl
  //   - Gamma sum_k (A_ik X_kj + X_ik A_kj).
  // The (0,0) equation is replaced by the trace.
  Matrix block = Matrix::Zero(block_size_, block_size_);
  for (const Cluster& cd : clusters_)
    for (Index k = cd.start; k < cd.start + cd.size; ++k)
      for (Index l = cd.start; l < cd.start + cd.size; ++l) {
        const Index col = cd.offset + (k - cd.start) * cd.size + (l - cd.start);
        for (const Cluster& ci : clusters_)
          for (Index i = ci.start; i < ci.start + ci.size; ++i)
            for (Index j = ci.start; j < ci.start + ci.size; ++j)
              block(ci.offset + (i - ci.start) * ci.size + (j - ci.start), col) =
                  2.0 * gamma * (v(i, k) * v(j, l) + v(k, i) * v(l, j));
      }
  for (const Cluster& c : clusters_)
    for (Index i = c.start; i < c.start + c.size; ++i)
      for (Index j = c.start; j < c.start + c.size; ++j) {
        const Index row = c.offset + (i - c.start) * c.size + (j - c.start);
        block(row, row) += Complex(0.0, -(energy[i] - energy[j]));
        for (Index k = c.start; k < c.start + c.size; ++k) {
          block(row, c.offset + (k - c.start) * c.size + (j - c.start)) -= gamma * a(i, k);
          block(row, c.offset + (i - c.start) * c.size + (k - c.start)) -= gamma * a(k, j);
        }
      }
  block.row(0).setZero();
  for (const Cluster& c : clusters_)
    for (Index i = 0; i < c.size; ++i) block(0, c.offset + i * c.size + i) = 1.0;
  block_.compute(block);

  // Floor keeps exact degeneracies split off a cluster invertible.
  const double floor = 1e-6 * gamma;
  inverse_denominator_.resize(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      Complex d(-gamma * (a(i, i) + a(j, j)), -(energy[i] - energy[j]));
      if (std::abs(d) < floor) d = -floor;
      const bool in_block = cluster_of[static_cast<std::size_t>(i)] == cluster_of[static_cast<std::size_t>(j)];
      inverse_denominator_(i, j) = in_block ? Complex(0.0) : 1.0 / d;
    }
}

void SecularPreconditioner::apply(const Matrix& residual, Matrix& out) const {
  const RealMatrix& q = eigenvectors_;
  const Index n = q.rows();
  // Q is real: transform real and imaginary parts separately.
  tmp_.noalias() = residual.real() * q;
  work_re_.noalias() = q.transpose() * tmp_;
  tmp_.noalias() = residual.imag() * q;
  work_im_.noalias() = q.transpose() * tmp_;

  block_rhs_.resize(block_size_);
  for (const Cluster& c : clusters_)
    for (Index i = 0; i < c.size; ++i)
      for (Index j = 0; j < c.size; ++j)
        block_rhs_[c.offset + i * c.size + j] = Complex(work_re_(c.start + i, c.start + j), work_im_(c.start + i, c.start + j));
  block_rhs_[0] = Complex(work_re_.trace(), work_im_.trace());
  block_rhs_ = block_.solve(block_rhs_).eval();

  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Complex x = Complex(work_re_(i, j), work_im_(i, j)) * inverse_denominator_(i, j);
      work_re_(i, j) = x.real();
      work_im_(i, j) = x.imag();
    }
  for (const Cluster& c : clusters_)
    for (Index i = 0; i < c.size; ++i)
      for (Index j = 0; j < c.size; ++j) {
        const Complex x = block_rhs_[c.offset + i * c.size + j];
        work_re_(c.start + i, c.start + j) = x.real();
        work_im_(c.start + i, c.start + j) = x.imag();
      }

  out.resize(n, n);
  tmp_.noalias() = q * work_re_;
  out.real().noalias() = tmp_ * q.transpose();
  tmp_.noalias() = q * work_im_;
  out.imag().noalias() = tmp_ * q.transpose();
}

std::pair<DensityMatrix, DirectSolveReport> solve_deviation_direct(const ModelParams& params,
                                                                   const LindbladOperators& ops,
                                                                   const DirectSolveOptions& options) {
  params.validate();
  const Index n = ops.dimension();
  if (n > options.max_dimension) {
    std::ostringstream msg;
    msg << "solve_deviation_direct: dimension " << n << " exceeds the direct-solve cap " << options.max_dimension;
    throw ValidationError(msg.str());
  }
  const Liouvillian liouvillian(ops, params.gamma, params.gamma);
  const SecularPreconditioner preconditioner(ops, params.gamma, options.cluster_width, std::max(options.block_cap, n));
  const double inv_n = 1.0 / static_cast<double>(n);

  // The identity spans the kernel; adding tr(X)/N * 1 makes the operator
  // regular while leaving traceless solutions untouched.
  auto apply = [&](const Matrix& x, Matrix& out) {
    liouvillian.apply(x, out);
    out.diagonal().array() += x.trace() * inv_n;
  };
  auto precondition = [&](const Matrix& x, Matrix& out) { preconditioner.apply(x, out); };

  const Matrix source = linear_response_source(ops);
  Matrix x = Matrix::Zero(n, n);
  const GmresResult result = gmres(apply, precondition, source, x, options.gmres);

  DirectSolveReport report{result.iterations, result.relative_residual, result.converged};
  if (!result.converged) {
    std::ostringstream msg;
    msg << "solve_deviation_direct: GMRES stopped at relative residual " << result.relative_residual
        << " after " << result.iterations << " iterations (singular or ill-conditioned system)";
    throw ConvergenceError(msg.str());
  }
  x = 0.5 * (x + x.adjoint()).eval();
  x.diagonal().array() -= x.trace() * inv_n;
  return {DensityMatrix(ops.basis_ptr(), std::move(x)), report};
}

DensityMatrix solve_deviation_direct(const ModelParams& params) {
  const BasisPtr basis = enumerate_basis(params.sites, params.particles);
  const LindbladOperators ops = LindbladOperators::build(basis, params);
  return solve_deviation_direct(params, ops).first;
}

DensityMatrix extract_deviation(const DensityMatrix& steady, double delta_gamma) {
  require(delta_gamma != 0.0, "extract_deviation: dGamma must be nonzero");
  const Index n = steady.dimension();
  Matrix dev = steady.matrix();
  dev.diagonal().array() -= 1.0 / static_cast<double>(n);
  return {steady.basis_ptr(), dev / delta_gamma};
}

DensityMatrix extract_deviation_odd(const DensityMatrix& steady, double delta_gamma) {
  require(delta_gamma != 0.0, "extract_deviation_odd: dGamma must be nonzero");
  const DensityMatrix mirrored = reflect(steady);
  return {steady.basis_ptr(), (steady.matrix() - mirrored.matrix()) / (2.0 * delta_gamma)};
}

DensityMatrix richardson_deviation(const DensityMatrix& full_step, const DensityMatrix& half_step) {
  require_same_basis(full_step.basis(), half_step.basis(), "richardson_deviation");
  return {full_step.basis_ptr(), (4.0 * half_step.matrix() - full_step.matrix()) / 3.0};
}

}  // namespace bht
