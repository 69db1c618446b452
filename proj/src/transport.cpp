#include "bht/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bht {

Matrix EigenDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

EigenDecomposition decompose_hermitian(const BasisPtr& basis, const Matrix& a) {
  const double scale = std::max(max_abs(a), std::numeric_limits<double>::min());
  require(hermiticity_error(a) <= 1e-10 * scale, "decompose_hermitian: input is not Hermitian");
  const Matrix symmetric = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) throw ConvergenceError("decompose_hermitian: eigensolver failed");
  return {basis, solver.eigenvalues(), solver.eigenvectors()};
}

EigenDecomposition decompose_hermitian(const ChainOperator& op) {
  require(op.hermitian(), "decompose_hermitian: operator '" + op.kind() + "' is not Hermitian");
  return decompose_hermitian(op.basis_ptr(), op.dense());
}

EigenDecomposition decompose_hermitian(const DensityMatrix& rho) {
  return decompose_hermitian(rho.basis_ptr(), rho.matrix());
}

double stationary_current(const DensityMatrix& deviation, const ChainOperator& current, double delta_gamma) {
  require_same_basis(deviation.basis(), current.basis(), "stationary_current");
  // tr(I R) = sum_ij I_ij R_ji, touching only the stored entries of I.
  const SparseMatrix& op = current.matrix();
  Complex trace = 0.0;
  for (Index r = 0; r < op.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(op, r); it; ++it) trace += it.value() * deviation.matrix()(it.col(), it.row());
  return delta_gamma * trace.real();
}

RealVector current_quantiles(const EigenDecomposition& deviation, const ChainOperator& current) {
  const Matrix applied = current.matrix() * deviation.eigenvectors;
  return (deviation.eigenvectors.conjugate().cwiseProduct(applied)).colwise().sum().real().transpose();
}

double spectral_current(const EigenDecomposition& deviation, const RealVector& quantiles, double delta_gamma) {
  return delta_gamma * deviation.eigenvalues.dot(quantiles);
}

double lambda_scale_linear_response(Index dimension, double hopping) {
  return static_cast<double>(dimension) * hopping * hopping / 4.0;
}

LambdaSigmaRelation lambda_sigma_relation(const EigenDecomposition& deviation, const EigenDecomposition& current,
                                          double hopping, double scale) {
  require(deviation.dimension() == current.dimension(), "lambda_sigma_relation: dimension mismatch");
  const Index n = deviation.dimension();
  LambdaSigmaRelation rel;
  rel.scale = scale > 0.0 ? scale : lambda_scale_linear_response(n, hopping);

  RealVector lambda = deviation.eigenvalues;
  RealVector sigma = current.eigenvalues;
  std::sort(lambda.begin(), lambda.end());
  std::sort(sigma.begin(), sigma.end());
  rel.scaled_lambda = rel.scale * lambda;
  rel.sigma = sigma;
  rel.max_deviation = max_abs(rel.scaled_lambda - sigma);

  const RealVector a = lambda.array() - lambda.mean();
  const RealVector b = sigma.array() - sigma.mean();
  const double denom = a.norm() * b.norm();
  rel.correlation = denom > 0.0 ? a.dot(b) / denom : 0.0;
  const double ss = sigma.squaredNorm();
  rel.fitted_ratio = ss > 0.0 ? lambda.dot(sigma) / ss * static_cast<double>(n) : 0.0;
  return rel;
}

double eigenbasis_overlap_mass(const EigenDecomposition& deviation, const EigenDecomposition& current,
                               double degeneracy_tolerance) {
  require(deviation.dimension() == current.dimension(), "eigenbasis_overlap_mass: dimension mismatch");
  const Index n = current.dimension();
  if (n == 0) return 0.0;
  const RealVector& sigma = current.eigenvalues;
  const double tol = degeneracy_tolerance * std::max(1.0, max_abs(sigma));
  double total = 0.0;
  Index start = 0;
  while (start < n) {
    Index end = start + 1;
    while (end < n && sigma[end] - sigma[end - 1] <= tol) ++end;
    const Index size = end - start;
    const Matrix projected =
        current.eigenvectors.middleCols(start, size).adjoint() * deviation.eigenvectors.middleCols(start, size);
    total += projected.squaredNorm();
    start = end;
  }
  return total / static_cast<double>(n);
}

double quantile_square_integral(const RealVector& sorted_spectrum) {
  const Index n = sorted_spectrum.size();
  require(n > 0, "quantile_square_integral: empty spectrum");
  double integral = 0.0;
  double x_prev = 0.0;
  double f_prev = sorted_spectrum[0] * sorted_spectrum[0];
  for (Index j = 0; j <= n; ++j) {
    const double x = j < n ? (static_cast<double>(j) + 0.5) / static_cast<double>(n) : 1.0;
    const double s = sorted_spectrum[std::min(j, n - 1)];
    const double f = s * s;
    integral += 0.5 * (x - x_prev) * (f + f_prev);
    x_prev = x;
    f_prev = f;
  }
  return integral;
}

double semi_analytic_prefactor(PrefactorConvention convention, const ModelParams& params) {
  switch (convention) {
    case PrefactorConvention::kLinearResponse:
      return 4.0 / (params.hopping * params.hopping);
    case PrefactorConvention::kParticleSquared:
      return 4.0 * params.hopping * params.particles * params.particles;
  }
  return 0.0;
}

namespace {

double sigma_square_integral(const EigenDecomposition& current) {
  RealVector sigma = current.eigenvalues;
  std::sort(sigma.begin(), sigma.end());
  return quantile_square_integral(sigma);
}

}  // namespace

double semi_analytic_current(const EigenDecomposition& current, const ModelParams& params,
                             PrefactorConvention convention) {
  require(params.interaction == 0.0, "semi_analytic_current: only defined for U = 0");
  return semi_analytic_prefactor(convention, params) * params.delta_gamma * sigma_square_integral(current);
}

double fitted_prefactor(double pipeline_current, const EigenDecomposition& current, const ModelParams& params) {
  const double denom = params.delta_gamma * sigma_square_integral(current);
  require(denom != 0.0, "fitted_prefactor: vanishing spectral integral or dGamma");
  return pipeline_current / denom;
}

RealVector hardcore_overlap(const EigenDecomposition& deviation) {
  const FockBasis& basis = *deviation.basis;
  const Index n = deviation.dimension();
  RealVector out = RealVector::Zero(n);
  for (Index i = 0; i < n; ++i)
    if (basis.is_hardcore(i)) out += deviation.eigenvectors.row(i).cwiseAbs2().transpose();
  return out;
}

RealVector fock_overlap(const EigenDecomposition& deviation, Index fock_index) {
  require(fock_index >= 0 && fock_index < deviation.dimension(), "fock_overlap: index out of range");
  return deviation.eigenvectors.row(fock_index).cwiseAbs2().transpose();
}

TransportReport make_transport_report(const ModelParams& params, const DensityMatrix& deviation,
                                      const ChainOperator& current_op, const EigenDecomposition& deviation_dec) {
  TransportReport report;
  report.params = params;
  report.dimension = deviation.dimension();
  report.current = stationary_current(deviation, current_op, params.delta_gamma);
  report.lambda = deviation_dec.eigenvalues;
  report.quantiles = current_quantiles(deviation_dec, current_op);
  report.spectral_current = spectral_current(deviation_dec, report.quantiles, params.delta_gamma);
  report.hardcore = hardcore_overlap(deviation_dec);
  return report;
}

}  // namespace bht
