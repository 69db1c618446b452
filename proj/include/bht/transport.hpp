#pragma once

#include <string>
#include <vector>

#include "bht/liouville.hpp"

namespace bht {

/// Full spectrum of a Hermitian matrix, eigenvalues ascending.
struct EigenDecomposition {
  BasisPtr basis;
  RealVector eigenvalues;
  Matrix eigenvectors;  // orthonormal columns

  Index dimension() const { return eigenvalues.size(); }
  Matrix reconstruct() const;
};

/// Rejects input whose Hermiticity error exceeds 1e-10 * max|A|.
EigenDecomposition decompose_hermitian(const ChainOperator& op);
EigenDecomposition decompose_hermitian(const DensityMatrix& rho);
EigenDecomposition decompose_hermitian(const BasisPtr& basis, const Matrix& a);

/// dGamma * Re tr(I Rt)
double stationary_current(const DensityMatrix& deviation, const ChainOperator& current, double delta_gamma);

/// <Psi_j| I |Psi_j> for every eigenvector, in eigenvalue order.
RealVector current_quantiles(const EigenDecomposition& deviation, const ChainOperator& current);

/// dGamma * sum_j lambda_j I_j
double spectral_current(const EigenDecomposition& deviation, const RealVector& quantiles, double delta_gamma);

/// Linear response at U = 0 and small Gamma gives Rt ~ 4 I / (N J^2), so
/// lambda_j ~ 4 sigma_j / (N J^2).
double lambda_scale_linear_response(Index dimension, double hopping);

struct LambdaSigmaRelation {
  double scale = 0.0;         // factor applied to the sorted lambda_j
  RealVector scaled_lambda;   // scale * lambda_j, ascending
  RealVector sigma;           // ascending
  double max_deviation = 0.0;
  double correlation = 0.0;   // Pearson
  double fitted_ratio = 0.0;  // least-squares k in lambda_j ~ k sigma_j / N
};

/// Pairs sorted spectra of Rt and I. `scale <= 0` selects lambda_scale_linear_response.
LambdaSigmaRelation lambda_sigma_relation(const EigenDecomposition& deviation, const EigenDecomposition& current,
                                          double hopping, double scale = 0.0);

/// Mean block projection mass: for every cluster of (nearly) degenerate
/// current eigenvalues, the weight that the Rt eigenvectors of the same
/// ranks carry inside that cluster's eigenspace, averaged over all ranks.
double eigenbasis_overlap_mass(const EigenDecomposition& deviation, const EigenDecomposition& current,
                               double degeneracy_tolerance = 1e-8);

/// sigma(x) quantile function: linear interpolation of the sorted spectrum at
/// x_j = (j - 1/2)/N, held flat to x = 0 and x = 1; trapezoid rule.
double quantile_square_integral(const RealVector& sorted_spectrum);

enum class PrefactorConvention {
  kLinearResponse,  // 4 / J^2, from Rt ~ 4 I / (N J^2)
  kParticleSquared,  // 4 J N^2 with N the particle number
};

double semi_analytic_prefactor(PrefactorConvention convention, const ModelParams& params);

/// prefactor * dGamma * integral of sigma(x)^2. Refuses U != 0.
double semi_analytic_current(const EigenDecomposition& current, const ModelParams& params,
                             PrefactorConvention convention = PrefactorConvention::kLinearResponse);

/// Prefactor that makes the semi-analytic form reproduce `pipeline_current`.
double fitted_prefactor(double pipeline_current, const EigenDecomposition& current, const ModelParams& params);

/// Weight of each eigenvector on Fock states with every occupation <= 1.
RealVector hardcore_overlap(const EigenDecomposition& deviation);

/// |<Fock state| Psi_j>|^2 for one Fock state and every eigenvector.
RealVector fock_overlap(const EigenDecomposition& deviation, Index fock_index);

struct TransportReport {
  ModelParams params;
  Index dimension = 0;
  double current = 0.0;
  double spectral_current = 0.0;
  RealVector lambda;
  RealVector quantiles;
  RealVector hardcore;
};

TransportReport make_transport_report(const ModelParams& params, const DensityMatrix& deviation,
                                      const ChainOperator& current_op, const EigenDecomposition& deviation_dec);

}  // namespace bht
