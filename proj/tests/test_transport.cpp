#include "bht/steady_state.hpp"
#include "bht/transport.hpp"
#include "doctest.h"

using namespace bht;

namespace {

ModelParams model(int l, int n, double u = 0.0) {
  ModelParams p;
  p.sites = l;
  p.particles = n;
  p.interaction = u;
  return p;
}

/// Diagonal matrix with distinct entries: its eigenvectors are Fock states.
EigenDecomposition fock_eigenbasis(const BasisPtr& b) {
  Matrix d = Matrix::Zero(b->dimension(), b->dimension());
  for (Index i = 0; i < b->dimension(); ++i) d(i, i) = 0.1 * static_cast<double>(i) - 0.3;
  return decompose_hermitian(b, d);
}

}  // namespace

TEST_CASE("decomposition examples") {
  const auto b21 = enumerate_basis(2, 1);
  const EigenDecomposition c = decompose_hermitian(build_current(b21, 1.0));
  CHECK(c.eigenvalues(0) == doctest::Approx(-0.5));
  CHECK(c.eigenvalues(1) == doctest::Approx(0.5));

  const auto b = enumerate_basis(4, 2);
  const EigenDecomposition id = decompose_hermitian(b, Matrix::Identity(10, 10));
  CHECK(max_abs(Matrix(id.eigenvalues.cast<Complex>()) - Matrix::Ones(10, 1)) < 1e-14);

  CHECK_THROWS_AS(decompose_hermitian(build_jump_operator(b)), ValidationError);
  Matrix skew = Matrix::Zero(10, 10);
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(decompose_hermitian(b, skew), ValidationError);
}

TEST_CASE("decomposition invariants") {
  const auto b = enumerate_basis(6, 3);
  const DensityMatrix r = DensityMatrix::random_physical(b, 1);
  const EigenDecomposition d = decompose_hermitian(r);
  const Index n = d.dimension();
  CHECK(max_abs(d.eigenvectors.adjoint() * d.eigenvectors - Matrix::Identity(n, n)) < 1e-10);
  CHECK(max_abs(d.reconstruct() - r.matrix()) < 1e-12);
  for (Index k = 1; k < n; ++k) CHECK(d.eigenvalues(k) >= d.eigenvalues(k - 1));

  // The current spectrum comes in +-sigma pairs.
  const EigenDecomposition c = decompose_hermitian(build_current(b, 1.0));
  for (Index k = 0; k < n; ++k) CHECK(c.eigenvalues(k) == doctest::Approx(-c.eigenvalues(n - 1 - k)).epsilon(1e-10));
}

TEST_CASE("current of a vanishing deviation is zero") {
  const auto b = enumerate_basis(4, 2);
  CHECK(stationary_current(DensityMatrix::zero(b), build_current(b, 1.0), 0.004) == 0.0);
}

TEST_CASE("two-site current in closed form") {
  // Rt_ab = -iJ/(J^2 + 8G^2) gives I = dGamma J^2 / (J^2 + 8 G^2).
  const ModelParams p = model(2, 1);
  const auto b = enumerate_basis(2, 1);
  const DensityMatrix dev = solve_deviation_direct(p);
  const double expected = p.delta_gamma / (1.0 + 8.0 * p.gamma * p.gamma);
  CHECK(stationary_current(dev, build_current(b, 1.0), p.delta_gamma) == doctest::Approx(expected).epsilon(1e-10));
  // Semi-analytic form: sigma = +-1/2, so (4/J^2) dGamma / 4 = dGamma.
  const EigenDecomposition c = decompose_hermitian(build_current(b, 1.0));
  CHECK(semi_analytic_current(c, p) == doctest::Approx(p.delta_gamma));
}

TEST_CASE("trace and spectral forms of the current agree") {
  for (double u : {0.0, 1.0, 10.0}) {
    const ModelParams p = model(5, 3, u);
    const auto b = enumerate_basis(5, 3);
    const DensityMatrix dev = solve_deviation_direct(p);
    const ChainOperator current = build_current(b, 1.0);
    const EigenDecomposition d = decompose_hermitian(dev);
    const RealVector q = current_quantiles(d, current);
    const double trace_form = stationary_current(dev, current, p.delta_gamma);
    const double spectral_form = spectral_current(d, q, p.delta_gamma);
    const double scale = current.dense().norm() * dev.matrix().norm() * p.delta_gamma;
    CHECK(std::abs(trace_form - spectral_form) <= 1e-10 * scale);
    CHECK(std::abs(d.eigenvalues.sum()) < 1e-10);
    CHECK(std::abs(q.sum()) < 1e-9);
    CHECK(trace_form > 0.0);  // Gamma_1 > Gamma_2 drives particles from site 1 towards L
    const TransportReport report = make_transport_report(p, dev, current, d);
    CHECK(report.current == trace_form);
    CHECK(report.spectral_current == doctest::Approx(spectral_form));
    CHECK(report.lambda.size() == b->dimension());
  }
}

TEST_CASE("quantiles vanish on Fock eigenvectors") {
  const auto b = enumerate_basis(4, 3);
  const RealVector q = current_quantiles(fock_eigenbasis(b), build_current(b, 1.0));
  CHECK(q.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hard-core and Fock overlaps") {
  const auto b = enumerate_basis(6, 3);
  const EigenDecomposition d = fock_eigenbasis(b);
  const RealVector hc = hardcore_overlap(d);
  const std::vector<int> s111{1, 1, 1, 0, 0, 0}, s300{3, 0, 0, 0, 0, 0};
  CHECK(hc(b->index_of(s111)) == 1.0);
  CHECK(hc(b->index_of(s300)) == 0.0);
  const RealVector f = fock_overlap(d, b->index_of(s300));
  CHECK(f(b->index_of(s300)) == 1.0);
  CHECK(f.sum() == doctest::Approx(1.0));
}

TEST_CASE("quantile square integral") {
  CHECK(quantile_square_integral(RealVector::Constant(7, 0.3)) == doctest::Approx(0.09));
  RealVector s(4);
  s << -0.7, -0.2, 0.2, 0.7;
  const double full = quantile_square_integral(s);
  RealVector positive(2);
  positive << 0.2, 0.7;
  // Symmetric spectrum: the positive half carries half of the integral.
  CHECK(full == doctest::Approx(quantile_square_integral(positive)));
  CHECK(quantile_square_integral(RealVector(-s.reverse())) == doctest::Approx(full));
  const Index n = 4000;
  RealVector uniform(n);
  for (Index j = 0; j < n; ++j) uniform(j) = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
  CHECK(quantile_square_integral(uniform) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  CHECK_THROWS_AS(quantile_square_integral(RealVector()), ValidationError);
}

TEST_CASE("semi-analytic current and prefactors") {
  const ModelParams p = model(6, 3);
  const auto b = enumerate_basis(6, 3);
  const EigenDecomposition c = decompose_hermitian(build_current(b, 1.0));
  CHECK(semi_analytic_prefactor(PrefactorConvention::kLinearResponse, p) == 4.0);
  CHECK(semi_analytic_prefactor(PrefactorConvention::kParticleSquared, p) == 36.0);
  const double particle_squared = semi_analytic_current(c, p, PrefactorConvention::kParticleSquared);
  const double linear = semi_analytic_current(c, p);
  CHECK(particle_squared / linear == doctest::Approx(9.0));
  CHECK(fitted_prefactor(linear, c, p) == doctest::Approx(4.0));
  CHECK_THROWS_AS(semi_analytic_current(c, model(6, 3, 1.0)), ValidationError);

  const DensityMatrix dev = solve_deviation_direct(p);
  const double pipeline = stationary_current(dev, build_current(b, 1.0), p.delta_gamma);
  CHECK(std::abs(linear - pipeline) < 0.1 * pipeline);
}

TEST_CASE("lambda-sigma relation at U = 0") {
  const auto b = enumerate_basis(6, 3);
  const EigenDecomposition c = decompose_hermitian(build_current(b, 1.0));
  double previous = 1e9;
  for (double gamma : {0.04, 0.02, 0.01}) {
    ModelParams p = model(6, 3);
    p.gamma = gamma;
    p.delta_gamma = gamma / 10.0;
    const EigenDecomposition d = decompose_hermitian(solve_deviation_direct(p));
    const LambdaSigmaRelation rel = lambda_sigma_relation(d, c, 1.0);
    CHECK(rel.scale == doctest::Approx(56.0 / 4.0));
    CHECK(rel.correlation > 0.999);
    CHECK(rel.fitted_ratio == doctest::Approx(4.0).epsilon(0.05));
    CHECK(rel.max_deviation < 0.7 * previous);
    previous = rel.max_deviation;
    CHECK(eigenbasis_overlap_mass(d, c) > 0.9);
  }
}

TEST_CASE("interaction widens the deviation spectrum") {
  const auto b = enumerate_basis(6, 3);
  const EigenDecomposition c = decompose_hermitian(build_current(b, 1.0));
  const EigenDecomposition d = decompose_hermitian(solve_deviation_direct(model(6, 3, 1.0)));
  const LambdaSigmaRelation rel = lambda_sigma_relation(d, c, 1.0);
  const double lambda_range = rel.scaled_lambda.maxCoeff() - rel.scaled_lambda.minCoeff();
  const double sigma_range = rel.sigma.maxCoeff() - rel.sigma.minCoeff();
  CHECK(lambda_range > sigma_range);
}
