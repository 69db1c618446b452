#include <random>

#include "bht/gmres.hpp"
#include "bht/integrator.hpp"
#include "bht/steady_state.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace bht;

namespace {

ModelParams model(int l, int n, double u = 0.0, double dg = 0.004) {
  ModelParams p;
  p.sites = l;
  p.particles = n;
  p.interaction = u;
  p.delta_gamma = dg;
  return p;
}

}  // namespace

TEST_CASE("Dormand-Prince integrates a damped rotation") {
  // y' = (-0.1 + 2i) y, solved entrywise.
  const Complex rate(-0.1, 2.0);
  auto rhs = [rate](const Matrix& y, Matrix& dydt) { dydt = rate * y; };
  StepControl control;
  control.atol = 1e-12;
  DormandPrince45<Matrix, decltype(rhs)> stepper(rhs, control);
  Matrix y = Matrix::Constant(2, 2, Complex(1.0, 0.5));
  const Matrix y0 = y;
  double t = 0.0;
  REQUIRE(stepper.advance(y, t, 3.0));
  CHECK(t == 3.0);
  CHECK(max_abs(y - std::exp(rate * 3.0) * y0) < 1e-9);
  REQUIRE(stepper.advance(y, t, 5.0));
  CHECK(max_abs(y - std::exp(rate * 5.0) * y0) < 1e-9);
  CHECK(stepper.accepted_steps() > 0);
}

TEST_CASE("GMRES solves a nonsymmetric system") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  const int n = 40;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) a(i, k) = Complex(normal(rng), normal(rng)) / double(n);
  a.diagonal().array() += 3.0;
  Matrix b(n, 1);
  for (int i = 0; i < n; ++i) b(i, 0) = Complex(normal(rng), normal(rng));
  auto apply = [&](const Matrix& x, Matrix& out) { out.noalias() = a * x; };
  auto identity = [](const Matrix& x, Matrix& out) { out = x; };
  Matrix x = Matrix::Zero(n, 1);
  GmresOptions opts;
  opts.restart = 5;
  const GmresResult r = gmres(apply, identity, b, x, opts);
  CHECK(r.converged);
  CHECK(r.relative_residual < 1e-10);
  CHECK((a * x - b).norm() / b.norm() < 1e-9);
}

TEST_CASE("direct solve matches the Kronecker oracle") {
  for (auto [l, n, u] : {std::tuple{2, 1, 0.0}, {3, 2, 1.0}, {4, 2, 0.0}, {4, 2, 1.0}, {5, 2, 10.0}}) {
    const ModelParams p = model(l, n, u);
    const auto b = enumerate_basis(l, n);
    const auto [dev, report] = solve_deviation_direct(p, LindbladOperators::build(b, p));
    CHECK(report.converged);
    CHECK(std::abs(dev.trace()) < 1e-12);
    const oracle::System sys(l, n);
    CHECK(max_abs(dev.matrix() - oracle::deviation(sys, 1.0, u, p.gamma)) < 1e-9);
  }
}

TEST_CASE("two-site deviation in closed form") {
  // Basis {|1,0>, |0,1>}. Eliminating the 2x2 equation by hand gives
  // Rt_aa = 2G/(J^2 + 8G^2) = -Rt_bb and Rt_ab = -iJ/(J^2 + 8G^2).
  ModelParams p = model(2, 1);
  p.hopping = 0.8;
  const double j = p.hopping, g = p.gamma, d = j * j + 8.0 * g * g;
  const Matrix dev = solve_deviation_direct(p).matrix();
  CHECK(dev(0, 0).real() == doctest::Approx(2.0 * g / d).epsilon(1e-10));
  CHECK(dev(1, 1).real() == doctest::Approx(-2.0 * g / d).epsilon(1e-10));
  CHECK(std::abs(dev(0, 1).real()) < 1e-12);
  CHECK(dev(0, 1).imag() == doctest::Approx(-j / d).epsilon(1e-10));
}

TEST_CASE("direct solve enforces its dimension cap") {
  const ModelParams p = model(8, 4);
  const auto b = enumerate_basis(8, 4);
  DirectSolveOptions opts;
  opts.max_dimension = 100;
  CHECK_THROWS_AS(solve_deviation_direct(p, LindbladOperators::build(b, p), opts), ValidationError);
}

TEST_CASE("preconditioner clusters near-degenerate levels") {
  for (auto [l, n] : {std::pair{6, 3}, {8, 4}}) {
    const ModelParams p = model(l, n, 10.0);
    const auto b = enumerate_basis(l, n);
    const LindbladOperators ops = LindbladOperators::build(b, p);
    const Index dim = b->dimension();

    // Mirror pairs such as |3,0,...> and |...,0,3> split far below Gamma.
    const SecularPreconditioner clustered(ops, p.gamma);
    CHECK(clustered.block_size() > dim);

    // A cap equal to the dimension leaves only the populations in the block.
    const SecularPreconditioner capped(ops, p.gamma, 0.25, dim);
    CHECK(capped.block_size() == dim);

    DirectSolveOptions opts;
    opts.max_dimension = 1000;
    const auto [dev, report] = solve_deviation_direct(p, ops, opts);
    CHECK(report.converged);
    CHECK(steady_state_residual(dev, p, ops) < 1e-8);
  }
}

TEST_CASE("propagation with equal rates relaxes to the maximally mixed state") {
  const ModelParams p = model(4, 2, 1.0, 0.0);
  const auto b = enumerate_basis(4, 2);
  const auto [rho, report] = propagate_to_steady_state(DensityMatrix::random_physical(b, 2), p, 1e-9, 1e5);
  CHECK(report.converged);
  CHECK(report.residual < report.threshold);
  CHECK(report.max_trace_drift < 1e-9);
  Matrix diff = rho.matrix();
  diff.diagonal().array() -= 0.1;
  CHECK(max_abs(diff) < 1e-7);
}

TEST_CASE("propagation reaches the exact nonlinear steady state") {
  for (auto [l, n, u] : {std::tuple{2, 1, 0.0}, {4, 2, 1.0}}) {
    const ModelParams p = model(l, n, u);
    const auto b = enumerate_basis(l, n);
    const auto [rho, report] = propagate_to_steady_state(DensityMatrix::maximally_mixed(b), p, 1e-9, 1e5);
    CHECK(report.converged);
    CHECK(report.max_trace_drift < 1e-9);
    CHECK(report.max_hermiticity_drift < 1e-9);
    const oracle::System sys(l, n);
    CHECK(max_abs(rho.matrix() - oracle::steady_state(sys, 1.0, u, p.gamma1(), p.gamma2())) < 1e-9);
  }
}

TEST_CASE("propagation flags non-convergence and still returns the state") {
  const ModelParams p = model(4, 2);
  const auto b = enumerate_basis(4, 2);
  const auto [rho, report] = propagate_to_steady_state(DensityMatrix::maximally_mixed(b), p, 1e-9, 5.0);
  CHECK_FALSE(report.converged);
  CHECK(report.elapsed_time == doctest::Approx(5.0));
  CHECK(std::abs(rho.trace() - 1.0) < 1e-9);
}

TEST_CASE("propagation rejects unphysical input") {
  const ModelParams p = model(4, 2);
  const auto b = enumerate_basis(4, 2);
  CHECK_THROWS_AS(propagate_to_steady_state(DensityMatrix::zero(b), p, 1e-6, 10.0), ValidationError);
}

TEST_CASE("extraction") {
  const auto b = enumerate_basis(4, 2);
  CHECK(max_abs(extract_deviation(DensityMatrix::maximally_mixed(b), 0.004).matrix()) == 0.0);
  CHECK(max_abs(extract_deviation_odd(DensityMatrix::maximally_mixed(b), 0.004).matrix()) == 0.0);
  CHECK_THROWS_AS(extract_deviation(DensityMatrix::maximally_mixed(b), 0.0), ValidationError);
  CHECK_THROWS_AS(extract_deviation_odd(DensityMatrix::maximally_mixed(b), 0.0), ValidationError);

  // Exact steady states: plain extraction is O(dGamma) off, odd extraction
  // O(dGamma^2), Richardson O(dGamma^4).
  const oracle::System sys(4, 2);
  const double gamma = 0.04;
  const Matrix exact = oracle::deviation(sys, 1.0, 1.0, gamma);
  auto steady = [&](double dg) {
    return DensityMatrix(b, oracle::steady_state(sys, 1.0, 1.0, gamma + dg / 2, gamma - dg / 2));
  };
  const double dg = 0.004;
  const DensityMatrix full = steady(dg), half = steady(dg / 2);
  const double plain_full = max_abs(extract_deviation(full, dg).matrix() - exact);
  const double plain_half = max_abs(extract_deviation(half, dg / 2).matrix() - exact);
  CHECK(plain_half < 0.6 * plain_full);
  CHECK(plain_half > 0.4 * plain_full);
  CHECK(max_abs(extract_deviation(full, dg).matrix() - extract_deviation(half, dg / 2).matrix()) <
        0.2 * max_abs(exact));
  const DensityMatrix odd_full = extract_deviation_odd(full, dg);
  const DensityMatrix odd_half = extract_deviation_odd(half, dg / 2);
  CHECK(max_abs(odd_full.matrix() - exact) < 0.05 * plain_full);
  CHECK(max_abs(richardson_deviation(odd_full, odd_half).matrix() - exact) < 1e-8);
}
