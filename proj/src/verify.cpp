#include "bht/verify.hpp"

#include <sstream>

#include "bht/steady_state.hpp"

namespace bht {

bool VerifyReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

Json VerifyReport::to_json() const {
  Json out = Json::array();
  for (const auto& c : checks)
    out.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}});
  return {{"passed", passed()}, {"checks", out}};
}

double commutator_identity_error(const ChainOperator& hamiltonian, const ChainOperator& current,
                                 const LindbladOperators& ops, double hopping) {
  const SparseMatrix& h = hamiltonian.matrix();
  const SparseMatrix& i = current.matrix();
  const SparseMatrix commutator = Complex(0.0, -1.0) * (SparseMatrix(h * i) - SparseMatrix(i * h));
  Matrix diff = Matrix(commutator);
  diff.diagonal() -= (0.5 * hopping * hopping * ops.imbalance).cast<Complex>();
  return max_abs(diff);
}

namespace {

double sparse_hermiticity_error(const SparseMatrix& m) {
  const SparseMatrix diff = SparseMatrix(m.adjoint()) - m;
  double worst = 0.0;
  for (Index r = 0; r < diff.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

}  // namespace

VerifyReport run_verify(const ExperimentConfig& config) {
  VerifyReport report;
  auto check = [&](const std::string& name, double value, double tolerance) {
    report.checks.push_back({name, value, tolerance, value <= tolerance});
  };

  double trace_drift = 0.0;
  double hermiticity_drift = 0.0;
  auto track = [&](const PropagationReport& r) {
    trace_drift = std::max(trace_drift, r.max_trace_drift);
    hermiticity_drift = std::max(hermiticity_drift, r.max_hermiticity_drift);
  };

  for (const auto& [sites, particles] : config.verify.sizes) {
    std::ostringstream tag;
    tag << "[L=" << sites << ",N=" << particles << "]";
    const std::string at = tag.str();

    ModelParams params = config.model;
    params.sites = sites;
    params.particles = particles;
    params.interaction = 0.0;
    params.delta_gamma = params.gamma / 10.0;
    const BasisPtr basis = enumerate_basis(sites, particles);
    const Index n = basis->dimension();
    const LindbladOperators ops = LindbladOperators::build(basis, params);

    ChainOperator current = build_current(basis, params.hopping);
    if (config.verify.flip_current_sign) current = current.scaled(-1.0);
    check("commutator_identity_U0" + at, commutator_identity_error(ops.hamiltonian, current, ops, params.hopping), 1e-12);

    double herm = std::max(sparse_hermiticity_error(ops.hamiltonian.matrix()), sparse_hermiticity_error(current.matrix()));
    SparseMatrix total(n, n);
    for (int l = 1; l <= sites; ++l) {
      const ChainOperator number = build_number_operator(basis, l);
      herm = std::max(herm, sparse_hermiticity_error(number.matrix()));
      total += number.matrix();
    }
    check("hermitian_as_stored" + at, herm, 0.0);
    check("number_sector" + at, max_abs(Matrix(total) - particles * Matrix::Identity(n, n)), 0.0);

    const SparseMatrix& v = ops.jump.matrix();
    const SparseMatrix vd = v.adjoint();
    Matrix jump_commutator = Matrix(SparseMatrix(vd * v)) - Matrix(SparseMatrix(v * vd));
    jump_commutator.diagonal() -= ops.imbalance.cast<Complex>();
    check("jump_commutator" + at, max_abs(jump_commutator), 1e-14);

    const DensityMatrix identity(basis, Matrix::Identity(n, n));
    const Matrix l1 = dissipator_L1(identity, ops.jump).matrix();
    const Matrix l2 = dissipator_L2(identity, ops.jump).matrix();
    Matrix l1_expected = Matrix::Zero(n, n);
    l1_expected.diagonal() = (2.0 * ops.imbalance).cast<Complex>();
    check("dissipator_L1_identity" + at, max_abs(l1 - l1_expected), 1e-14);
    check("dissipator_balance" + at, max_abs(l1 + l2), 1e-14);

    const DensityMatrix random = DensityMatrix::random_physical(basis, config.seed);
    ModelParams interacting = params;
    interacting.interaction = 1.0;
    const LindbladOperators ops_u1 = LindbladOperators::build(basis, interacting);
    const DensityMatrix rhs = master_rhs(random, interacting, ops_u1);
    check("rhs_traceless" + at, std::abs(rhs.trace()), 1e-12);
    check("rhs_hermitian" + at, rhs.hermiticity_error(), 1e-12);

    // Equal rates: the steady state is the maximally mixed state.
    ModelParams balanced = interacting;
    balanced.delta_gamma = 0.0;
    PropagationOptions tight;
    tight.tolerance = 1e-9;
    {
      auto [rho, rep] = propagate_to_steady_state(random, balanced, ops_u1, tight);
      track(rep);
      Matrix diff = rho.matrix();
      diff.diagonal().array() -= 1.0 / static_cast<double>(n);
      check("equilibrium_is_maximally_mixed" + at, max_abs(diff), 1e-7);
    }

    for (double u : {0.0, 1.0}) {
      ModelParams p = params;
      p.interaction = u;
      const LindbladOperators ops_u = LindbladOperators::build(basis, p);
      const DensityMatrix direct = solve_deviation_direct(p, ops_u).first;
      auto [full, rep_full] = propagate_to_steady_state(DensityMatrix::maximally_mixed(basis), p, ops_u, tight);
      ModelParams half = p;
      half.delta_gamma *= 0.5;
      const LindbladOperators ops_half = LindbladOperators::build(basis, half);
      auto [halved, rep_half] = propagate_to_steady_state(DensityMatrix::maximally_mixed(basis), half, ops_half, tight);
      track(rep_full);
      track(rep_half);
      const DensityMatrix extracted = richardson_deviation(extract_deviation_odd(full, p.delta_gamma),
                                                           extract_deviation_odd(halved, half.delta_gamma));
      std::ostringstream name;
      name << "propagation_vs_direct_U" << u << at;
      check(name.str(), max_abs(extracted.matrix() - direct.matrix()), 1e-6);
    }
  }
  check("propagation_trace_drift", trace_drift, 1e-9);
  check("propagation_hermiticity_drift", hermiticity_drift, 1e-9);
  return report;
}

}  // namespace bht
