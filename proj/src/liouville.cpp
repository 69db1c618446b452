#include "bht/liouville.hpp"

#include <random>

namespace bht {

DensityMatrix::DensityMatrix(BasisPtr basis, Matrix data) : basis_(std::move(basis)), data_(std::move(data)) {
  require(basis_ != nullptr, "DensityMatrix: null basis");
  require(data_.rows() == basis_->dimension() && data_.cols() == basis_->dimension(),
          "DensityMatrix: matrix shape does not match basis dimension");
}

DensityMatrix DensityMatrix::maximally_mixed(const BasisPtr& basis) {
  const Index n = basis->dimension();
  return {basis, Matrix::Identity(n, n) / static_cast<double>(n)};
}

DensityMatrix DensityMatrix::zero(const BasisPtr& basis) {
  const Index n = basis->dimension();
  return {basis, Matrix::Zero(n, n)};
}

DensityMatrix DensityMatrix::random_physical(const BasisPtr& basis, std::uint64_t seed) {
  const Index n = basis->dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix a(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = Complex(normal(rng), normal(rng));
  Matrix rho = a * a.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return {basis, std::move(rho)};
}

bool DensityMatrix::hermitize(double tolerance) {
  if (hermiticity_error() <= tolerance) return false;
  data_ = 0.5 * (data_ + data_.adjoint()).eval();
  return true;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(data_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void require_same_basis(const FockBasis& a, const FockBasis& b, const char* where) {
  require(&a == &b || (a.sites() == b.sites() && a.particles() == b.particles()),
          std::string(where) + ": basis mismatch");
}

LindbladOperators LindbladOperators::build(const BasisPtr& basis, const ModelParams& params) {
  params.validate();
  require(basis->sites() == params.sites && basis->particles() == params.particles,
          "LindbladOperators: basis does not match model (L, N)");
  const Index n = basis->dimension();
  ChainOperator jump = build_jump_operator(basis);

  std::vector<Index> target(n, -1);
  RealVector weight = RealVector::Zero(n);
  const SparseMatrix& v = jump.matrix();
  for (Index r = 0; r < v.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(v, r); it; ++it) {
      target[it.col()] = it.row();
      weight[it.col()] = it.value().real();
    }

  RealVector vdv(n), vvd(n), imbalance(n);
  const int last = basis->sites();
  for (Index i = 0; i < n; ++i) {
    const double n1 = basis->occupation(i, 1);
    const double nl = basis->occupation(i, last);
    vdv[i] = nl * (n1 + 1.0);
    vvd[i] = n1 * (nl + 1.0);
    imbalance[i] = nl - n1;
  }
  return {build_hamiltonian(basis, params.hopping, params.interaction),
          std::move(jump),
          std::move(target),
          std::move(weight),
          std::move(vdv),
          std::move(vvd),
          std::move(imbalance)};
}

Liouvillian::Liouvillian(const LindbladOperators& ops, double gamma1, double gamma2)
    : ops_(&ops), gamma1_(gamma1), gamma2_(gamma2), decay_(gamma1 * ops.vdv + gamma2 * ops.vvd) {}

void Liouvillian::apply(const Matrix& rho, Matrix& out) const {
  const LindbladOperators& ops = *ops_;
  const SparseMatrix& h = ops.hamiltonian.matrix();
  const Index n = rho.rows();

  out.noalias() = h * rho;
  out.noalias() -= rho * h;
  out *= Complex(0.0, -1.0);

  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i) out(i, k) -= (decay_[i] + decay_[k]) * rho(i, k);

  const auto& target = ops.jump_target;
  const RealVector& w = ops.jump_weight;
  const double in1 = 2.0 * gamma1_;
  const double in2 = 2.0 * gamma2_;
  for (Index k = 0; k < n; ++k) {
    const Index tk = target[k];
    if (tk < 0) continue;
    for (Index i = 0; i < n; ++i) {
      const Index ti = target[i];
      if (ti < 0) continue;
      const double ww = w[i] * w[k];
      out(ti, tk) += in1 * ww * rho(i, k);  // V R V^dagger
      out(i, k) += in2 * ww * rho(ti, tk);  // V^dagger R V
    }
  }
}

namespace {

Matrix dissipator(const Matrix& rho, const SparseMatrix& a, const SparseMatrix& b) {
  // a^dagger a R + R a^dagger a - 2 a R a^dagger, with b = a^dagger
  const SparseMatrix ba = b * a;
  Matrix out = ba * rho;
  out.noalias() += rho * ba;
  const Matrix ar = a * rho;
  out.noalias() -= 2.0 * (ar * b);
  return out;
}

}  // namespace

DensityMatrix dissipator_L1(const DensityMatrix& rho, const ChainOperator& jump) {
  require_same_basis(rho.basis(), jump.basis(), "dissipator_L1");
  const SparseMatrix vd = jump.matrix().adjoint();
  return {rho.basis_ptr(), dissipator(rho.matrix(), jump.matrix(), vd)};
}

DensityMatrix dissipator_L2(const DensityMatrix& rho, const ChainOperator& jump) {
  require_same_basis(rho.basis(), jump.basis(), "dissipator_L2");
  const SparseMatrix vd = jump.matrix().adjoint();
  return {rho.basis_ptr(), dissipator(rho.matrix(), vd, jump.matrix())};
}

DensityMatrix master_rhs(const DensityMatrix& rho, const ModelParams& params, const LindbladOperators& ops) {
  require_same_basis(rho.basis(), ops.hamiltonian.basis(), "master_rhs");
  require(params.gamma1() >= 0.0 && params.gamma2() >= 0.0, "master_rhs: negative rate");
  return {rho.basis_ptr(), Liouvillian(ops, params.gamma1(), params.gamma2())(rho.matrix())};
}

Matrix linear_response_source(const LindbladOperators& ops) {
  const double n = static_cast<double>(ops.dimension());
  return (2.0 / n * ops.imbalance).cast<Complex>().asDiagonal();
}

double steady_state_residual(const DensityMatrix& deviation, const ModelParams& params,
                             const LindbladOperators& ops) {
  require_same_basis(deviation.basis(), ops.hamiltonian.basis(), "steady_state_residual");
  Matrix r = Liouvillian(ops, params.gamma, params.gamma)(deviation.matrix());
  r -= linear_response_source(ops);
  return r.norm();
}

DensityMatrix reflect(const DensityMatrix& rho) {
  const FockBasis& b = rho.basis();
  const Index n = rho.dimension();
  Matrix out(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index pk = b.reflected_index(k);
    for (Index i = 0; i < n; ++i) out(i, k) = rho.matrix()(b.reflected_index(i), pk);
  }
  return {rho.basis_ptr(), std::move(out)};
}

}  // namespace bht
