#pragma once

#include <cmath>
#include <vector>

#include "bht/types.hpp"

namespace bht {

struct GmresOptions {
  double relative_tolerance = 1e-10;
  int restart = 30;
  int max_iterations = 2000;
};

struct GmresResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning on dense Eigen "vectors".
///
/// Any Eigen dense type works as the vector space (here: N x N matrices with
/// the Frobenius inner product). `apply(x, out)` and `precondition(x, out)`
/// write into `out`. On entry `x` is the initial guess.
template <typename Vec, typename Apply, typename Precondition>
GmresResult gmres(const Apply& apply, const Precondition& precondition, const Vec& rhs, Vec& x,
                  const GmresOptions& options) {
  using Scalar = typename Vec::Scalar;
  const auto dot = [](const Vec& a, const Vec& b) { return a.reshaped().dot(b.reshaped()); };

  GmresResult result;
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    x.setZero();
    result.converged = true;
    return result;
  }

  const int m = options.restart;
  std::vector<Vec> basis(m + 1);
  DenseMatrix<Scalar> hess = DenseMatrix<Scalar>::Zero(m + 1, m);
  DenseVector<Scalar> g(m + 1);
  std::vector<Scalar> cs(m), sn(m);
  Vec w, z;

  apply(x, w);
  Vec r = rhs - w;
  double beta = r.norm();
  result.relative_residual = beta / rhs_norm;

  while (result.iterations < options.max_iterations) {
    if (result.relative_residual <= options.relative_tolerance) {
      result.converged = true;
      return result;
    }
    basis[0] = r / beta;
    g.setZero();
    g[0] = beta;
    hess.setZero();
    int k = 0;
    for (; k < m && result.iterations < options.max_iterations; ++k) {
      ++result.iterations;
      precondition(basis[k], z);
      apply(z, w);
      // Modified Gram-Schmidt, repeated once for stability.
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= k; ++i) {
          const Scalar h = dot(basis[i], w);
          hess(i, k) += h;
          w -= h * basis[i];
        }
      const double h_next = w.norm();
      hess(k + 1, k) = h_next;
      if (h_next > 0.0) basis[k + 1] = w / h_next;

      for (int i = 0; i < k; ++i) {
        const Scalar t = cs[i] * hess(i, k) + sn[i] * hess(i + 1, k);
        hess(i + 1, k) = -std::conj(sn[i]) * hess(i, k) + std::conj(cs[i]) * hess(i + 1, k);
        hess(i, k) = t;
      }
      const Scalar a = hess(k, k);
      const Scalar b = hess(k + 1, k);
      const double denom = std::sqrt(std::norm(a) + std::norm(b));
      if (denom == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else if (std::abs(a) == 0.0) {
        cs[k] = 0.0;
        sn[k] = std::conj(b) / std::abs(b);
      } else {
        cs[k] = std::abs(a) / denom;
        sn[k] = a / std::abs(a) * std::conj(b) / denom;
      }
      hess(k, k) = cs[k] * a + sn[k] * b;
      hess(k + 1, k) = 0.0;
      g[k + 1] = -std::conj(sn[k]) * g[k];
      g[k] = cs[k] * g[k];
      result.relative_residual = std::abs(g[k + 1]) / rhs_norm;
      if (result.relative_residual <= options.relative_tolerance || h_next == 0.0) {
        ++k;
        break;
      }
    }

    DenseVector<Scalar> y = hess.topLeftCorner(k, k).template triangularView<Eigen::Upper>().solve(g.head(k));
    Vec update = y[0] * basis[0];
    for (int i = 1; i < k; ++i) update += y[i] * basis[i];
    precondition(update, z);
    x += z;

    apply(x, w);
    r = rhs - w;
    beta = r.norm();
    result.relative_residual = beta / rhs_norm;
    if (beta == 0.0) break;
  }
  result.converged = result.relative_residual <= options.relative_tolerance;
  return result;
}

}  // namespace bht
