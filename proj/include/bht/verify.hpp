#pragma once

#include <string>
#include <vector>

#include "bht/config.hpp"
#include "bht/liouville.hpp"

namespace bht {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  Json to_json() const;
};

/// max |-i[H, I] - J^2 (n_L - n_1)/2| for H at U = 0 and the given current operator.
double commutator_identity_error(const ChainOperator& hamiltonian, const ChainOperator& current,
                                 const LindbladOperators& ops, double hopping);

/// Structural identities, conservation laws and the propagation-vs-direct
/// oracle on every configured (L, N).
VerifyReport run_verify(const ExperimentConfig& config);

}  // namespace bht
