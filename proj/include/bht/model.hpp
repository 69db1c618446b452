#pragma once

#include <cmath>
#include <string>

#include "bht/types.hpp"

namespace bht {

/// Chain and battery parameters. J sets the energy unit and the time unit 1/J.
struct ModelParams {
  int sites = 6;
  int particles = 3;
  double hopping = 1.0;      // J
  double interaction = 0.0;  // U
  double gamma = 0.04;       // mean incoherent rate
  double delta_gamma = 0.004;

  double gamma1() const { return gamma + 0.5 * delta_gamma; }
  double gamma2() const { return gamma - 0.5 * delta_gamma; }

  /// Throws ValidationError naming the first violated constraint.
  void validate() const {
    require(sites >= 2, "model: L must be >= 2 (the battery couples sites 1 and L)");
    require(particles >= 0, "model: N must be >= 0");
    require(hopping > 0.0, "model: J must be > 0");
    require(interaction >= 0.0, "model: U must be >= 0");
    require(gamma > 0.0, "model: Gamma must be > 0");
    require(std::abs(delta_gamma) < 2.0 * gamma, "model: |dGamma| must be < 2 Gamma");
  }
};

}  // namespace bht
