#pragma once

#include <algorithm>
#include <cmath>

#include "bht/types.hpp"

namespace bht {

struct StepControl {
  double atol = 1e-10;
  double rtol = 0.0;
  double initial_step = 0.0;  // 0: pick from the first derivative
  double max_step = 0.0;      // 0: unbounded
  double min_step = 1e-12;
};

/// Dormand-Prince 5(4) with FSAL and elementary step-size control.
///
/// The state is any Eigen dense type; the local error is measured in the
/// Frobenius norm against atol + rtol * |y|. `Rhs` is called as
/// rhs(const State& y, State& dydt).
template <typename State, typename Rhs>
class DormandPrince45 {
 public:
  DormandPrince45(Rhs rhs, StepControl control) : rhs_(std::move(rhs)), control_(control) {}

  /// Integrates y from t to t_end in place. Returns false if the step size
  /// collapsed below min_step.
  bool advance(State& y, double& t, double t_end) {
    if (!primed_) {
      rhs_(y, k1_);
      primed_ = true;
      if (step_ <= 0.0) step_ = initial_step(y);
    }
    while (t < t_end) {
      double h = std::min(step_, t_end - t);
      if (control_.max_step > 0.0) h = std::min(h, control_.max_step);
      const double err = attempt(y, h);
      if (err <= 1.0) {
        t += h;
        y.swap(y_new_);
        k1_.swap(k7_);
        ++accepted_;
      } else {
        ++rejected_;
      }
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      // An accepted step shortened to hit t_end keeps the previous proposal.
      if (err > 1.0 || h >= step_) step_ = h * factor;
      if (step_ < control_.min_step) return false;
    }
    return true;
  }

  /// The derivative at the current state has to be recomputed after the
  /// caller modifies y between calls to advance.
  void invalidate() { primed_ = false; }

  long accepted_steps() const { return accepted_; }
  long rejected_steps() const { return rejected_; }
  double step_size() const { return step_; }

 private:
  double initial_step(const State& y) const {
    if (control_.initial_step > 0.0) return control_.initial_step;
    const double scale = control_.atol + control_.rtol * y.norm();
    const double slope = k1_.norm();
    return slope > 0.0 ? 0.01 * std::pow(scale / slope, 0.2) + 1e-3 : 1e-2;
  }

  double attempt(const State& y, double h) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    tmp_ = y + h * a21 * k1_;
    rhs_(tmp_, k2_);
    tmp_ = y + h * (a31 * k1_ + a32 * k2_);
    rhs_(tmp_, k3_);
    tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs_(tmp_, k4_);
    tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs_(tmp_, k5_);
    tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs_(tmp_, k6_);
    y_new_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    rhs_(y_new_, k7_);

    tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    const double scale = control_.atol + control_.rtol * std::max(y.norm(), y_new_.norm());
    return tmp_.norm() / scale;
  }

  Rhs rhs_;
  StepControl control_;
  bool primed_ = false;
  double step_ = 0.0;
  long accepted_ = 0;
  long rejected_ = 0;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_;
};

}  // namespace bht
