#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "guarctl/dynamics.hpp"
#include "guarctl/strategies.hpp"

namespace guarctl {

/// Two-dimensional bilinear benchmark on the unit horizon:
///   dx1/dt = u1 v1,   dx2/dt = max(0, x1) u2 v2,
/// with u in [-1,1]^2 (enumerated on a uniform grid) and v ranging over the
/// four corner points {-1,1}^2.  The payoff is x2 at the final time; the
/// disturbance maximizes it, the control minimizes.
inline Dynamics make_bilinear_dynamics(Box bounds = Box{{-1.2, -1.2}, {1.2, 1.2}},
                                       int control_resolution = 9) {
  Dynamics dyn;
  dyn.id = "bilinear";
  dyn.state_dim = 2;
  dyn.t0 = 0.0;
  dyn.theta = 1.0;
  dyn.control_set =
      CompactSet::grid(Box{{-1.0, -1.0}, {1.0, 1.0}},
                       {control_resolution, control_resolution});
  dyn.disturbance_set = CompactSet::finite(
      {{-1.0, -1.0}, {-1.0, 1.0}, {1.0, -1.0}, {1.0, 1.0}});
  dyn.bounds = std::move(bounds);
  dyn.f = [](double, std::span<const double> x, std::span<const double> u,
             std::span<const double> v, std::span<double> dx) {
    dx[0] = u[0] * v[0];
    dx[1] = std::max(0.0, x[0]) * u[1] * v[1];
  };
  return dyn;
}

/// Terminal payoff of the benchmark: the second state coordinate.
inline TerminalFn bilinear_terminal() {
  return [](std::span<const double> x) { return x[1]; };
}

/// Closed-form optimal guaranteed result of the benchmark, valid for
/// x1 >= 0 (the control keeps the motion in that half-plane):
///   V(t, x) = x2 - x1 (1 - t) - (1 - t)^2 / 2.
inline double bilinear_analytic_value(double t, std::span<const double> x) {
  const double r = 1.0 - t;
  return x[1] - x[0] * r - 0.5 * r * r;
}

/// The four corner controls, in enumeration order.
inline std::vector<Vec> bilinear_corner_controls() {
  return {{-1.0, -1.0}, {-1.0, 1.0}, {1.0, -1.0}, {1.0, 1.0}};
}

/// One step of the hand-derived optimal feedback: divide the observed state
/// increment by the control that produced it, then drive x1 up and x2 down:
///   u1 = argmax of u * (dx1 / u1_prev)  over {-1, +1},
///   u2 = argmin of u * (dx2 / u2_prev)  over {-1, +1},
/// with ties resolved to +1.  Both components of the previous control must
/// be nonzero for the quotients to exist.
inline Vec bilinear_explicit_step(std::span<const double> x_prev,
                                  std::span<const double> x_now,
                                  std::span<const double> u_prev) {
  if (u_prev[0] == 0.0 || u_prev[1] == 0.0)
    throw std::invalid_argument(
        "explicit feedback: previous control has a zero component");
  const double q1 = (x_now[0] - x_prev[0]) / u_prev[0];
  const double q2 = (x_now[1] - x_prev[1]) / u_prev[1];
  return {q1 >= 0.0 ? 1.0 : -1.0, q2 > 0.0 ? -1.0 : 1.0};
}

/// Feedback wrapper around `bilinear_explicit_step`, probing with the block
/// controls themselves (no test window).  It needs only the motion samples
/// at the partition nodes.
class ExplicitBilinearFeedback final : public FullMemoryFeedback {
 public:
  explicit ExplicitBilinearFeedback(Partition part, Vec u0 = {1.0, 1.0})
      : part_(std::move(part)), u0_(std::move(u0)) {
    if (u0_.size() != 2 || u0_[0] == 0.0 || u0_[1] == 0.0)
      throw ConfigError("explicit feedback: block-0 control must be "
                        "two-dimensional with nonzero components");
  }

  std::string id() const override { return "explicit"; }
  const Partition& partition() const override { return part_; }
  void reset() override { next_i_ = 0; }

  Signal next_block(const Trajectory& history, int i) override {
    if (i != next_i_)
      throw std::logic_error("strategy: blocks must be requested in order");
    if (i == 0) {
      u_prev_ = u0_;
    } else {
      const Vec& a = history.sample_at(part_.node(i - 1));
      const Vec& b = history.sample_at(part_.node(i));
      u_prev_ = bilinear_explicit_step(a, b, u_prev_);
    }
    ++next_i_;
    return Signal::constant(part_.node(i), part_.node(i + 1), u_prev_);
  }

 private:
  Partition part_;
  Vec u0_;
  Vec u_prev_;
  int next_i_ = 0;
};

}  // namespace guarctl
