#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "guarctl/dynamics.hpp"
#include "guarctl/signal.hpp"
#include "guarctl/trajectory.hpp"

namespace guarctl {

namespace detail {

// One classical RK4 step of length h at time t with frozen inputs (u, v).
inline void rk4_step(const Dynamics& dyn, double t, double h, Vec& x,
                     std::span<const double> u, std::span<const double> v,
                     Vec& k1, Vec& k2, Vec& k3, Vec& k4, Vec& tmp) {
  const std::size_t n = x.size();
  dyn.eval(t, x, u, v, k1);
  for (std::size_t a = 0; a < n; ++a) tmp[a] = x[a] + 0.5 * h * k1[a];
  dyn.eval(t + 0.5 * h, tmp, u, v, k2);
  for (std::size_t a = 0; a < n; ++a) tmp[a] = x[a] + 0.5 * h * k2[a];
  dyn.eval(t + 0.5 * h, tmp, u, v, k3);
  for (std::size_t a = 0; a < n; ++a) tmp[a] = x[a] + h * k3[a];
  dyn.eval(t + h, tmp, u, v, k4);
  for (std::size_t a = 0; a < n; ++a)
    x[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
}

}  // namespace detail

/// Integrate dx/dt = f(t, x, u(t), v(t)) over [a, b] with fixed-step RK4.
/// Both signals are piecewise constant, so the window is cut at the union of
/// their breakpoints and each resulting interval is integrated with
/// `substeps` equal RK4 steps under frozen inputs.  Every interval boundary
/// and every internal step is recorded as a sample; breakpoint instants are
/// stored exactly so later exact-sample lookups succeed.
inline Trajectory integrate_window(const Dynamics& dyn, double a, double b,
                                   std::span<const double> x0,
                                   const Signal& u, const Signal& v,
                                   int substeps) {
  if (!(a < b)) throw ConfigError("integrate: empty window");
  if (substeps < 1) throw ConfigError("integrate: substeps must be >= 1");
  if (x0.size() != static_cast<std::size_t>(dyn.state_dim))
    throw ConfigError("integrate: initial state dimension mismatch");
  if (u.dim() != dyn.control_dim() || v.dim() != dyn.disturbance_dim())
    throw ConfigError("integrate: signal dimension mismatch");

  // Union of signal breakpoints inside the window.
  std::vector<double> cuts{a};
  for (double t : u.breaks_between(a, b)) cuts.push_back(t);
  for (double t : v.breaks_between(a, b)) cuts.push_back(t);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const double merge_tol = 1e-12 * std::max(1.0, std::abs(b));
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [merge_tol](double p, double q) {
                           return q - p <= merge_tol;
                         }),
             cuts.end());
  if (cuts.back() != b) cuts.back() = b;

  const std::size_t n = static_cast<std::size_t>(dyn.state_dim);
  Vec x(x0.begin(), x0.end());
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n);

  if (!dyn.state_ok(x))
    throw NumericError("integrate: initial state outside working box");
  Trajectory traj(a, x);

  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double lo = cuts[c], hi = cuts[c + 1];
    const Vec& uc = u.value_at(lo);
    const Vec& vc = v.value_at(lo);
    const double h = (hi - lo) / substeps;
    for (int s = 1; s <= substeps; ++s) {
      const double t = lo + (s - 1) * h;
      detail::rk4_step(dyn, t, h, x, uc, vc, k1, k2, k3, k4, tmp);
      if (!all_finite(x))
        throw NumericError("integrate: non-finite state at t = " +
                           std::to_string(t + h));
      if (!dyn.state_ok(x))
        throw NumericError("integrate: state left the working box at t = " +
                           std::to_string(t + h) +
                           " (enlarge the system bounds)");
      // Record interval ends at their exact breakpoint value.
      traj.push(s == substeps ? hi : lo + s * h, x);
    }
  }
  return traj;
}

/// Integrate over the full game horizon [t0, theta].
inline Trajectory integrate(const Dynamics& dyn, std::span<const double> x0,
                            const Signal& u, const Signal& v, int substeps) {
  return integrate_window(dyn, dyn.t0, dyn.theta, x0, u, v, substeps);
}

}  // namespace guarctl
