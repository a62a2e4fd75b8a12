#pragma once

#include <functional>
#include <string>
#include <utility>

#include "guarctl/common.hpp"
#include "guarctl/sets.hpp"

namespace guarctl {

/// Right-hand side dx/dt = f(t, x, u, v), writing the derivative into `dx`.
using RhsFn = std::function<void(double t, std::span<const double> x,
                                 std::span<const double> u,
                                 std::span<const double> v,
                                 std::span<double> dx)>;

/// Conflict-controlled system: dynamics f on a fixed horizon [t0, theta],
/// control constraint set P, disturbance constraint set Q, and a working
/// state box G.  Trajectories are only trusted while they stay inside G
/// inflated by `bounds_margin` on every side; integration aborts otherwise.
struct Dynamics {
  std::string id;
  int state_dim = 0;
  double t0 = 0.0;
  double theta = 1.0;
  CompactSet control_set = CompactSet::finite({{0.0}});
  CompactSet disturbance_set = CompactSet::finite({{0.0}});
  Box bounds;
  double bounds_margin = 0.1;
  RhsFn f;

  void validate() const {
    if (id.empty()) throw ConfigError("dynamics: missing id");
    if (state_dim < 1) throw ConfigError("dynamics: state_dim must be >= 1");
    if (!(t0 < theta)) throw ConfigError("dynamics: empty horizon");
    if (!f) throw ConfigError("dynamics: missing right-hand side");
    bounds.validate();
    if (bounds.dim() != state_dim)
      throw ConfigError("dynamics: bounds dimension != state_dim");
    if (!(bounds_margin >= 0.0))
      throw ConfigError("dynamics: negative bounds margin");
  }

  int control_dim() const { return control_set.dim(); }
  int disturbance_dim() const { return disturbance_set.dim(); }

  void eval(double t, std::span<const double> x, std::span<const double> u,
            std::span<const double> v, std::span<double> dx) const {
    f(t, x, u, v, dx);
  }

  Vec eval(double t, std::span<const double> x, std::span<const double> u,
           std::span<const double> v) const {
    Vec dx(static_cast<std::size_t>(state_dim));
    f(t, x, u, v, dx);
    return dx;
  }

  /// True while the state is finite and inside the inflated working box.
  bool state_ok(std::span<const double> x) const {
    return all_finite(x) && bounds.contains(x, bounds_margin);
  }
};

}  // namespace guarctl
