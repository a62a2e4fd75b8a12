#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "guarctl/dynamics.hpp"

namespace guarctl {

/// Terminal cost gamma(x(theta)).
using TerminalFn = std::function<double(std::span<const double>)>;

/// Geometry of a backward-recursion value grid: uniform time levels over the
/// horizon and a uniform node lattice over a state box.
struct ValueGridSpec {
  int time_steps = 0;
  Box box;
  std::vector<int> nodes;  // per-axis node counts, >= 2

  void validate(int state_dim) const {
    if (time_steps < 1) throw ConfigError("value grid: time_steps must be >= 1");
    box.validate();
    if (box.dim() != state_dim)
      throw ConfigError("value grid: box dimension != state dimension");
    if (nodes.size() != static_cast<std::size_t>(state_dim))
      throw ConfigError("value grid: node count list has wrong length");
    for (int m : nodes)
      if (m < 2) throw ConfigError("value grid: need >= 2 nodes per axis");
    if (state_dim > 3)
      throw ConfigError("value grid: state dimensions above 3 are unsupported");
    for (int a = 0; a < box.dim(); ++a)
      if (!(box.lo[a] < box.hi[a]))
        throw ConfigError("value grid: box must have positive width");
  }
};

/// Dense value function table on a ValueGridSpec: one scalar per (time level,
/// state node).  Spatial queries use clamped multilinear interpolation; time
/// queries interpolate linearly between adjacent levels.  Query coordinates
/// within 1e-12 of a node (relative to the axis width) are snapped onto it,
/// which keeps nodal queries bitwise equal to the stored entries.
class ValueTable {
 public:
  ValueTable(double t0, double theta, ValueGridSpec spec, int state_dim)
      : t0_(t0), theta_(theta), spec_(std::move(spec)) {
    spec_.validate(state_dim);
    if (!(t0_ < theta_)) throw ConfigError("value table: empty horizon");
    const int d = spec_.box.dim();
    coords_.resize(static_cast<std::size_t>(d));
    level_stride_ = 1;
    for (int a = 0; a < d; ++a) {
      const int m = spec_.nodes[static_cast<std::size_t>(a)];
      auto& c = coords_[static_cast<std::size_t>(a)];
      c.resize(static_cast<std::size_t>(m));
      const double step = spec_.box.width(a) / (m - 1);
      for (int k = 0; k < m; ++k) c[static_cast<std::size_t>(k)] = spec_.box.lo[a] + k * step;
      c.back() = spec_.box.hi[a];
      level_stride_ *= static_cast<std::size_t>(m);
    }
    values_.assign(static_cast<std::size_t>(spec_.time_steps + 1) * level_stride_, 0.0);
  }

  int dim() const { return spec_.box.dim(); }
  int time_steps() const { return spec_.time_steps; }
  double t0() const { return t0_; }
  double theta() const { return theta_; }
  const Box& box() const { return spec_.box; }
  const std::vector<int>& nodes() const { return spec_.nodes; }
  const std::vector<std::vector<double>>& coords() const { return coords_; }
  std::size_t nodes_total() const { return level_stride_; }
  double level_time(int k) const {
    return k == spec_.time_steps ? theta_ : t0_ + k * level_step();
  }
  double level_step() const { return (theta_ - t0_) / spec_.time_steps; }

  double& at(int level, std::size_t flat) {
    return values_[static_cast<std::size_t>(level) * level_stride_ + flat];
  }
  double at(int level, std::size_t flat) const {
    return values_[static_cast<std::size_t>(level) * level_stride_ + flat];
  }

  /// Coordinates of a flat node index (first axis slowest).
  void node_coords(std::size_t flat, Vec& out) const {
    const int d = dim();
    out.resize(static_cast<std::size_t>(d));
    for (int a = d - 1; a >= 0; --a) {
      const std::size_t m = coords_[static_cast<std::size_t>(a)].size();
      out[static_cast<std::size_t>(a)] = coords_[static_cast<std::size_t>(a)][flat % m];
      flat /= m;
    }
  }

  /// Clamped multilinear interpolation on one time level.  States beyond one
  /// cell outside the box mean the grid was too small for the motion: error.
  double value_level(int level, std::span<const double> x) const {
    int idx[3];
    double w[3];
    locate(x, idx, w);
    const double* lvl = values_.data() + static_cast<std::size_t>(level) * level_stride_;
    const int d = dim();
    double acc = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
      double weight = 1.0;
      std::size_t flat = 0;
      for (int a = 0; a < d; ++a) {
        const int bit = (corner >> a) & 1;
        weight *= bit ? w[a] : 1.0 - w[a];
        flat = flat * coords_[static_cast<std::size_t>(a)].size() +
               static_cast<std::size_t>(idx[a] + bit);
      }
      if (weight != 0.0) acc += weight * lvl[flat];
    }
    return acc;
  }

  /// Space- and time-interpolated value V(t, x).
  double value(double t, std::span<const double> x) const {
    const double span_tol = 1e-9 * (theta_ - t0_);
    if (t < t0_ - span_tol || t > theta_ + span_tol)
      throw std::out_of_range("value table: time outside horizon");
    double pos = (t - t0_) / level_step();
    const double r = std::round(pos);
    if (std::abs(pos - r) <= 1e-9) pos = r;  // snap onto exact levels
    if (pos <= 0.0) return value_level(0, x);
    if (pos >= spec_.time_steps) return value_level(spec_.time_steps, x);
    const int k = static_cast<int>(std::floor(pos));
    const double w = pos - k;
    if (w == 0.0) return value_level(k, x);
    return (1.0 - w) * value_level(k, x) + w * value_level(k + 1, x);
  }

  void save(std::ostream& os) const {
    char buf[64];
    os << "guarctl value-table v1\n";
    os << "time_steps=" << spec_.time_steps << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", t0_);
    os << "t0=" << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", theta_);
    os << "theta=" << buf << "\n";
    os << "dim=" << dim() << "\n";
    for (int a = 0; a < dim(); ++a) {
      os << "axis " << spec_.nodes[static_cast<std::size_t>(a)] << " ";
      std::snprintf(buf, sizeof buf, "%.17g", spec_.box.lo[a]);
      os << buf << " ";
      std::snprintf(buf, sizeof buf, "%.17g", spec_.box.hi[a]);
      os << buf << "\n";
    }
    os << "values " << values_.size() << "\n";
    for (double v : values_) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf << "\n";
    }
  }

  static ValueTable load(std::istream& is) {
    auto expect = [&is](const std::string& key) {
      std::string line;
      if (!std::getline(is, line) || line.rfind(key, 0) != 0)
        throw ConfigError("value table: malformed file near '" + key + "'");
      return line.substr(key.size());
    };
    expect("guarctl value-table v1");
    ValueGridSpec spec;
    spec.time_steps = std::stoi(expect("time_steps="));
    const double t0 = std::stod(expect("t0="));
    const double theta = std::stod(expect("theta="));
    const int d = std::stoi(expect("dim="));
    for (int a = 0; a < d; ++a) {
      std::istringstream ls(expect("axis "));
      int m = 0;
      double lo = 0, hi = 0;
      ls >> m >> lo >> hi;
      if (!ls) throw ConfigError("value table: malformed axis line");
      spec.nodes.push_back(m);
      spec.box.lo.push_back(lo);
      spec.box.hi.push_back(hi);
    }
    const std::size_t count = std::stoul(expect("values "));
    ValueTable table(t0, theta, std::move(spec), d);
    if (count != table.values_.size())
      throw ConfigError("value table: value count does not match geometry");
    std::string line;
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(is, line))
        throw ConfigError("value table: truncated value block");
      table.values_[i] = std::stod(line);
    }
    return table;
  }

 private:
  // Per-axis cell index and weight for x, with node snapping and clamping.
  void locate(std::span<const double> x, int* idx, double* w) const {
    const int d = dim();
    if (x.size() != static_cast<std::size_t>(d))
      throw std::invalid_argument("value table: query dimension mismatch");
    for (int a = 0; a < d; ++a) {
      const auto& c = coords_[static_cast<std::size_t>(a)];
      const double cell = c[1] - c[0];
      double xa = x[a];
      // Snap near-node coordinates onto the node.
      const double snap = 1e-12 * (c.back() - c.front());
      const int near = static_cast<int>(
          std::clamp(std::round((xa - c.front()) / cell), 0.0,
                     static_cast<double>(c.size() - 1)));
      if (std::abs(xa - c[static_cast<std::size_t>(near)]) <= snap)
        xa = c[static_cast<std::size_t>(near)];
      if (xa < c.front() - cell || xa > c.back() + cell)
        throw NumericError(
            "value table: state escaped the interpolation box by more than "
            "one cell (enlarge the grid box)");
      xa = std::clamp(xa, c.front(), c.back());
      auto it = std::upper_bound(c.begin(), c.end(), xa);
      int i = static_cast<int>(it - c.begin()) - 1;
      i = std::clamp(i, 0, static_cast<int>(c.size()) - 2);
      idx[a] = i;
      w[a] = (xa - c[static_cast<std::size_t>(i)]) /
             (c[static_cast<std::size_t>(i) + 1] - c[static_cast<std::size_t>(i)]);
    }
  }

  double t0_, theta_;
  ValueGridSpec spec_;
  std::vector<std::vector<double>> coords_;
  std::vector<double> values_;
  std::size_t level_stride_ = 0;
};

/// Backward grid recursion for the programmed (quasi-strategy) value:
///   V(theta, x) = gamma(x),
///   V(t_k, x)  = max over enumerated v of min over enumerated u of
///                V(t_{k+1}, x + dt * f(t_k, x, u, v)),
/// with the one-step prediction read off the next level by clamped
/// multilinear interpolation.  The disturbance maximizes on the outside: the
/// grid value is an upper proxy for the quasi-strategy guaranteed result.
/// Ties in either extremum keep the earliest enumerated point, so the table
/// is a pure function of its inputs.
inline ValueTable dp_quasi_value(const Dynamics& dyn, const TerminalFn& terminal,
                                 const ValueGridSpec& grid) {
  dyn.validate();
  if (!terminal) throw ConfigError("value recursion: missing terminal cost");
  grid.validate(dyn.state_dim);
  ValueTable table(dyn.t0, dyn.theta, grid, dyn.state_dim);

  const std::size_t total = table.nodes_total();
  Vec x, xn(static_cast<std::size_t>(dyn.state_dim)),
      dx(static_cast<std::size_t>(dyn.state_dim));

  for (std::size_t n = 0; n < total; ++n) {
    table.node_coords(n, x);
    table.at(grid.time_steps, n) = terminal(x);
  }

  const auto& us = dyn.control_set.enumerate();
  const auto& vs = dyn.disturbance_set.enumerate();
  const double dt = table.level_step();

  for (int k = grid.time_steps - 1; k >= 0; --k) {
    const double t = table.level_time(k);
    for (std::size_t n = 0; n < total; ++n) {
      table.node_coords(n, x);
      double outer = 0.0;
      bool outer_set = false;
      for (const Vec& v : vs) {
        double inner = 0.0;
        bool inner_set = false;
        for (const Vec& u : us) {
          dyn.eval(t, x, u, v, dx);
          for (std::size_t a = 0; a < xn.size(); ++a) xn[a] = x[a] + dt * dx[a];
          const double val = table.value_level(k + 1, xn);
          if (!inner_set || val < inner) {
            inner = val;
            inner_set = true;
          }
        }
        if (!outer_set || inner > outer) {
          outer = inner;
          outer_set = true;
        }
      }
      table.at(k, n) = outer;
    }
  }
  return table;
}

/// Finite-difference gradient of the table at (t, y) with a one-cell central
/// stencil per axis.  Stencil points are snapped onto nodes and clamped into
/// the box, and each denominator is the actual coordinate spread, so on
/// tables whose levels are exact in the node coordinates the result is exact
/// as well.
inline Vec value_shift_vector(const ValueTable& table, double t,
                              std::span<const double> y) {
  const int d = table.dim();
  if (y.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("shift vector: dimension mismatch");
  if (!table.box().contains(y, 1.0 / 8.0))
    throw std::out_of_range("shift vector: query point outside grid box");
  Vec g(static_cast<std::size_t>(d));
  Vec xp(y.begin(), y.end()), xm(y.begin(), y.end());
  for (int a = 0; a < d; ++a) {
    const auto& c = table.coords()[static_cast<std::size_t>(a)];
    const double h = c[1] - c[0];
    const double save = y[a];
    xp[a] = std::clamp(save + h, c.front(), c.back());
    xm[a] = std::clamp(save - h, c.front(), c.back());
    // Snap both stencil ends onto nodes when they fall within round-off.
    for (double* p : {&xp[a], &xm[a]}) {
      const int near = static_cast<int>(
          std::clamp(std::round((*p - c.front()) / h), 0.0,
                     static_cast<double>(c.size() - 1)));
      if (std::abs(*p - c[static_cast<std::size_t>(near)]) <=
          1e-12 * (c.back() - c.front()))
        *p = c[static_cast<std::size_t>(near)];
    }
    const double denom = xp[a] - xm[a];
    if (!(denom > 0.0))
      throw NumericError("shift vector: degenerate stencil (axis too narrow)");
    g[static_cast<std::size_t>(a)] =
        (table.value(t, xp) - table.value(t, xm)) / denom;
    xp[a] = save;
    xm[a] = save;
  }
  return g;
}

}  // namespace guarctl
