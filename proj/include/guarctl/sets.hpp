#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "guarctl/common.hpp"

namespace guarctl {

/// Compact constraint set for controls or disturbances.  Two shapes are
/// supported: an explicit finite list of points, and an axis-aligned box
/// carrying a per-axis grid resolution used whenever the set has to be
/// enumerated.  Instances are immutable after construction; `enumerate()`
/// always returns the same points in the same deterministic lexicographic
/// order (first axis slowest, first point = all lower bounds).
class CompactSet {
 public:
  enum class Kind { Finite, Grid };

  static CompactSet finite(std::vector<Vec> points) {
    if (points.empty()) throw ConfigError("finite set: no points given");
    const std::size_t d = points.front().size();
    if (d == 0) throw ConfigError("finite set: zero-dimensional point");
    for (const Vec& p : points)
      if (p.size() != d)
        throw ConfigError("finite set: inconsistent point dimensions");
    CompactSet s;
    s.kind_ = Kind::Finite;
    s.points_ = std::move(points);
    s.box_.lo = s.box_.hi = s.points_.front();
    for (const Vec& p : s.points_)
      for (std::size_t a = 0; a < d; ++a) {
        s.box_.lo[a] = std::min(s.box_.lo[a], p[a]);
        s.box_.hi[a] = std::max(s.box_.hi[a], p[a]);
      }
    return s;
  }

  static CompactSet grid(Box box, std::vector<int> resolution) {
    box.validate();
    if (resolution.size() != static_cast<std::size_t>(box.dim()))
      throw ConfigError("grid set: resolution/box dimension mismatch");
    for (std::size_t a = 0; a < resolution.size(); ++a) {
      if (resolution[a] < 2)
        throw ConfigError("grid set: resolution must be >= 2 on every axis");
      if (!(box.lo[a] < box.hi[a]))
        throw ConfigError("grid set: box must have positive width on axis " +
                          std::to_string(a));
    }
    CompactSet s;
    s.kind_ = Kind::Grid;
    s.box_ = std::move(box);
    s.resolution_ = std::move(resolution);
    s.points_ = lattice(s.box_, s.resolution_);
    return s;
  }

  Kind kind() const { return kind_; }
  int dim() const { return box_.dim(); }
  const Box& bounding_box() const { return box_; }

  /// Deterministic enumeration of the set: the stored list for finite sets,
  /// the lexicographic lattice for grid sets.
  const std::vector<Vec>& enumerate() const { return points_; }

  std::size_t size() const { return points_.size(); }

  /// Membership test.  Boxes use interval containment; finite sets accept a
  /// point within `tol` (Euclidean) of a listed element.
  bool contains(std::span<const double> x, double tol = 1e-9) const {
    if (x.size() != static_cast<std::size_t>(dim())) return false;
    if (kind_ == Kind::Grid) {
      for (int a = 0; a < dim(); ++a)
        if (x[a] < box_.lo[a] - tol || x[a] > box_.hi[a] + tol) return false;
      return true;
    }
    for (const Vec& p : points_)
      if (distance(x, p) <= tol) return true;
    return false;
  }

  /// Finite eps-net of the set: finite sets are returned verbatim; for boxes
  /// a uniform lattice with per-axis spacing <= eps (endpoints included).
  std::vector<Vec> epsilon_net(double eps) const {
    if (!(eps > 0.0)) throw ConfigError("epsilon net: spacing must be > 0");
    if (kind_ == Kind::Finite) return points_;
    std::vector<int> res(static_cast<std::size_t>(dim()));
    for (int a = 0; a < dim(); ++a) {
      const double w = box_.width(a);
      res[a] = std::max(2, static_cast<int>(std::ceil(w / eps)) + 1);
      // Guard against ceil() landing one notch too high at exact multiples.
      while (res[a] > 2 && w / (res[a] - 2) <= eps) --res[a];
    }
    return lattice(box_, res);
  }

 private:
  CompactSet() = default;

  static std::vector<Vec> lattice(const Box& box,
                                  const std::vector<int>& res) {
    const int d = box.dim();
    std::vector<std::vector<double>> coords(static_cast<std::size_t>(d));
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
      const int m = res[static_cast<std::size_t>(a)];
      coords[a].resize(static_cast<std::size_t>(m));
      const double step = box.width(a) / (m - 1);
      for (int k = 0; k < m; ++k) coords[a][k] = box.lo[a] + k * step;
      coords[a].back() = box.hi[a];  // exact endpoint
      total *= static_cast<std::size_t>(m);
    }
    std::vector<Vec> out;
    out.reserve(total);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    Vec p(static_cast<std::size_t>(d));
    for (std::size_t n = 0; n < total; ++n) {
      for (int a = 0; a < d; ++a) p[a] = coords[a][idx[a]];
      out.push_back(p);
      // Odometer increment, last axis fastest.
      for (int a = d - 1; a >= 0; --a) {
        if (++idx[a] < res[static_cast<std::size_t>(a)]) break;
        idx[a] = 0;
      }
    }
    return out;
  }

  Kind kind_ = Kind::Finite;
  Box box_;
  std::vector<int> resolution_;
  std::vector<Vec> points_;
};

}  // namespace guarctl
