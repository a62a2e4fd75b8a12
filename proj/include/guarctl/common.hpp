#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace guarctl {

using Vec = std::vector<double>;

/// Configuration / validation failure. Maps to CLI exit status 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure at run time (state escapes the working box, non-finite
/// values, grid too coarse). Maps to CLI exit status 2.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) {
  return std::sqrt(dot(a, a));
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

/// Axis-aligned box in state space.
struct Box {
  Vec lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }

  double width(int axis) const { return hi[axis] - lo[axis]; }

  /// Membership test, optionally inflating every side by `margin_frac` of
  /// the axis width.
  bool contains(std::span<const double> x, double margin_frac = 0.0) const {
    for (int a = 0; a < dim(); ++a) {
      const double m = margin_frac * width(a);
      if (x[a] < lo[a] - m || x[a] > hi[a] + m) return false;
    }
    return true;
  }

  void validate() const {
    if (lo.size() != hi.size() || lo.empty())
      throw ConfigError("box: lower/upper bound dimension mismatch");
    for (std::size_t a = 0; a < lo.size(); ++a)
      if (!(lo[a] <= hi[a]))
        throw ConfigError("box: lower bound exceeds upper bound on axis " +
                          std::to_string(a));
  }
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace guarctl
