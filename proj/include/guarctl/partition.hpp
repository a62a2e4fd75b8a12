#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "guarctl/common.hpp"

namespace guarctl {

/// Finite partition t0 = tau_0 < tau_1 < ... < tau_m = theta of the game
/// horizon.  Blocks are the half-open intervals [tau_i, tau_{i+1}).
class Partition {
 public:
  explicit Partition(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw ConfigError("partition: need >= 2 nodes");
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
      if (!(nodes_[i] < nodes_[i + 1]))
        throw ConfigError("partition: nodes must be strictly increasing");
  }

  /// Uniform partition with `blocks` equal steps.
  static Partition uniform(double t0, double theta, int blocks) {
    if (!(t0 < theta)) throw ConfigError("partition: empty horizon");
    if (blocks < 1) throw ConfigError("partition: need >= 1 block");
    std::vector<double> nodes(static_cast<std::size_t>(blocks) + 1);
    const double step = (theta - t0) / blocks;
    for (int i = 0; i <= blocks; ++i) nodes[static_cast<std::size_t>(i)] = t0 + i * step;
    nodes.back() = theta;  // exact right endpoint
    return Partition(std::move(nodes));
  }

  const std::vector<double>& nodes() const { return nodes_; }
  double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int blocks() const { return static_cast<int>(nodes_.size()) - 1; }
  double t0() const { return nodes_.front(); }
  double theta() const { return nodes_.back(); }

  /// Largest step of the partition.
  double diam() const {
    double d = 0.0;
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
      d = std::max(d, nodes_[i + 1] - nodes_[i]);
    return d;
  }

  /// True when all steps agree up to round-off.
  bool is_uniform(double rel_tol = 1e-9) const {
    double lo = nodes_[1] - nodes_[0], hi = lo;
    for (std::size_t i = 1; i + 1 < nodes_.size(); ++i) {
      const double s = nodes_[i + 1] - nodes_[i];
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    return hi - lo <= rel_tol * hi;
  }

  /// Index of the block containing t: max{ i : tau_i <= t }.  Clamps t = theta
  /// to the last index m.  Errors when t lies outside [t0, theta].
  int locate_index(double t) const {
    if (t < t0() || t > theta())
      throw std::out_of_range("partition: time " + std::to_string(t) +
                              " outside horizon");
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<int>(it - nodes_.begin()) - 1;
  }

 private:
  std::vector<double> nodes_;
};

/// Test-action schedule attached to a uniform partition.  Every interior node
/// tau_i (i = 1..m-1) is preceded by a window [tau_i', tau_i] of relative
/// length eps, split into n equal test slots with boundaries
/// tau_{i,j}' = tau_i' + j (tau_i - tau_i') / n, j = 0..n.  The final block
/// carries no window: there is no later node at which its tests would be
/// evaluated.
class TestSchedule {
 public:
  TestSchedule(const Partition& part, double eps, int n_tests) {
    if (!(eps > 0.0 && eps < 1.0))
      throw ConfigError("test schedule: eps must lie in (0, 1)");
    if (n_tests < 1) throw ConfigError("test schedule: need >= 1 test slot");
    if (!part.is_uniform())
      throw ConfigError("test schedule: partition must be uniform");
    eps_ = eps;
    n_tests_ = n_tests;
    const double win = eps * part.diam();
    const int m = part.blocks();
    starts_.reserve(static_cast<std::size_t>(std::max(0, m - 1)));
    sub_.reserve(starts_.capacity());
    for (int i = 1; i < m; ++i) {
      const double tau = part.node(i);
      const double start = tau - win;
      starts_.push_back(start);
      std::vector<double> s(static_cast<std::size_t>(n_tests) + 1);
      for (int j = 0; j <= n_tests; ++j)
        s[static_cast<std::size_t>(j)] = start + j * (tau - start) / n_tests;
      s.back() = tau;  // exact by construction; keep it bitwise so
      s.front() = start;
      sub_.push_back(std::move(s));
    }
  }

  double eps() const { return eps_; }
  int n_tests() const { return n_tests_; }

  /// Number of nodes that carry a test window (= blocks - 1).
  int windows() const { return static_cast<int>(starts_.size()); }

  /// tau_i' for an interior node index i in [1, blocks-1].
  double window_start(int i) const { return starts_.at(index(i)); }

  /// tau_{i,j}' for i in [1, blocks-1], j in [0, n_tests].
  double sub_instant(int i, int j) const {
    return sub_.at(index(i)).at(static_cast<std::size_t>(j));
  }

  const std::vector<double>& sub_instants(int i) const {
    return sub_.at(index(i));
  }

 private:
  std::size_t index(int i) const {
    if (i < 1 || i > windows())
      throw std::out_of_range("test schedule: node index " +
                              std::to_string(i) + " has no window");
    return static_cast<std::size_t>(i - 1);
  }

  double eps_ = 0.0;
  int n_tests_ = 0;
  std::vector<double> starts_;            // tau_i',  i = 1..m-1
  std::vector<std::vector<double>> sub_;  // tau_{i,j}', j = 0..n
};

}  // namespace guarctl
