#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "guarctl/common.hpp"

namespace guarctl {

/// Sampled trajectory: strictly increasing sample times with one state per
/// sample.  Queries between samples interpolate linearly; `sample_at`
/// requires an exact stored sample and is what the identification machinery
/// uses, so integrators must record every instant later code will ask for.
class Trajectory {
 public:
  Trajectory() = default;

  Trajectory(double t, Vec x) { push(t, std::move(x)); }

  void push(double t, Vec x) {
    if (!times_.empty()) {
      if (!(t > times_.back()))
        throw std::invalid_argument("trajectory: samples must advance in time");
      if (x.size() != states_.front().size())
        throw std::invalid_argument("trajectory: state dimension changed");
    }
    times_.push_back(t);
    states_.push_back(std::move(x));
  }

  /// Append a later segment whose first sample repeats our last one.
  void append(const Trajectory& tail) {
    if (tail.empty()) return;
    std::size_t k = 0;
    if (!empty()) {
      if (same_instant(tail.times_.front(), times_.back()))
        k = 1;  // shared boundary sample
      else if (!(tail.times_.front() > times_.back()))
        throw std::invalid_argument("trajectory: appended segment overlaps");
    }
    for (; k < tail.times_.size(); ++k) push(tail.times_[k], tail.states_[k]);
  }

  bool empty() const { return times_.empty(); }
  std::size_t size() const { return times_.size(); }
  int dim() const { return empty() ? 0 : static_cast<int>(states_.front().size()); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& states() const { return states_; }
  double front_time() const { return times_.front(); }
  double back_time() const { return times_.back(); }
  const Vec& front_state() const { return states_.front(); }
  const Vec& back_state() const { return states_.back(); }

  /// State at time t by linear interpolation between adjacent samples.
  Vec state_at(double t) const {
    const std::size_t j = locate(t);
    if (same_instant(t, times_[j])) return states_[j];
    if (j + 1 >= times_.size() || t > times_[j + 1])
      throw std::out_of_range("trajectory: time outside sampled range");
    const double w = (t - times_[j]) / (times_[j + 1] - times_[j]);
    Vec out(states_[j].size());
    for (std::size_t a = 0; a < out.size(); ++a)
      out[a] = (1.0 - w) * states_[j][a] + w * states_[j + 1][a];
    return out;
  }

  /// Stored sample at exactly time t (up to round-off); throws if the
  /// integrator never recorded that instant.
  const Vec& sample_at(double t) const {
    const std::size_t j = locate(t);
    if (same_instant(t, times_[j])) return states_[j];
    if (j + 1 < times_.size() && same_instant(t, times_[j + 1]))
      return states_[j + 1];
    throw std::out_of_range("trajectory: no sample recorded at t = " +
                            std::to_string(t));
  }

  bool has_sample_at(double t) const {
    if (empty() || t < times_.front() - instant_tol(t) ||
        t > times_.back() + instant_tol(t))
      return false;
    const std::size_t j = locate(t);
    return same_instant(t, times_[j]) ||
           (j + 1 < times_.size() && same_instant(t, times_[j + 1]));
  }

 private:
  static double instant_tol(double t) {
    return 1e-12 * std::max(1.0, std::abs(t));
  }

  static bool same_instant(double a, double b) {
    return std::abs(a - b) <= instant_tol(std::max(std::abs(a), std::abs(b)));
  }

  // Index of the last sample with time <= t (clamped to a valid index).
  std::size_t locate(double t) const {
    if (empty()) throw std::out_of_range("trajectory: empty");
    if (t < times_.front() - instant_tol(t) ||
        t > times_.back() + instant_tol(t))
      throw std::out_of_range("trajectory: time " + std::to_string(t) +
                              " outside sampled range");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return 0;
    return static_cast<std::size_t>(it - times_.begin()) - 1;
  }

  std::vector<double> times_;
  std::vector<Vec> states_;
};

/// Uniform distance between two trajectories over the intersection of their
/// time ranges, sampled at the union of their sample times.
inline double sup_distance(const Trajectory& a, const Trajectory& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("sup_distance: dimension mismatch");
  const double lo = std::max(a.front_time(), b.front_time());
  const double hi = std::min(a.back_time(), b.back_time());
  if (!(lo <= hi))
    throw std::invalid_argument("sup_distance: disjoint time ranges");
  std::vector<double> grid;
  for (double t : a.times())
    if (t >= lo && t <= hi) grid.push_back(t);
  for (double t : b.times())
    if (t >= lo && t <= hi) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  double worst = 0.0;
  for (double t : grid) {
    const Vec xa = a.state_at(t), xb = b.state_at(t);
    worst = std::max(worst, distance(xa, xb));
  }
  return worst;
}

}  // namespace guarctl
