#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "guarctl/common.hpp"

namespace guarctl {

/// Piecewise-constant vector signal on [t0, theta].  Stored as breakpoint
/// start times (first one = t0) plus the value holding from each breakpoint
/// until the next; intervals are right-open, and the final value also holds
/// at t = theta.
class Signal {
 public:
  Signal(std::vector<double> starts, std::vector<Vec> values, double end)
      : starts_(std::move(starts)), values_(std::move(values)), end_(end) {
    if (starts_.empty() || starts_.size() != values_.size())
      throw ConfigError("signal: breakpoint/value count mismatch");
    for (std::size_t i = 0; i + 1 < starts_.size(); ++i)
      if (!(starts_[i] < starts_[i + 1]))
        throw ConfigError("signal: breakpoints must be strictly increasing");
    if (!(starts_.back() < end_))
      throw ConfigError("signal: last breakpoint must precede the end time");
    const std::size_t d = values_.front().size();
    if (d == 0) throw ConfigError("signal: zero-dimensional value");
    for (const Vec& v : values_)
      if (v.size() != d) throw ConfigError("signal: inconsistent value dims");
  }

  static Signal constant(double t0, double theta, Vec value) {
    return Signal({t0}, {std::move(value)}, theta);
  }

  int dim() const { return static_cast<int>(values_.front().size()); }
  double t0() const { return starts_.front(); }
  double end() const { return end_; }
  const std::vector<double>& starts() const { return starts_; }
  const std::vector<Vec>& values() const { return values_; }

  /// Value at time t (right-open pieces; t == end yields the last value).
  const Vec& value_at(double t) const {
    if (t < starts_.front() || t > end_)
      throw std::out_of_range("signal: time " + std::to_string(t) +
                              " outside domain");
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    return values_[static_cast<std::size_t>(it - starts_.begin()) - 1];
  }

  /// Restriction to [a, b] as a standalone signal.
  Signal window(double a, double b) const {
    if (a < starts_.front() || b > end_ || !(a < b))
      throw std::out_of_range("signal: window outside domain");
    std::vector<double> s{a};
    std::vector<Vec> v{value_at(a)};
    for (std::size_t i = 0; i < starts_.size(); ++i)
      if (starts_[i] > a && starts_[i] < b) {
        s.push_back(starts_[i]);
        v.push_back(values_[i]);
      }
    return Signal(std::move(s), std::move(v), b);
  }

  /// Breakpoints of this signal that fall inside (a, b), in order.
  std::vector<double> breaks_between(double a, double b) const {
    std::vector<double> out;
    for (double s : starts_)
      if (s > a && s < b) out.push_back(s);
    return out;
  }

 private:
  std::vector<double> starts_;
  std::vector<Vec> values_;
  double end_;
};

/// Incremental builder used when a run assembles a signal block by block.
class SignalBuilder {
 public:
  void append(const Signal& block) {
    for (std::size_t i = 0; i < block.starts().size(); ++i) {
      starts_.push_back(block.starts()[i]);
      values_.push_back(block.values()[i]);
    }
    end_ = block.end();
  }

  Signal build() const { return Signal(starts_, values_, end_); }

 private:
  std::vector<double> starts_;
  std::vector<Vec> values_;
  double end_ = 0.0;
};

}  // namespace guarctl
