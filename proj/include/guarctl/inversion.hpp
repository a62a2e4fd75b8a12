#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "guarctl/dynamics.hpp"
#include "guarctl/partition.hpp"
#include "guarctl/trajectory.hpp"

namespace guarctl {

/// Divided difference of an observed motion over one test slot.
inline Vec divided_difference(const Trajectory& x, double t_lo, double t_hi) {
  const Vec& a = x.sample_at(t_lo);
  const Vec& b = x.sample_at(t_hi);
  if (!(t_hi > t_lo))
    throw std::invalid_argument("divided difference: zero-length slot");
  Vec d(a.size());
  for (std::size_t k = 0; k < d.size(); ++k)
    d[k] = (b[k] - a[k]) / (t_hi - t_lo);
  return d;
}

/// Slot slopes of the test window preceding node i: one divided difference
/// per test slot [tau_{i,j-1}', tau_{i,j}'], j = 1..n.  The motion must carry
/// exact samples at every slot boundary.
inline std::vector<Vec> divided_differences(const Trajectory& x,
                                            const TestSchedule& sched, int i) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(sched.n_tests()));
  for (int j = 1; j <= sched.n_tests(); ++j)
    out.push_back(
        divided_difference(x, sched.sub_instant(i, j - 1), sched.sub_instant(i, j)));
  return out;
}

/// Result of dynamic inversion: the surrogate disturbance point, its index in
/// the disturbance enumeration and the achieved worst-slot residual.
struct SurrogateResult {
  int index = -1;
  Vec point;
  double mismatch = 0.0;
};

/// Pick the constant disturbance whose model response best explains the
/// observed slot slopes: minimize over enumerated v the worst (over test
/// slots j) distance between slope d_j and f(t, x, u_j, v).  Ties keep the
/// earliest enumerated point.
inline SurrogateResult identify_surrogate(const Dynamics& dyn, double t,
                                          std::span<const double> x,
                                          const std::vector<Vec>& test_controls,
                                          const std::vector<Vec>& slopes) {
  if (test_controls.empty() || test_controls.size() != slopes.size())
    throw std::invalid_argument("identify_surrogate: slope/test count mismatch");
  const std::vector<Vec>& candidates = dyn.disturbance_set.enumerate();
  Vec img(static_cast<std::size_t>(dyn.state_dim));
  SurrogateResult best;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    double worst = 0.0;
    for (std::size_t j = 0; j < test_controls.size(); ++j) {
      dyn.eval(t, x, test_controls[j], candidates[k], img);
      worst = std::max(worst, distance(slopes[j], img));
    }
    if (best.index < 0 || worst < best.mismatch) {
      best.index = static_cast<int>(k);
      best.point = candidates[k];
      best.mismatch = worst;
    }
  }
  return best;
}

/// Single-test variant used when the probing control is simply the control
/// already applied on the previous block.
inline SurrogateResult identify_surrogate_single(const Dynamics& dyn, double t,
                                                 std::span<const double> x,
                                                 std::span<const double> u_prev,
                                                 const Vec& slope) {
  return identify_surrogate(dyn, t, x, {Vec(u_prev.begin(), u_prev.end())},
                            {slope});
}

/// Partition of the enumerated disturbance set by the image v -> f(t, x, u, v):
/// two points share a class when their images agree within `tol`.
struct QuotientClasses {
  std::vector<Vec> points;                // enumerated disturbance points
  std::vector<int> class_of;              // point index -> class index
  std::vector<std::vector<int>> classes;  // class index -> member indices
  double tol = 0.0;
};

/// Compute the image-equivalence classes at (t, x, u).  A non-positive
/// `tol_f` requests the default tolerance 1e-9 * (1 + max image norm).
inline QuotientClasses quotient_classes(const Dynamics& dyn, double t,
                                        std::span<const double> x,
                                        std::span<const double> u,
                                        double tol_f = -1.0) {
  QuotientClasses q;
  q.points = dyn.disturbance_set.enumerate();
  std::vector<Vec> images;
  images.reserve(q.points.size());
  double scale = 0.0;
  for (const Vec& v : q.points) {
    images.push_back(dyn.eval(t, x, u, v));
    scale = std::max(scale, norm(images.back()));
  }
  q.tol = tol_f > 0.0 ? tol_f : 1e-9 * (1.0 + scale);
  q.class_of.assign(q.points.size(), -1);
  std::vector<Vec> leaders;  // image of each class' first member
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    int home = -1;
    for (std::size_t c = 0; c < leaders.size(); ++c)
      if (distance(images[k], leaders[c]) <= q.tol) {
        home = static_cast<int>(c);
        break;
      }
    if (home < 0) {
      home = static_cast<int>(leaders.size());
      leaders.push_back(images[k]);
      q.classes.emplace_back();
    }
    q.class_of[k] = home;
    q.classes[static_cast<std::size_t>(home)].push_back(static_cast<int>(k));
  }
  return q;
}

/// A (time, state) probe point for the structural checks.
struct TimeState {
  double t = 0.0;
  Vec x;
};

/// A probe point carrying a shift direction as well.
struct ShiftSample {
  double t = 0.0;
  Vec x;
  Vec s;
};

/// Outcome of a structural check, serializable as key=value lines.
struct CheckReport {
  std::string check;
  bool pass = true;
  std::vector<std::pair<std::string, std::string>> fields;

  void add(std::string key, std::string value) {
    fields.emplace_back(std::move(key), std::move(value));
  }

  void add(std::string key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    add(std::move(key), std::string(buf));
  }

  std::string to_text() const {
    std::string out = "check=" + check + "\n";
    out += std::string("result=") + (pass ? "pass" : "fail") + "\n";
    for (const auto& [k, v] : fields) out += k + "=" + v + "\n";
    return out;
  }
};

namespace detail {

inline std::string format_point(std::span<const double> p) {
  std::string out = "(";
  char buf[40];
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p[i]);
    if (i) out += ", ";
    out += buf;
  }
  return out + ")";
}

// Shared core of the two identifiability checks: does the common refinement
// of the classes induced by `test_set` refine the classes induced by every
// control in `targets`, at every probe point?  On failure a witness
// (t, x, u, v, v') is recorded: v and v' are test-indistinguishable yet give
// different images under u.
inline bool refinement_holds(const Dynamics& dyn,
                             const std::vector<Vec>& test_set,
                             const std::vector<Vec>& targets,
                             const std::vector<TimeState>& samples,
                             double tol_f, CheckReport& report) {
  for (const TimeState& ts : samples) {
    std::vector<QuotientClasses> test_q;
    test_q.reserve(test_set.size());
    for (const Vec& tu : test_set)
      test_q.push_back(quotient_classes(dyn, ts.t, ts.x, tu, tol_f));
    const std::size_t m = test_q.front().points.size();
    for (const Vec& u : targets) {
      const QuotientClasses qu = quotient_classes(dyn, ts.t, ts.x, u, tol_f);
      for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t k2 = 0; k2 < m; ++k2) {
          if (k2 == k) continue;
          bool same_under_tests = true;
          for (const QuotientClasses& tq : test_q)
            if (tq.class_of[k] != tq.class_of[k2]) {
              same_under_tests = false;
              break;
            }
          if (same_under_tests && qu.class_of[k] != qu.class_of[k2]) {
            report.pass = false;
            report.add("witness_t", ts.t);
            report.add("witness_x", format_point(ts.x));
            report.add("witness_u", format_point(u));
            report.add("witness_v", format_point(qu.points[k]));
            report.add("witness_v_alias", format_point(qu.points[k2]));
            return false;
          }
        }
      }
    }
  }
  return true;
}

}  // namespace detail

/// Check that the finite test set separates disturbances at least as finely
/// as every enumerated control does, at each probe point.
inline CheckReport check_assumption1(const Dynamics& dyn,
                                     const std::vector<Vec>& test_set,
                                     const std::vector<TimeState>& samples,
                                     double tol_f = -1.0) {
  if (test_set.empty())
    throw std::invalid_argument("check_assumption1: empty test set");
  CheckReport report;
  report.check = "assumption1";
  report.add("samples", static_cast<double>(samples.size()));
  report.add("tests", static_cast<double>(test_set.size()));
  detail::refinement_holds(dyn, test_set, dyn.control_set.enumerate(),
                           samples, tol_f, report);
  return report;
}

/// Check the two conditions that let the previous control double as the test
/// action: (a) at each probe (t, x, s) and each disturbance, some point of
/// `pbar` attains the minimum of <s, f(t, x, ., v)> over the enumerated
/// control set; (b) probing with the controls in `pbar` separates
/// disturbances at least as finely as any enumerated control does.
inline CheckReport check_assumption2(const Dynamics& dyn,
                                     const std::vector<Vec>& pbar,
                                     const std::vector<ShiftSample>& samples,
                                     double tol_f = -1.0) {
  if (pbar.empty())
    throw std::invalid_argument("check_assumption2: empty control subset");
  CheckReport report;
  report.check = "assumption2";
  report.add("samples", static_cast<double>(samples.size()));
  report.add("subset_size", static_cast<double>(pbar.size()));

  // (a) pbar attains the extremal shift minimum.
  for (const ShiftSample& ss : samples) {
    for (const Vec& v : dyn.disturbance_set.enumerate()) {
      double full_min = 0.0;
      bool first = true;
      for (const Vec& u : dyn.control_set.enumerate()) {
        const double val = dot(ss.s, dyn.eval(ss.t, ss.x, u, v));
        if (first || val < full_min) full_min = val;
        first = false;
      }
      double sub_min = 0.0;
      first = true;
      for (const Vec& u : pbar) {
        const double val = dot(ss.s, dyn.eval(ss.t, ss.x, u, v));
        if (first || val < sub_min) sub_min = val;
        first = false;
      }
      const double slack =
          tol_f > 0.0 ? tol_f : 1e-9 * (1.0 + std::abs(full_min));
      if (sub_min > full_min + slack) {
        report.pass = false;
        report.add("condition", "a");
        report.add("witness_t", ss.t);
        report.add("witness_x", detail::format_point(ss.x));
        report.add("witness_s", detail::format_point(ss.s));
        report.add("witness_v", detail::format_point(v));
        report.add("subset_min", sub_min);
        report.add("full_min", full_min);
        return report;
      }
    }
  }

  // (b) probing with pbar separates as finely as any enumerated control.
  std::vector<TimeState> probes;
  probes.reserve(samples.size());
  for (const ShiftSample& ss : samples) probes.push_back({ss.t, ss.x});
  std::vector<Vec> targets = dyn.control_set.enumerate();
  targets.insert(targets.end(), pbar.begin(), pbar.end());
  CheckReport sub;
  if (!detail::refinement_holds(dyn, pbar, targets, probes, tol_f, sub)) {
    report.pass = false;
    report.add("condition", "b");
    for (auto& kv : sub.fields) report.fields.push_back(std::move(kv));
  }
  return report;
}

/// Saddle-point check for the instantaneous game <s, f(t, x, u, v)>:
/// reports the worst gap min_u max_v - max_v min_u over the probe points and
/// passes when it stays within `tol`.
inline CheckReport check_saddle(const Dynamics& dyn,
                                const std::vector<ShiftSample>& samples,
                                double tol) {
  CheckReport report;
  report.check = "saddle";
  report.add("samples", static_cast<double>(samples.size()));
  double worst = 0.0;
  const ShiftSample* worst_at = nullptr;
  for (const ShiftSample& ss : samples) {
    const auto& us = dyn.control_set.enumerate();
    const auto& vs = dyn.disturbance_set.enumerate();
    std::vector<double> vals(us.size() * vs.size());
    for (std::size_t i = 0; i < us.size(); ++i)
      for (std::size_t j = 0; j < vs.size(); ++j)
        vals[i * vs.size() + j] = dot(ss.s, dyn.eval(ss.t, ss.x, us[i], vs[j]));
    double minmax = 0.0;
    for (std::size_t i = 0; i < us.size(); ++i) {
      double mx = vals[i * vs.size()];
      for (std::size_t j = 1; j < vs.size(); ++j)
        mx = std::max(mx, vals[i * vs.size() + j]);
      minmax = i == 0 ? mx : std::min(minmax, mx);
    }
    double maxmin = 0.0;
    for (std::size_t j = 0; j < vs.size(); ++j) {
      double mn = vals[j];
      for (std::size_t i = 1; i < us.size(); ++i)
        mn = std::min(mn, vals[i * vs.size() + j]);
      maxmin = j == 0 ? mn : std::max(maxmin, mn);
    }
    const double gap = minmax - maxmin;
    if (worst_at == nullptr || gap > worst) {
      worst = gap;
      worst_at = &ss;
    }
  }
  report.add("worst_gap", worst);
  if (worst_at != nullptr) {
    report.add("worst_t", worst_at->t);
    report.add("worst_x", detail::format_point(worst_at->x));
  }
  report.pass = worst <= tol;
  return report;
}

}  // namespace guarctl
