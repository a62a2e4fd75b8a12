#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "guarctl/oracle.hpp"
#include "guarctl/strategies.hpp"

namespace guarctl {

/// Seeded generator with a pinned engine and pinned mappings, so streams are
/// reproducible across platforms and standard library versions.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate (> 0), via inversion.
  double exponential(double rate) {
    return -std::log1p(-uniform01()) / rate;
  }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    const auto k = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

 private:
  std::mt19937_64 eng_;
};

/// Adaptive disturbance that plays, on every block, the enumerated point
/// maximizing the one-block-ahead interpolated table value under the
/// control's best reply.  This is the natural grid adversary for closed-loop
/// evaluation; it needs no seed and adapts to whatever partition it is run on.
class AdversarialValuePolicy final : public DisturbancePolicy {
 public:
  AdversarialValuePolicy(Dynamics dyn, std::shared_ptr<const ValueTable> table)
      : dyn_(std::move(dyn)), table_(std::move(table)) {
    if (!table_) throw ConfigError("adversarial policy: null table");
  }

  std::string id() const override { return "adversarial"; }

  Signal next_block(const Trajectory& history, int i,
                    const Partition& part) override {
    const double t = part.node(i), tn = part.node(i + 1);
    const double dt = tn - t;
    const Vec& x = history.back_state();
    const auto& us = dyn_.control_set.enumerate();
    const auto& vs = dyn_.disturbance_set.enumerate();
    Vec dx(x.size()), xn(x.size());
    const Vec* best_v = nullptr;
    double best = 0.0;
    for (const Vec& v : vs) {
      double reply = 0.0;
      bool reply_set = false;
      for (const Vec& u : us) {
        dyn_.eval(t, x, u, v, dx);
        for (std::size_t a = 0; a < xn.size(); ++a) xn[a] = x[a] + dt * dx[a];
        const double val = table_->value(tn, xn);
        if (!reply_set || val < reply) {
          reply = val;
          reply_set = true;
        }
      }
      if (best_v == nullptr || reply > best) {
        best = reply;
        best_v = &v;
      }
    }
    return Signal::constant(t, tn, *best_v);
  }

 private:
  Dynamics dyn_;
  std::shared_ptr<const ValueTable> table_;
};

/// A named family of disturbance realizations.  Members hand out a fresh
/// policy per run, so one ensemble can be replayed against many strategies
/// and partitions.
struct DisturbanceEnsemble {
  struct Member {
    std::string id;
    std::function<std::unique_ptr<DisturbancePolicy>()> make;
  };

  std::string id;
  std::vector<Member> members;

  /// Fixed open-loop signals, one member each.
  static DisturbanceEnsemble open_loop(std::string id,
                                       std::vector<Signal> signals) {
    DisturbanceEnsemble e;
    e.id = std::move(id);
    for (std::size_t k = 0; k < signals.size(); ++k) {
      std::string mid = e.id + "/" + std::to_string(k);
      auto sig = std::make_shared<Signal>(std::move(signals[k]));
      e.members.push_back(
          {mid, [mid, sig] {
             return std::make_unique<SignalDisturbance>(mid, *sig);
           }});
    }
    return e;
  }

  /// Seeded bank of piecewise-constant signals over the enumerated
  /// disturbance points, with exponential(switch_rate) holding times.  The
  /// bank depends only on (count, switch_rate, seed) and the horizon — not
  /// on any partition — so refining the partition keeps the opposition fixed.
  static DisturbanceEnsemble random_bang_bang(const Dynamics& dyn, int count,
                                              double switch_rate,
                                              std::uint64_t seed) {
    if (count < 1) throw ConfigError("ensemble: count must be >= 1");
    if (!(switch_rate > 0.0))
      throw ConfigError("ensemble: switch rate must be > 0");
    const auto& vs = dyn.disturbance_set.enumerate();
    DeterministicRng rng(seed);
    std::vector<Signal> signals;
    signals.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      std::vector<double> starts{dyn.t0};
      std::vector<Vec> values{vs[rng.index(vs.size())]};
      double t = dyn.t0;
      for (;;) {
        t += std::max(rng.exponential(switch_rate), 1e-9);
        if (t >= dyn.theta - 1e-9) break;
        starts.push_back(t);
        values.push_back(vs[rng.index(vs.size())]);
      }
      signals.emplace_back(std::move(starts), std::move(values), dyn.theta);
    }
    DisturbanceEnsemble e =
        open_loop("bangbang[n=" + std::to_string(count) +
                      ",seed=" + std::to_string(seed) + "]",
                  std::move(signals));
    return e;
  }

  /// Single adaptive member playing against a value table.
  static DisturbanceEnsemble adversarial(const Dynamics& dyn,
                                         std::shared_ptr<const ValueTable> table) {
    DisturbanceEnsemble e;
    e.id = "adversarial";
    e.members.push_back({"adversarial", [dyn, table] {
                           return std::make_unique<AdversarialValuePolicy>(
                               dyn, table);
                         }});
    return e;
  }

  /// Union of two ensembles (member order: this, then other).
  DisturbanceEnsemble unite(const DisturbanceEnsemble& other,
                            std::string new_id) const {
    DisturbanceEnsemble e;
    e.id = std::move(new_id);
    e.members = members;
    e.members.insert(e.members.end(), other.members.begin(),
                     other.members.end());
    return e;
  }
};

/// Strategy factory usable across partitions: given the partition, build a
/// fresh feedback instance.
struct StrategyHandle {
  std::string id;
  double eps = 0.0;  // 0 when the strategy has no test window
  std::function<std::unique_ptr<FullMemoryFeedback>(const Partition&)> make;
};

struct MemberOutcome {
  std::string member;
  double cost = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string error;
};

/// Worst-case cost of a strategy over an ensemble on one partition.
struct ResultEstimate {
  std::string strategy;
  std::string ensemble;
  int blocks = 0;
  double diam = 0.0;
  double eps = 0.0;
  double sup_cost = std::numeric_limits<double>::quiet_NaN();
  std::string argmax_member;
  std::vector<MemberOutcome> members;
  bool all_ok = true;
};

namespace detail {

/// Static-stride index parallelism; results must be written by index so the
/// outcome is independent of the job count.
template <class Fn>
void parallel_for(std::size_t count, int jobs, const Fn& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(jobs), count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&fn, count, workers, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < count;
           i += static_cast<std::size_t>(workers))
        fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Run one strategy against every ensemble member and take the worst cost.
/// Member runs are independent (parallelizable); the supremum and the argmax
/// tie-break (earliest member) are evaluated serially in member order, so
/// the estimate does not depend on `jobs`.  Failed members are recorded with
/// their error and excluded from the supremum.
inline ResultEstimate estimate_guaranteed_result(
    const Dynamics& dyn, const TerminalFn& terminal,
    const StrategyHandle& strategy, const DisturbanceEnsemble& ensemble,
    const Partition& part, std::span<const double> z0, int substeps,
    int jobs = 1) {
  if (!terminal) throw ConfigError("estimate: missing terminal cost");
  if (ensemble.members.empty()) throw ConfigError("estimate: empty ensemble");
  ResultEstimate est;
  est.strategy = strategy.id;
  est.ensemble = ensemble.id;
  est.blocks = part.blocks();
  est.diam = part.diam();
  est.eps = strategy.eps;
  est.members.resize(ensemble.members.size());

  const Vec z(z0.begin(), z0.end());
  detail::parallel_for(
      ensemble.members.size(), jobs, [&](std::size_t k) {
        MemberOutcome& out = est.members[k];
        out.member = ensemble.members[k].id;
        try {
          auto feedback = strategy.make(part);
          auto policy = ensemble.members[k].make();
          const ClosedLoopRun run =
              simulate_closed_loop(dyn, part, *feedback, *policy, z, substeps);
          out.cost = terminal(run.x.back_state());
          out.ok = true;
        } catch (const std::exception& ex) {
          out.ok = false;
          out.error = ex.what();
        }
      });

  bool any = false;
  for (const MemberOutcome& out : est.members) {
    if (!out.ok) {
      est.all_ok = false;
      continue;
    }
    if (!any || out.cost > est.sup_cost) {
      est.sup_cost = out.cost;
      est.argmax_member = out.member;
      any = true;
    }
  }
  if (!any)
    throw NumericError("estimate: every ensemble member failed (" +
                       est.members.front().error + ")");
  return est;
}

/// Verdict on the guaranteed-result ordering
///   quasi <= previous-control <= finite-test <= full-test (within tol).
struct ChainReport {
  double gq = 0, gp = 0, gc = 0, gs = 0;
  double tol = 0;
  bool pass = true;
  std::vector<std::string> violations;

  std::string to_text() const {
    std::string out = "check=chain\n";
    out += std::string("result=") + (pass ? "pass" : "fail") + "\n";
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "gq=%.17g\ngp=%.17g\ngc=%.17g\ngs=%.17g\ntol=%.17g\n", gq,
                  gp, gc, gs, tol);
    out += buf;
    for (const std::string& v : violations) out += "violation=" + v + "\n";
    return out;
  }
};

/// Check the ordering of the four guaranteed-result estimates, each link up
/// to an additive tolerance that absorbs grid and sampling error.
inline ChainReport chain_check(double gq, double gp, double gc, double gs,
                               double tol) {
  if (!(tol >= 0.0)) throw ConfigError("chain check: negative tolerance");
  ChainReport r{gq, gp, gc, gs, tol, true, {}};
  auto link = [&r](const char* name, double lo, double hi) {
    if (lo > hi + r.tol) {
      r.pass = false;
      char buf[120];
      std::snprintf(buf, sizeof buf, "%s exceeds by %.17g", name, lo - hi);
      r.violations.emplace_back(buf);
    }
  };
  link("gq<=gp", gq, gp);
  link("gp<=gc", gp, gc);
  link("gc<=gs", gc, gs);
  return r;
}

/// One refinement step of a convergence study.
struct StudyPoint {
  double eps = 0.0;
  int blocks = 0;
  double diam = 0.0;
  ResultEstimate estimate;
};

/// A strategy family indexed by the accuracy parameter: (eps, partition) ->
/// fresh feedback.
using StrategyFamily =
    std::function<std::unique_ptr<FullMemoryFeedback>(double eps,
                                                      const Partition&)>;

struct StudySchedule {
  double eps = 0.0;
  int blocks = 0;
};

struct StudyResult {
  std::string strategy;
  std::vector<StudyPoint> points;
  double reference = 0.0;   // grid quasi-strategy value at the initial state
  double trend_tol = 0.0;   // declared approach tolerance
  double lb_tol = 0.0;      // declared lower-bound slack
  bool monotone = true;     // sup costs nonincreasing along the schedule
  bool approaches = true;   // final sup within trend_tol above the reference
  bool lower_bound_ok = true;  // no sup digs below reference - lb_tol
};

/// Evaluate a strategy family along a refinement schedule against one fixed
/// ensemble, and grade the sup-cost trend against the grid reference value.
inline StudyResult convergence_study(
    const Dynamics& dyn, const TerminalFn& terminal, const std::string& id,
    const StrategyFamily& family, const std::vector<StudySchedule>& schedule,
    const DisturbanceEnsemble& ensemble, std::span<const double> z0,
    int substeps, double reference, double trend_tol, double lb_tol,
    int jobs = 1) {
  if (schedule.empty()) throw ConfigError("study: empty schedule");
  StudyResult res;
  res.strategy = id;
  res.reference = reference;
  res.trend_tol = trend_tol;
  res.lb_tol = lb_tol;
  for (const StudySchedule& sc : schedule) {
    const Partition part = Partition::uniform(dyn.t0, dyn.theta, sc.blocks);
    StrategyHandle handle{
        id, sc.eps,
        [&family, eps = sc.eps](const Partition& p) { return family(eps, p); }};
    StudyPoint pt;
    pt.eps = sc.eps;
    pt.blocks = sc.blocks;
    pt.diam = part.diam();
    pt.estimate = estimate_guaranteed_result(dyn, terminal, handle, ensemble,
                                             part, z0, substeps, jobs);
    res.points.push_back(std::move(pt));
  }
  for (std::size_t k = 0; k + 1 < res.points.size(); ++k)
    if (res.points[k + 1].estimate.sup_cost > res.points[k].estimate.sup_cost)
      res.monotone = false;
  res.approaches =
      res.points.back().estimate.sup_cost - reference <= trend_tol;
  for (const StudyPoint& pt : res.points)
    if (pt.estimate.sup_cost < reference - lb_tol) res.lower_bound_ok = false;
  return res;
}

}  // namespace guarctl
