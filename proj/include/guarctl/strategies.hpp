#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "guarctl/integrate.hpp"
#include "guarctl/inversion.hpp"
#include "guarctl/oracle.hpp"
#include "guarctl/partition.hpp"
#include "guarctl/signal.hpp"

namespace guarctl {

/// Direction source for the extremal shift at (t, y-model state).
class ShiftOracle {
 public:
  virtual ~ShiftOracle() = default;
  virtual Vec shift(double t, std::span<const double> y) const = 0;
};

/// Shift direction = finite-difference gradient of a value table.
class ValueTableOracle final : public ShiftOracle {
 public:
  explicit ValueTableOracle(std::shared_ptr<const ValueTable> table)
      : table_(std::move(table)) {
    if (!table_) throw ConfigError("value oracle: null table");
  }

  Vec shift(double t, std::span<const double> y) const override {
    return value_shift_vector(*table_, t, y);
  }

  const ValueTable& table() const { return *table_; }

 private:
  std::shared_ptr<const ValueTable> table_;
};

/// Shift direction from a fixed callable (analytic gradients in tests).
class FunctionOracle final : public ShiftOracle {
 public:
  using Fn = std::function<Vec(double, std::span<const double>)>;
  explicit FunctionOracle(Fn fn) : fn_(std::move(fn)) {}
  Vec shift(double t, std::span<const double> y) const override {
    return fn_(t, y);
  }

 private:
  Fn fn_;
};

/// Extremal-shift choice: the candidate control minimizing <s, f(t,y,u,vbar)>.
struct ShiftChoice {
  int index = -1;
  Vec point;
  double value = 0.0;
};

/// Minimize the shifted derivative over a finite candidate list.  Ties keep
/// the earliest candidate, making the choice a pure function of the inputs.
inline ShiftChoice extremal_shift_argmin(const Dynamics& dyn, double t,
                                         std::span<const double> y,
                                         std::span<const double> s,
                                         std::span<const double> v_bar,
                                         const std::vector<Vec>& candidates) {
  if (candidates.empty())
    throw std::invalid_argument("extremal shift: empty candidate set");
  ShiftChoice best;
  Vec dx(y.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    dyn.eval(t, y, candidates[k], v_bar, dx);
    const double val = dot(s, dx);
    if (best.index < 0 || val < best.value) {
      best.index = static_cast<int>(k);
      best.point = candidates[k];
      best.value = val;
    }
  }
  return best;
}

/// Full-memory feedback: asked once per block, in order, for the control
/// signal to apply on [tau_i, tau_{i+1}).  `history` must be the realized
/// motion observed so far, sampled (exactly) at every instant the strategy's
/// schedule needs.  Implementations may keep internal state across blocks;
/// reset() rewinds to block 0.
class FullMemoryFeedback {
 public:
  virtual ~FullMemoryFeedback() = default;
  virtual std::string id() const = 0;
  virtual const Partition& partition() const = 0;
  virtual void reset() = 0;
  virtual Signal next_block(const Trajectory& history, int i) = 0;

  /// Identified surrogate disturbances, one entry per completed
  /// identification, as (time, point).  Empty for strategies that do not
  /// invert the dynamics.
  virtual const std::vector<std::pair<double, Vec>>& surrogate_log() const {
    static const std::vector<std::pair<double, Vec>> kEmpty;
    return kEmpty;
  }
};

/// Open-loop constant control presented as a feedback (baselines, tests).
class ConstantFeedback final : public FullMemoryFeedback {
 public:
  ConstantFeedback(Partition part, Vec u)
      : part_(std::move(part)), u_(std::move(u)) {}

  std::string id() const override { return "constant"; }
  const Partition& partition() const override { return part_; }
  void reset() override {}
  Signal next_block(const Trajectory&, int i) override {
    return Signal::constant(part_.node(i), part_.node(i + 1), u_);
  }

 private:
  Partition part_;
  Vec u_;
};

/// Configuration shared by the test-window identification strategies.
struct EpsilonStrategyConfig {
  double eps = 0.1;                // relative window length, in (0, 1)
  std::vector<Vec> test_controls;  // probing actions, one per test slot
  std::vector<Vec> shift_set;      // candidates for the extremal shift
  Vec u_star;                      // block-0 control (default: first of P)
  Vec v_star;                      // initial surrogate (default: first of Q)
  int model_substeps = 8;          // RK4 substeps for the online model
};

/// Identification strategy with explicit test actions.  Each block except
/// the last ends with a test window of relative length eps, split into one
/// slot per test control.  At every interior node the strategy
///   1. advances its online model with the previous useful control and the
///      previously identified surrogate disturbance,
///   2. reads the divided differences of the observed motion over the test
///      slots and picks the enumerated disturbance that best reproduces them,
///   3. applies the control minimizing <shift(t, y), f(t, y, u, vbar)> over
///      the shift set until the next test window opens.
/// With an infinite-cardinality control set the test controls are typically
/// an epsilon-net of it; with a finite separating subset (see
/// check_assumption1) the same machinery runs on that subset.
class UeFeedback final : public FullMemoryFeedback {
 public:
  UeFeedback(std::string id, Dynamics dyn, Partition part,
             std::shared_ptr<const ShiftOracle> oracle,
             EpsilonStrategyConfig cfg)
      : id_(std::move(id)),
        dyn_(std::move(dyn)),
        part_(std::move(part)),
        sched_(part_, cfg.eps, static_cast<int>(cfg.test_controls.size())),
        oracle_(std::move(oracle)),
        cfg_(std::move(cfg)) {
    dyn_.validate();
    if (!oracle_) throw ConfigError("strategy: missing shift oracle");
    if (cfg_.test_controls.empty())
      throw ConfigError("strategy: need at least one test control");
    if (cfg_.shift_set.empty())
      throw ConfigError("strategy: empty shift candidate set");
    if (cfg_.model_substeps < 1)
      throw ConfigError("strategy: model substeps must be >= 1");
    if (cfg_.u_star.empty()) cfg_.u_star = dyn_.control_set.enumerate().front();
    if (cfg_.v_star.empty())
      cfg_.v_star = dyn_.disturbance_set.enumerate().front();
  }

  std::string id() const override { return id_; }
  const Partition& partition() const override { return part_; }

  void reset() override {
    next_i_ = 0;
    y_ = Trajectory();
    vbar_log_.clear();
  }

  Signal next_block(const Trajectory& history, int i) override {
    if (i != next_i_)
      throw std::logic_error("strategy: blocks must be requested in order");
    const double tau = part_.node(i);
    if (i == 0) {
      y_ = Trajectory(part_.t0(), history.sample_at(part_.t0()));
      u_prev_ = cfg_.u_star;
      v_prev_ = cfg_.v_star;
    } else {
      // Online model: previous useful control against the previous surrogate.
      y_.append(integrate_window(dyn_, part_.node(i - 1), tau, y_.back_state(),
                                 Signal::constant(part_.node(i - 1), tau, u_prev_),
                                 Signal::constant(part_.node(i - 1), tau, v_prev_),
                                 cfg_.model_substeps));
      const std::vector<Vec> d = divided_differences(history, sched_, i);
      const Vec& x_now = history.sample_at(tau);
      const SurrogateResult sur =
          identify_surrogate(dyn_, tau, x_now, cfg_.test_controls, d);
      v_prev_ = sur.point;
      vbar_log_.emplace_back(tau, sur.point);
      const Vec s = oracle_->shift(tau, y_.back_state());
      u_prev_ = extremal_shift_argmin(dyn_, tau, y_.back_state(), s, v_prev_,
                                      cfg_.shift_set)
                    .point;
    }
    ++next_i_;
    return emit(i);
  }

  const std::vector<std::pair<double, Vec>>& surrogate_log() const override {
    return vbar_log_;
  }

  const Trajectory& model_trajectory() const { return y_; }
  const TestSchedule& schedule() const { return sched_; }

 private:
  // Control on [tau_i, tau_{i+1}): the useful value, then — except on the
  // final block — the test actions across the window slots.
  Signal emit(int i) const {
    const double lo = part_.node(i), hi = part_.node(i + 1);
    if (i + 1 > sched_.windows())  // final block: no one will read the tests
      return Signal::constant(lo, hi, u_prev_);
    std::vector<double> starts{lo};
    std::vector<Vec> values{u_prev_};
    for (int j = 0; j < sched_.n_tests(); ++j) {
      starts.push_back(sched_.sub_instant(i + 1, j));
      values.push_back(cfg_.test_controls[static_cast<std::size_t>(j)]);
    }
    return Signal(std::move(starts), std::move(values), hi);
  }

  std::string id_;
  Dynamics dyn_;
  Partition part_;
  TestSchedule sched_;
  std::shared_ptr<const ShiftOracle> oracle_;
  EpsilonStrategyConfig cfg_;

  int next_i_ = 0;
  Trajectory y_;
  Vec u_prev_, v_prev_;
  std::vector<std::pair<double, Vec>> vbar_log_;
};

/// Configuration for the strategy that probes with its own previous control.
struct PreviousControlStrategyConfig {
  std::vector<Vec> pbar;  // admissible controls = shift candidates
  Vec u_star;             // block-0 control (default: first of pbar)
  Vec v_star;             // initial surrogate (default: first of Q)
  int model_substeps = 8;
};

/// Identification strategy without test windows.  The control is constant on
/// each block; at every node the divided difference of the observed motion
/// over the whole previous block is inverted against the control that was
/// actually applied, and the next control minimizes the shifted derivative
/// over the finite set pbar.  Sound when pbar both attains the extremal
/// shift minimum and separates disturbances (see check_assumption2).
class UstarFeedback final : public FullMemoryFeedback {
 public:
  UstarFeedback(std::string id, Dynamics dyn, Partition part,
                std::shared_ptr<const ShiftOracle> oracle,
                PreviousControlStrategyConfig cfg)
      : id_(std::move(id)),
        dyn_(std::move(dyn)),
        part_(std::move(part)),
        oracle_(std::move(oracle)),
        cfg_(std::move(cfg)) {
    dyn_.validate();
    if (!oracle_) throw ConfigError("strategy: missing shift oracle");
    if (cfg_.pbar.empty())
      throw ConfigError("strategy: empty admissible control set");
    if (cfg_.model_substeps < 1)
      throw ConfigError("strategy: model substeps must be >= 1");
    if (cfg_.u_star.empty()) cfg_.u_star = cfg_.pbar.front();
    if (cfg_.v_star.empty())
      cfg_.v_star = dyn_.disturbance_set.enumerate().front();
  }

  std::string id() const override { return id_; }
  const Partition& partition() const override { return part_; }

  void reset() override {
    next_i_ = 0;
    y_ = Trajectory();
    vbar_log_.clear();
  }

  Signal next_block(const Trajectory& history, int i) override {
    if (i != next_i_)
      throw std::logic_error("strategy: blocks must be requested in order");
    const double tau = part_.node(i);
    if (i == 0) {
      y_ = Trajectory(part_.t0(), history.sample_at(part_.t0()));
      u_prev_ = cfg_.u_star;
      v_prev_ = cfg_.v_star;
    } else {
      const double tau_prev = part_.node(i - 1);
      y_.append(integrate_window(dyn_, tau_prev, tau, y_.back_state(),
                                 Signal::constant(tau_prev, tau, u_prev_),
                                 Signal::constant(tau_prev, tau, v_prev_),
                                 cfg_.model_substeps));
      const Vec slope = divided_difference(history, tau_prev, tau);
      const Vec& x_now = history.sample_at(tau);
      const SurrogateResult sur =
          identify_surrogate_single(dyn_, tau, x_now, u_prev_, slope);
      v_prev_ = sur.point;
      vbar_log_.emplace_back(tau, sur.point);
      const Vec s = oracle_->shift(tau, y_.back_state());
      u_prev_ = extremal_shift_argmin(dyn_, tau, y_.back_state(), s, v_prev_,
                                      cfg_.pbar)
                    .point;
    }
    ++next_i_;
    return Signal::constant(tau, part_.node(i + 1), u_prev_);
  }

  const std::vector<std::pair<double, Vec>>& surrogate_log() const override {
    return vbar_log_;
  }

  const Trajectory& model_trajectory() const { return y_; }

 private:
  std::string id_;
  Dynamics dyn_;
  Partition part_;
  std::shared_ptr<const ShiftOracle> oracle_;
  PreviousControlStrategyConfig cfg_;

  int next_i_ = 0;
  Trajectory y_;
  Vec u_prev_, v_prev_;
  std::vector<std::pair<double, Vec>> vbar_log_;
};

/// Block-level disturbance source for closed-loop runs: either a fixed
/// open-loop signal or an adaptive policy reacting to the observed history.
class DisturbancePolicy {
 public:
  virtual ~DisturbancePolicy() = default;
  virtual std::string id() const = 0;
  virtual void reset() {}
  virtual Signal next_block(const Trajectory& history, int i,
                            const Partition& part) = 0;
};

/// Open-loop signal presented block by block.
class SignalDisturbance final : public DisturbancePolicy {
 public:
  SignalDisturbance(std::string id, Signal sig)
      : id_(std::move(id)), sig_(std::move(sig)) {}

  std::string id() const override { return id_; }
  Signal next_block(const Trajectory&, int i, const Partition& part) override {
    return sig_.window(part.node(i), part.node(i + 1));
  }

  const Signal& signal() const { return sig_; }

 private:
  std::string id_;
  Signal sig_;
};

/// Outcome of one closed-loop run.
struct ClosedLoopRun {
  Trajectory x;  // realized motion, sampled at all integrator steps
  Signal u;      // realized control
  Signal v;      // realized disturbance
};

/// Drive a feedback against a disturbance policy over a partition.  Per
/// block: the feedback sees the realized history up to tau_i and commits its
/// control signal first, then the disturbance block is drawn and the plant
/// is integrated across the block.  The applied control is exactly the
/// feedback's output, making runs reproducible bit for bit.
inline ClosedLoopRun simulate_closed_loop(const Dynamics& dyn,
                                          const Partition& part,
                                          FullMemoryFeedback& feedback,
                                          DisturbancePolicy& disturbance,
                                          std::span<const double> z0,
                                          int substeps) {
  dyn.validate();
  if (z0.size() != static_cast<std::size_t>(dyn.state_dim))
    throw ConfigError("closed loop: initial state dimension mismatch");
  if (feedback.partition().blocks() != part.blocks() ||
      std::abs(feedback.partition().t0() - part.t0()) > 1e-12 ||
      std::abs(feedback.partition().theta() - part.theta()) > 1e-12)
    throw ConfigError("closed loop: feedback built for a different partition");

  feedback.reset();
  disturbance.reset();
  Trajectory hist(part.t0(), Vec(z0.begin(), z0.end()));
  SignalBuilder ub, vb;
  for (int i = 0; i < part.blocks(); ++i) {
    const Signal ui = feedback.next_block(hist, i);
    const Signal vi = disturbance.next_block(hist, i, part);
    hist.append(integrate_window(dyn, part.node(i), part.node(i + 1),
                                 hist.back_state(), ui, vi, substeps));
    ub.append(ui);
    vb.append(vi);
  }
  return {std::move(hist), ub.build(), vb.build()};
}

/// Convenience overload for a fixed open-loop disturbance signal.
inline ClosedLoopRun simulate_closed_loop(const Dynamics& dyn,
                                          const Partition& part,
                                          FullMemoryFeedback& feedback,
                                          const Signal& v,
                                          std::span<const double> z0,
                                          int substeps) {
  SignalDisturbance pol("signal", v);
  return simulate_closed_loop(dyn, part, feedback, pol, z0, substeps);
}

/// Test-window strategy whose test actions form an eps-net of the control
/// set (the general case).
inline std::unique_ptr<FullMemoryFeedback> make_ue_strategy(
    Dynamics dyn, Partition part, std::shared_ptr<const ShiftOracle> oracle,
    EpsilonStrategyConfig cfg) {
  return std::make_unique<UeFeedback>("ue", std::move(dyn), std::move(part),
                                      std::move(oracle), std::move(cfg));
}

/// Test-window strategy probing with a fixed finite test set (sound when the
/// set separates disturbances; see check_assumption1).
inline std::unique_ptr<FullMemoryFeedback> make_ubar_strategy(
    Dynamics dyn, Partition part, std::shared_ptr<const ShiftOracle> oracle,
    EpsilonStrategyConfig cfg) {
  return std::make_unique<UeFeedback>("ubar", std::move(dyn), std::move(part),
                                      std::move(oracle), std::move(cfg));
}

/// Window-free strategy probing with its own previous control (sound under
/// the conditions of check_assumption2).
inline std::unique_ptr<FullMemoryFeedback> make_ustar_strategy(
    Dynamics dyn, Partition part, std::shared_ptr<const ShiftOracle> oracle,
    PreviousControlStrategyConfig cfg) {
  return std::make_unique<UstarFeedback>("ustar", std::move(dyn),
                                         std::move(part), std::move(oracle),
                                         std::move(cfg));
}

}  // namespace guarctl
