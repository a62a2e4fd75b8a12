#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <memory>

#include <guarctl/example_bilinear.hpp>
#include <guarctl/strategies.hpp>

using namespace guarctl;

namespace {

// Analytic gradient of the benchmark value function (valid for x1 >= 0);
// good enough as a shift source wherever the tests drive the motion.
std::shared_ptr<const ShiftOracle> analytic_oracle() {
  return std::make_shared<FunctionOracle>(
      [](double t, std::span<const double>) {
        return Vec{-(1.0 - t), 1.0};
      });
}

bool same_signal(const Signal& a, const Signal& b) {
  return a.starts() == b.starts() && a.values() == b.values() &&
         a.end() == b.end();
}

bool in_list(const Vec& p, const std::vector<Vec>& list) {
  return std::find(list.begin(), list.end(), p) != list.end();
}

}  // namespace

TEST_CASE("extremal shift minimizes the shifted derivative", "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Vec y{0.5, 0.0};
  const Vec s{0.0, 1.0};
  const Vec v_bar{1.0, 1.0};
  const auto corners = bilinear_corner_controls();

  // <s, f> = 0.5 u2: minimized by u2 = -1, and the earliest such corner is
  // (-1,-1).
  const ShiftChoice c = extremal_shift_argmin(dyn, 0.0, y, s, v_bar, corners);
  REQUIRE(c.index == 0);
  REQUIRE(c.point == Vec{-1.0, -1.0});
  REQUIRE(c.value == Catch::Approx(-0.5));

  // A zero shift direction ties everything: keep the first candidate.
  const Vec s0{0.0, 0.0};
  REQUIRE(extremal_shift_argmin(dyn, 0.0, y, s0, v_bar, corners).index == 0);

  REQUIRE_THROWS_AS(extremal_shift_argmin(dyn, 0.0, y, s, v_bar, {}),
                    std::invalid_argument);
}

TEST_CASE("test-window strategy emits the documented block structure",
          "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 4);
  EpsilonStrategyConfig cfg;
  cfg.eps = 0.1;
  cfg.test_controls = {{1.0, 1.0}};
  cfg.shift_set = bilinear_corner_controls();
  cfg.u_star = {0.0, 0.0};
  UeFeedback fb("ue", dyn, part, analytic_oracle(), cfg);

  Trajectory hist(0.0, Vec{0.0, 0.0});
  const Signal block0 = fb.next_block(hist, 0);
  REQUIRE(block0.starts() == (std::vector<double>{0.0, 0.225}));
  REQUIRE(block0.values()[0] == Vec{0.0, 0.0});  // useful control
  REQUIRE(block0.values()[1] == Vec{1.0, 1.0});  // test action
  REQUIRE(block0.end() == 0.25);

  // Blocks must be requested in order.
  REQUIRE_THROWS_AS(fb.next_block(hist, 2), std::logic_error);
}

TEST_CASE("final block carries no test window", "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 3);
  EpsilonStrategyConfig cfg;
  cfg.eps = 0.2;
  cfg.test_controls = {{1.0, 1.0}};
  cfg.shift_set = bilinear_corner_controls();
  cfg.u_star = {1.0, 1.0};
  cfg.v_star = {1.0, 1.0};
  UeFeedback fb("ue", dyn, part, analytic_oracle(), cfg);

  const Signal v = Signal::constant(0.0, 1.0, {1.0, 1.0});
  const ClosedLoopRun run = simulate_closed_loop(dyn, part, fb, v, Vec{0.0, 0.0}, 8);
  // The realized control has one piece on the final block, two elsewhere.
  int pieces_in_last = 0;
  for (double s : run.u.starts())
    if (s >= part.node(2)) ++pieces_in_last;
  REQUIRE(pieces_in_last == 1);
}

TEST_CASE("strategy construction is validated", "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 4);
  EpsilonStrategyConfig cfg;
  cfg.eps = 0.1;
  cfg.test_controls = {{1.0, 1.0}};
  cfg.shift_set = bilinear_corner_controls();

  EpsilonStrategyConfig no_tests = cfg;
  no_tests.test_controls.clear();
  REQUIRE_THROWS_AS(UeFeedback("ue", dyn, part, analytic_oracle(), no_tests),
                    ConfigError);

  EpsilonStrategyConfig no_shift = cfg;
  no_shift.shift_set.clear();
  REQUIRE_THROWS_AS(UeFeedback("ue", dyn, part, analytic_oracle(), no_shift),
                    ConfigError);

  REQUIRE_THROWS_AS(UeFeedback("ue", dyn, part, nullptr, cfg), ConfigError);

  EpsilonStrategyConfig bad_eps = cfg;
  bad_eps.eps = 1.5;
  REQUIRE_THROWS_AS(UeFeedback("ue", dyn, part, analytic_oracle(), bad_eps),
                    ConfigError);

  PreviousControlStrategyConfig pc;
  REQUIRE_THROWS_AS(UstarFeedback("ustar", dyn, part, analytic_oracle(), pc),
                    ConfigError);
}

TEST_CASE("closed loop with a constant feedback matches open-loop integration",
          "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 4);
  ConstantFeedback fb(part, Vec{0.7, -0.3});
  const Signal v = Signal::constant(0.0, 1.0, {1.0, 1.0});
  const Vec z0{0.1, 0.2};

  // Two RK4 substeps per quarter-length block walk the same 0.125-step grid
  // as eight substeps over the whole horizon, so the state sequences agree
  // bit for bit.
  const ClosedLoopRun run = simulate_closed_loop(dyn, part, fb, v, z0, 2);
  const Signal u = Signal::constant(0.0, 1.0, {0.7, -0.3});
  const Trajectory direct = integrate(dyn, z0, u, v, 8);

  REQUIRE(sup_distance(run.x, direct) == 0.0);
  REQUIRE(run.x.back_time() == 1.0);
  REQUIRE(run.u.value_at(0.99) == Vec{0.7, -0.3});
}

TEST_CASE("closed-loop runs are deterministic", "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 10);
  const Signal v({0.0, 0.33, 0.71}, {{1.0, 1.0}, {-1.0, 1.0}, {1.0, -1.0}}, 1.0);
  const Vec z0{0.0, 0.0};

  EpsilonStrategyConfig cfg;
  cfg.eps = 0.1;
  cfg.test_controls = {{1.0, 1.0}};
  cfg.shift_set = bilinear_corner_controls();
  cfg.u_star = {1.0, 1.0};
  cfg.v_star = {1.0, 1.0};

  UeFeedback fb1("ue", dyn, part, analytic_oracle(), cfg);
  UeFeedback fb2("ue", dyn, part, analytic_oracle(), cfg);
  const ClosedLoopRun a = simulate_closed_loop(dyn, part, fb1, v, z0, 8);
  const ClosedLoopRun b = simulate_closed_loop(dyn, part, fb2, v, z0, 8);

  REQUIRE(a.x.times() == b.x.times());
  REQUIRE(a.x.states() == b.x.states());
  REQUIRE(same_signal(a.u, b.u));
  REQUIRE(same_signal(a.v, b.v));

  // Rerunning the same feedback object resets it and reproduces the run.
  const ClosedLoopRun c = simulate_closed_loop(dyn, part, fb1, v, z0, 8);
  REQUIRE(c.x.states() == a.x.states());
}

TEST_CASE("feedback cannot anticipate the disturbance", "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 10);
  const Vec z0{0.0, 0.0};

  EpsilonStrategyConfig cfg;
  cfg.eps = 0.1;
  cfg.test_controls = {{1.0, 1.0}};
  cfg.shift_set = bilinear_corner_controls();
  cfg.u_star = {1.0, 1.0};
  cfg.v_star = {1.0, 1.0};

  // Two disturbances that agree up to tau_5 = 0.5 and split afterwards.
  const Signal vA = Signal::constant(0.0, 1.0, {1.0, 1.0});
  const Signal vB({0.0, 0.5}, {{1.0, 1.0}, {-1.0, -1.0}}, 1.0);

  UeFeedback fbA("ue", dyn, part, analytic_oracle(), cfg);
  UeFeedback fbB("ue", dyn, part, analytic_oracle(), cfg);
  const ClosedLoopRun a = simulate_closed_loop(dyn, part, fbA, vA, z0, 8);
  const ClosedLoopRun b = simulate_closed_loop(dyn, part, fbB, vB, z0, 8);

  // Identical histories on [0, 0.5] force identical motions there...
  for (std::size_t i = 0; i < a.x.times().size(); ++i) {
    if (a.x.times()[i] > 0.5) break;
    REQUIRE(a.x.times()[i] == b.x.times()[i]);
    REQUIRE(a.x.states()[i] == b.x.states()[i]);
  }
  // ...and identical controls through block 5, which was decided at 0.5.
  REQUIRE(same_signal(a.u.window(0.0, 0.6), b.u.window(0.0, 0.6)));
}

TEST_CASE("emitted controls stay in the configured sets", "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 8);
  const Signal v({0.0, 0.4}, {{1.0, 1.0}, {-1.0, 1.0}}, 1.0);

  EpsilonStrategyConfig cfg;
  cfg.eps = 0.05;
  cfg.test_controls = {{1.0, 1.0}, {-1.0, 1.0}};
  cfg.shift_set = bilinear_corner_controls();
  cfg.u_star = {1.0, 1.0};
  cfg.v_star = {1.0, 1.0};
  UeFeedback fb("ue", dyn, part, analytic_oracle(), cfg);

  const ClosedLoopRun run =
      simulate_closed_loop(dyn, part, fb, v, Vec{0.0, 0.0}, 8);

  std::vector<Vec> allowed = cfg.shift_set;
  allowed.insert(allowed.end(), cfg.test_controls.begin(),
                 cfg.test_controls.end());
  allowed.push_back(cfg.u_star);
  for (const Vec& val : run.u.values()) REQUIRE(in_list(val, allowed));
}

TEST_CASE("online model replays the committed controls and surrogates",
          "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 5);
  const Signal v({0.0, 0.6}, {{1.0, 1.0}, {1.0, -1.0}}, 1.0);
  const Vec z0{0.2, 0.0};

  EpsilonStrategyConfig cfg;
  cfg.eps = 0.1;
  cfg.test_controls = {{1.0, 1.0}};
  cfg.shift_set = bilinear_corner_controls();
  cfg.u_star = {1.0, 1.0};
  cfg.v_star = {1.0, 1.0};
  cfg.model_substeps = 8;
  UeFeedback fb("ue", dyn, part, analytic_oracle(), cfg);

  const ClosedLoopRun run = simulate_closed_loop(dyn, part, fb, v, z0, 8);
  const auto& log = fb.surrogate_log();
  REQUIRE(log.size() == 4);  // one identification per interior node

  // Rebuild the y-model from scratch: the useful control on block i is the
  // signal value at tau_i, the surrogate on block i is v_star for i = 0 and
  // the logged point thereafter.
  Trajectory y(part.t0(), z0);
  for (int i = 1; i < part.blocks(); ++i) {
    const double a = part.node(i - 1), b = part.node(i);
    const Vec& uu = run.u.value_at(a);
    const Vec vb = i == 1 ? cfg.v_star : log[static_cast<std::size_t>(i) - 2].second;
    y.append(integrate_window(dyn, a, b, y.back_state(),
                              Signal::constant(a, b, uu),
                              Signal::constant(a, b, vb), cfg.model_substeps));
  }
  REQUIRE(sup_distance(fb.model_trajectory(), y) < 1e-12);
  for (const auto& [t, p] : log) REQUIRE(dyn.disturbance_set.contains(p));
}

TEST_CASE("previous-control strategy identifies aligned disturbances",
          "[strategies]") {
  // When the disturbance is constant on every block, the divided difference
  // over a block is an O(diam) perturbation of f at the node, so the
  // identified surrogate must reproduce the true disturbance's image.
  const Dynamics dyn = make_bilinear_dynamics();
  const int blocks = 50;
  const Partition part = Partition::uniform(0.0, 1.0, blocks);

  std::vector<double> starts;
  std::vector<Vec> vals;
  const auto& q = dyn.disturbance_set.enumerate();
  for (int i = 0; i < blocks; ++i) {
    starts.push_back(part.node(i));
    vals.push_back(q[static_cast<std::size_t>((i * 7 + 3) % 4)]);
  }
  const Signal v(starts, vals, 1.0);

  PreviousControlStrategyConfig cfg;
  cfg.pbar = bilinear_corner_controls();
  cfg.u_star = {1.0, 1.0};
  UstarFeedback fb("ustar", dyn, part, analytic_oracle(), cfg);

  const Vec z0{0.3, 0.0};
  const ClosedLoopRun run = simulate_closed_loop(dyn, part, fb, v, z0, 8);
  const auto& log = fb.surrogate_log();
  REQUIRE(log.size() == static_cast<std::size_t>(blocks) - 1);

  double worst = 0.0;
  for (std::size_t k = 0; k < log.size(); ++k) {
    const double tau = log[k].first;
    const Vec& x = run.x.sample_at(tau);
    const Vec& u_prev = run.u.value_at(part.node(static_cast<int>(k)));
    const Vec img_hat = dyn.eval(tau, x, u_prev, log[k].second);
    const Vec img_true = dyn.eval(tau, x, u_prev, v.value_at(part.node(static_cast<int>(k))));
    worst = std::max(worst, distance(img_hat, img_true));
  }
  REQUIRE(worst < 0.05);  // two divided-difference errors of order diam
}

TEST_CASE("closed-loop argument validation", "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 4);
  const Partition other = Partition::uniform(0.0, 1.0, 5);
  ConstantFeedback fb(other, Vec{1.0, 1.0});
  const Signal v = Signal::constant(0.0, 1.0, {1.0, 1.0});

  const Vec z0{0.0, 0.0};
  REQUIRE_THROWS_AS(simulate_closed_loop(dyn, part, fb, v, z0, 8), ConfigError);

  ConstantFeedback ok(part, Vec{1.0, 1.0});
  const Vec z_bad{0.0};
  REQUIRE_THROWS_AS(simulate_closed_loop(dyn, part, ok, v, z_bad, 8),
                    ConfigError);
}

TEST_CASE("strategy factories tag their products", "[strategies]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Partition part = Partition::uniform(0.0, 1.0, 4);

  EpsilonStrategyConfig cfg;
  cfg.eps = 0.1;
  cfg.test_controls = {{1.0, 1.0}};
  cfg.shift_set = bilinear_corner_controls();
  REQUIRE(make_ue_strategy(dyn, part, analytic_oracle(), cfg)->id() == "ue");
  REQUIRE(make_ubar_strategy(dyn, part, analytic_oracle(), cfg)->id() ==
          "ubar");

  PreviousControlStrategyConfig pc;
  pc.pbar = bilinear_corner_controls();
  REQUIRE(make_ustar_strategy(dyn, part, analytic_oracle(), pc)->id() ==
          "ustar");
}
