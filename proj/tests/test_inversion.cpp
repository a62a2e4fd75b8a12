#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include <guarctl/example_bilinear.hpp>
#include <guarctl/inversion.hpp>

using namespace guarctl;

namespace {

std::string field(const CheckReport& r, const std::string& key) {
  for (const auto& [k, v] : r.fields)
    if (k == key) return v;
  return {};
}

// Scalar system dx = u + (u+1) v: the control u = -1 blanks the disturbance
// out of the dynamics entirely, u = 0 passes it through.
Dynamics make_blanking() {
  Dynamics dyn;
  dyn.id = "blanking";
  dyn.state_dim = 1;
  dyn.t0 = 0.0;
  dyn.theta = 1.0;
  dyn.control_set = CompactSet::finite({{-1.0}, {0.0}});
  dyn.disturbance_set = CompactSet::finite({{-1.0}, {1.0}});
  dyn.bounds = Box{{-5.0}, {5.0}};
  dyn.f = [](double, std::span<const double>, std::span<const double> u,
             std::span<const double> v, std::span<double> dx) {
    dx[0] = u[0] + (u[0] + 1.0) * v[0];
  };
  return dyn;
}

}  // namespace

TEST_CASE("divided differences recover constant slopes", "[inversion]") {
  // Linear motion x(t) = (2t, -0.5t) sampled at the test slot boundaries.
  const Partition part = Partition::uniform(0.0, 1.0, 4);
  const TestSchedule sched(part, 0.1, 2);
  Trajectory tr(0.0, Vec{0.0, 0.0});
  for (int j = 0; j <= 2; ++j) {
    const double t = sched.sub_instant(1, j);
    tr.push(t, Vec{2.0 * t, -0.5 * t});
  }
  const auto slopes = divided_differences(tr, sched, 1);
  REQUIRE(slopes.size() == 2);
  for (const Vec& d : slopes) {
    REQUIRE(d[0] == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(d[1] == Catch::Approx(-0.5).margin(1e-9));
  }

  Trajectory flat(0.0, Vec{1.0});
  flat.push(0.5, Vec{1.0});
  REQUIRE(divided_difference(flat, 0.0, 0.5) == Vec{0.0});
  REQUIRE_THROWS_AS(divided_difference(flat, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("surrogate identification from exact slopes", "[inversion]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Vec x{0.5, 0.0};
  const std::vector<Vec> tests{{1.0, 1.0}};

  // Observed slope produced by v = (1, -1): f = (1, -0.5).
  const std::vector<Vec> slopes{{1.0, -0.5}};
  const SurrogateResult r = identify_surrogate(dyn, 0.0, x, tests, slopes);
  REQUIRE(r.index == 2);  // enumeration order (-1,-1), (-1,1), (1,-1), (1,1)
  REQUIRE(r.point == Vec{1.0, -1.0});
  REQUIRE(r.mismatch == Catch::Approx(0.0).margin(1e-12));

  // A small perturbation keeps the same minimizer.
  const std::vector<Vec> noisy{{1.01, -0.5}};
  REQUIRE(identify_surrogate(dyn, 0.0, x, tests, noisy).index == 2);

  REQUIRE_THROWS_AS(identify_surrogate(dyn, 0.0, x, {}, {}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(identify_surrogate(dyn, 0.0, x, tests, {}),
                    std::invalid_argument);
}

TEST_CASE("surrogate ties keep the earliest enumerated point", "[inversion]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Vec x{0.0, 0.0};
  // Probing with u = (0,0) blinds the observation: every disturbance yields
  // the zero slope, so the argmin falls back to the first enumerated point.
  const std::vector<Vec> tests{{0.0, 0.0}};
  const std::vector<Vec> slopes{{0.0, 0.0}};
  const SurrogateResult r = identify_surrogate(dyn, 0.0, x, tests, slopes);
  REQUIRE(r.index == 0);
  REQUIRE(r.point == Vec{-1.0, -1.0});
}

TEST_CASE("single-test identification with the previous control",
          "[inversion]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Vec x{0.3, 0.0};
  const Vec u_prev{1.0, 1.0};
  // Slope produced by v = (-1, 1): f = (-1, 0.3).
  const SurrogateResult r =
      identify_surrogate_single(dyn, 0.0, x, u_prev, Vec{-1.0, 0.3});
  REQUIRE(r.index == 1);
  REQUIRE(r.point == Vec{-1.0, 1.0});
  REQUIRE(r.mismatch == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("quotient classes by the disturbance-to-image map", "[inversion]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const Vec u{1.0, 1.0};

  // Generic state: all four corner disturbances give distinct images.
  const Vec generic{0.5, 0.0};
  const QuotientClasses q1 = quotient_classes(dyn, 0.0, generic, u);
  REQUIRE(q1.classes.size() == 4);
  REQUIRE(q1.class_of == std::vector<int>{0, 1, 2, 3});
  REQUIRE(q1.tol > 0.0);
  REQUIRE(q1.tol < 1e-8);

  // On the x1 = 0 ray the second equation dies: only v1 is visible.
  const Vec ray{0.0, 0.0};
  const QuotientClasses q2 = quotient_classes(dyn, 0.0, ray, u);
  REQUIRE(q2.classes.size() == 2);
  REQUIRE(q2.class_of == std::vector<int>{0, 0, 1, 1});

  // Probing with u = (0,0) sees nothing at all.
  const Vec blind{0.5, 0.0};
  const QuotientClasses q3 =
      quotient_classes(dyn, 0.0, blind, Vec{0.0, 0.0});
  REQUIRE(q3.classes.size() == 1);
  REQUIRE(q3.classes[0] == std::vector<int>{0, 1, 2, 3});

  // A huge explicit tolerance merges everything.
  const QuotientClasses q4 = quotient_classes(dyn, 0.0, generic, u, 3.0);
  REQUIRE(q4.classes.size() == 1);
  REQUIRE(q4.tol == 3.0);
}

TEST_CASE("first identifiability check passes for a separating test",
          "[inversion]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const std::vector<TimeState> samples{
      {0.0, {0.5, 0.0}}, {0.5, {0.0, 0.2}}, {0.3, {-0.5, 0.2}}};

  const CheckReport ok = check_assumption1(dyn, {{1.0, 1.0}}, samples);
  REQUIRE(ok.pass);
  REQUIRE(ok.check == "assumption1");

  // The full control set trivially refines itself.
  const CheckReport full =
      check_assumption1(dyn, dyn.control_set.enumerate(), samples);
  REQUIRE(full.pass);
}

TEST_CASE("first identifiability check fails for a blind test", "[inversion]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const std::vector<TimeState> samples{{0.0, {0.5, 0.0}}};
  const CheckReport bad = check_assumption1(dyn, {{0.0, 0.0}}, samples);
  REQUIRE_FALSE(bad.pass);
  REQUIRE_FALSE(field(bad, "witness_u").empty());
  REQUIRE_FALSE(field(bad, "witness_v").empty());

  // Scalar system dx = |u - v|: probing at u = 0 sees |v| = 1 for both
  // disturbances, while u = 1 separates them.
  Dynamics fold;
  fold.id = "fold";
  fold.state_dim = 1;
  fold.t0 = 0.0;
  fold.theta = 1.0;
  fold.control_set = CompactSet::finite({{0.0}, {1.0}});
  fold.disturbance_set = CompactSet::finite({{-1.0}, {1.0}});
  fold.bounds = Box{{-5.0}, {5.0}};
  fold.f = [](double, std::span<const double>, std::span<const double> u,
              std::span<const double> v, std::span<double> dx) {
    dx[0] = std::abs(u[0] - v[0]);
  };
  const std::vector<TimeState> probe{{0.0, {0.0}}};
  REQUIRE_FALSE(check_assumption1(fold, {{0.0}}, probe).pass);
  REQUIRE(check_assumption1(fold, {{1.0}}, probe).pass);
}

TEST_CASE("previous-control check passes for the corner subset", "[inversion]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const std::vector<ShiftSample> samples{
      {0.5, {0.5, 0.0}, {0.0, 1.0}},
      {0.2, {0.0, 0.0}, {0.0, 1.0}},
      {0.7, {0.9, 0.3}, {0.3, 1.0}},
      {0.1, {-0.4, 0.2}, {1.0, 0.5}}};
  const CheckReport ok =
      check_assumption2(dyn, bilinear_corner_controls(), samples);
  REQUIRE(ok.pass);
  REQUIRE(ok.check == "assumption2");
}

TEST_CASE("previous-control check fails on the zero control", "[inversion]") {
  const Dynamics dyn = make_bilinear_dynamics();
  const std::vector<ShiftSample> samples{{0.5, {0.5, 0.0}, {0.0, 1.0}}};
  const CheckReport bad = check_assumption2(dyn, {{0.0, 0.0}}, samples);
  REQUIRE_FALSE(bad.pass);
  REQUIRE(field(bad, "condition") == "a");  // it cannot even realize the min
}

TEST_CASE("previous-control check can fail on separation alone", "[inversion]") {
  // In the blanking system u = -1 attains every minimum of <s, f>, yet
  // probing with it alone cannot distinguish the two disturbances.
  const Dynamics dyn = make_blanking();
  const std::vector<ShiftSample> samples{{0.0, {0.0}, {1.0}}};
  const CheckReport bad = check_assumption2(dyn, {{-1.0}}, samples);
  REQUIRE_FALSE(bad.pass);
  REQUIRE(field(bad, "condition") == "b");

  // Adding the pass-through control repairs the subset.
  const CheckReport ok = check_assumption2(dyn, {{-1.0}, {0.0}}, samples);
  REQUIRE(ok.pass);
}

TEST_CASE("saddle check measures the minmax/maxmin gap", "[inversion]") {
  const Dynamics dyn = make_bilinear_dynamics();

  // At x1 = 0.5 with s = (0,1) the inner game has value gap x1 = 0.5:
  // min_u max_v = 0 (park u2 at 0) but max_v min_u = -0.5.
  const std::vector<ShiftSample> wide{{0.0, {0.5, 0.0}, {0.0, 1.0}}};
  const CheckReport gap = check_saddle(dyn, wide, 0.02);
  REQUIRE_FALSE(gap.pass);
  const double worst = std::stod(field(gap, "worst_gap"));
  REQUIRE(worst == Catch::Approx(0.5).margin(1e-9));

  // In the left half-plane the payoff row vanishes and the gap closes.
  const std::vector<ShiftSample> flat{{0.0, {-0.5, 0.0}, {0.0, 1.0}}};
  REQUIRE(check_saddle(dyn, flat, 1e-9).pass);

  // A separable game has no gap anywhere.
  Dynamics sep;
  sep.id = "separable";
  sep.state_dim = 2;
  sep.t0 = 0.0;
  sep.theta = 1.0;
  sep.control_set = CompactSet::grid(Box{{-1.0}, {1.0}}, {3});
  sep.disturbance_set = CompactSet::finite({{-1.0}, {1.0}});
  sep.bounds = Box{{-5.0, -5.0}, {5.0, 5.0}};
  sep.f = [](double, std::span<const double>, std::span<const double> u,
             std::span<const double> v, std::span<double> dx) {
    dx[0] = u[0];
    dx[1] = v[0];
  };
  const std::vector<ShiftSample> pts{
      {0.0, {0.0, 0.0}, {0.7, -0.3}}, {0.5, {1.0, -1.0}, {-0.2, 0.9}}};
  REQUIRE(check_saddle(sep, pts, 1e-12).pass);
}
