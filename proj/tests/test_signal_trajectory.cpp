#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <guarctl/signal.hpp>
#include <guarctl/trajectory.hpp>

using namespace guarctl;

TEST_CASE("signal pieces are right-open", "[signal]") {
  const Signal s({0.0, 0.5}, {{1.0, 2.0}, {-1.0, 0.0}}, 1.0);
  REQUIRE(s.dim() == 2);
  REQUIRE(s.t0() == 0.0);
  REQUIRE(s.end() == 1.0);
  REQUIRE(s.value_at(0.0) == Vec{1.0, 2.0});
  REQUIRE(s.value_at(0.4999) == Vec{1.0, 2.0});
  REQUIRE(s.value_at(0.5) == Vec{-1.0, 0.0});  // breakpoint starts new piece
  REQUIRE(s.value_at(1.0) == Vec{-1.0, 0.0});  // end inherits the last piece
  REQUIRE_THROWS_AS(s.value_at(-0.1), std::out_of_range);
  REQUIRE_THROWS_AS(s.value_at(1.1), std::out_of_range);
}

TEST_CASE("signal validation", "[signal]") {
  REQUIRE_THROWS_AS(Signal({0.0, 0.5}, {{1.0}}, 1.0), ConfigError);
  REQUIRE_THROWS_AS(Signal({0.5, 0.5}, {{1.0}, {2.0}}, 1.0), ConfigError);
  REQUIRE_THROWS_AS(Signal({0.0, 0.5}, {{1.0}, {2.0}}, 0.5), ConfigError);
  REQUIRE_THROWS_AS(Signal({0.0, 0.5}, {{1.0}, {2.0, 3.0}}, 1.0), ConfigError);
  REQUIRE_THROWS_AS(Signal({}, {}, 1.0), ConfigError);
}

TEST_CASE("signal window and breakpoints", "[signal]") {
  const Signal s({0.0, 0.25, 0.5, 0.75}, {{1.0}, {2.0}, {3.0}, {4.0}}, 1.0);
  const Signal w = s.window(0.3, 0.8);
  REQUIRE(w.t0() == 0.3);
  REQUIRE(w.end() == 0.8);
  REQUIRE(w.value_at(0.3) == Vec{2.0});
  REQUIRE(w.value_at(0.5) == Vec{3.0});
  REQUIRE(w.value_at(0.79) == Vec{4.0});
  REQUIRE(w.starts().size() == 3);  // 0.3 plus the interior breaks 0.5, 0.75

  const auto br = s.breaks_between(0.25, 0.75);
  REQUIRE(br == std::vector<double>{0.5});
  REQUIRE(s.breaks_between(0.0, 1.0) ==
          (std::vector<double>{0.25, 0.5, 0.75}));
  REQUIRE(s.breaks_between(0.5, 0.6).empty());
}

TEST_CASE("signal builder chains blocks", "[signal]") {
  SignalBuilder b;
  b.append(Signal({0.0}, {{1.0}}, 0.5));
  b.append(Signal({0.5, 0.6}, {{2.0}, {3.0}}, 1.0));
  const Signal s = b.build();
  REQUIRE(s.starts() == (std::vector<double>{0.0, 0.5, 0.6}));
  REQUIRE(s.end() == 1.0);
  REQUIRE(s.value_at(0.55) == Vec{2.0});
}

TEST_CASE("trajectory push, interpolation and exact samples", "[trajectory]") {
  Trajectory tr(0.0, Vec{0.0, 1.0});
  tr.push(0.5, Vec{1.0, 1.0});
  tr.push(1.0, Vec{1.0, 3.0});
  REQUIRE(tr.size() == 3);
  REQUIRE(tr.dim() == 2);
  REQUIRE(tr.front_time() == 0.0);
  REQUIRE(tr.back_state() == Vec{1.0, 3.0});

  const Vec mid = tr.state_at(0.25);
  REQUIRE(mid[0] == Catch::Approx(0.5));
  REQUIRE(mid[1] == Catch::Approx(1.0));

  REQUIRE(tr.sample_at(0.5) == Vec{1.0, 1.0});
  REQUIRE(tr.has_sample_at(0.5));
  REQUIRE_FALSE(tr.has_sample_at(0.25));
  REQUIRE_THROWS_AS(tr.sample_at(0.25), std::out_of_range);
  REQUIRE_THROWS_AS(tr.state_at(1.5), std::out_of_range);

  REQUIRE_THROWS_AS(tr.push(0.9, Vec{0.0, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(tr.push(2.0, Vec{0.0}), std::invalid_argument);
}

TEST_CASE("trajectory append dedupes the shared boundary", "[trajectory]") {
  Trajectory head(0.0, Vec{0.0});
  head.push(0.5, Vec{1.0});

  Trajectory tail(0.5, Vec{1.0});
  tail.push(1.0, Vec{2.0});

  head.append(tail);
  REQUIRE(head.size() == 3);  // boundary sample stored once
  REQUIRE(head.back_time() == 1.0);

  Trajectory overlap(0.4, Vec{0.0});
  Trajectory head2(0.0, Vec{0.0});
  head2.push(0.5, Vec{1.0});
  REQUIRE_THROWS_AS(head2.append(overlap), std::invalid_argument);
}

TEST_CASE("sup_distance of identical trajectories is zero", "[trajectory]") {
  Trajectory a(0.0, Vec{1.0, 2.0});
  a.push(0.5, Vec{2.0, 0.0});
  a.push(1.0, Vec{0.0, 0.0});
  REQUIRE(sup_distance(a, a) == 0.0);
}

TEST_CASE("sup_distance of a constant shift is the shift norm",
          "[trajectory]") {
  Trajectory a, b;
  const Vec c{0.3, -0.4};  // norm 0.5
  for (int k = 0; k <= 10; ++k) {
    const double t = k / 10.0;
    a.push(t, Vec{t, 1.0 - t});
    b.push(t, Vec{t + c[0], 1.0 - t + c[1]});
  }
  REQUIRE(sup_distance(a, b) == Catch::Approx(0.5));
}

TEST_CASE("sup_distance samples the union grid", "[trajectory]") {
  // a(t) = t on a coarse grid, b(t) = t^2 sampled densely: the gap peaks at
  // t = 1/2 with |t - t^2| = 1/4, and only b's samples see that region.
  Trajectory a, b;
  a.push(0.0, Vec{0.0});
  a.push(1.0, Vec{1.0});
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    b.push(t, Vec{t * t});
  }
  REQUIRE(sup_distance(a, b) == Catch::Approx(0.25).margin(1e-4));

  Trajectory wrong_dim(0.0, Vec{0.0, 0.0});
  wrong_dim.push(1.0, Vec{1.0, 1.0});
  REQUIRE_THROWS_AS(sup_distance(a, wrong_dim), std::invalid_argument);
}
