#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"
#include "xprace/physics.hpp"

using namespace xprace;

namespace {

PhysicsConfig frictionless(int fps = 16) {
  PhysicsConfig c;
  c.frames_per_second = fps;
  c.friction_coeff = 0.0;
  return c;
}

}  // namespace

TEST(Integrate, PureInertia) {
  const PhysicsConfig cfg = frictionless();
  const ShipState s{{10, 20}, {1, 0}, 0.0, true};
  const ShipState n = integrate(s, {0, 0}, cfg);
  EXPECT_DOUBLE_EQ(n.position.x, 10 + cfg.dt());
  EXPECT_DOUBLE_EQ(n.position.y, 20);
  EXPECT_EQ(n.velocity, s.velocity);
}

TEST(Integrate, SingleThrustStep) {
  const PhysicsConfig cfg = frictionless();
  const ShipState n = integrate({{0, 0}, {0, 0}, 0.0, true}, {0, 1}, cfg);
  EXPECT_DOUBLE_EQ(n.velocity.x, cfg.max_thrust_accel * cfg.dt());
  EXPECT_DOUBLE_EQ(n.velocity.y, 0.0);
}

TEST(Integrate, FreeFallMatchesClosedForm) {
  PhysicsConfig cfg = frictionless();
  cfg.gravity = {0, -9.81};
  ShipState s{{0, 0}, {0, 0}, 90.0, true};
  for (int i = 0; i < 100; ++i) s = integrate(s, {0, 0}, cfg);
  EXPECT_NEAR(s.velocity.y, -9.81 * 100 * cfg.dt(), 1e-9);
}

TEST(Integrate, TurnThenThrustAlongNewHeading) {
  const PhysicsConfig cfg = frictionless();
  const ShipState n = integrate({{0, 0}, {0, 0}, 0.0, true}, {1, 1}, cfg);
  const double h = cfg.max_turn_rate * cfg.dt();
  EXPECT_DOUBLE_EQ(n.heading, h);
  EXPECT_NEAR(heading_of(n.velocity), h, 1e-12);
}

TEST(Integrate, HeadingStaysNormalized) {
  const PhysicsConfig cfg;
  ShipState s{{0, 0}, {0, 0}, 350.0, true};
  s = integrate(s, {1, 0}, cfg);
  EXPECT_GE(s.heading, 0.0);
  EXPECT_LT(s.heading, 360.0);
  s = integrate({{0, 0}, {0, 0}, 5.0, true}, {-1, 0}, cfg);
  EXPECT_GE(s.heading, 0.0);
  EXPECT_LT(s.heading, 360.0);
}

TEST(Integrate, CommandsAreClamped) {
  const PhysicsConfig cfg = frictionless();
  const ShipState a = integrate({{0, 0}, {0, 0}, 0.0, true}, {7, 3}, cfg);
  const ShipState b = integrate({{0, 0}, {0, 0}, 0.0, true}, {1, 1}, cfg);
  EXPECT_EQ(a, b);
}

TEST(Integrate, RejectsNonFiniteAndDeadShips) {
  const PhysicsConfig cfg;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(integrate({{nan, 0}, {0, 0}, 0.0, true}, {0, 0}, cfg), PhysicsError);
  EXPECT_THROW(integrate({{0, 0}, {0, 0}, 0.0, true}, {nan, 0}, cfg), PhysicsError);
  EXPECT_THROW(integrate({{0, 0}, {0, 0}, 0.0, false}, {0, 0}, cfg), PhysicsError);
}

TEST(Integrate, FrictionlessCoastConservesSpeedExactly) {
  const PhysicsConfig cfg = frictionless();
  ShipState s{{0, 0}, {3, 4}, 10.0, true};
  for (int i = 0; i < 1000; ++i) s = integrate(s, {0.3, 0}, cfg);
  EXPECT_EQ(s.velocity, (Vec2{3, 4}));
}

TEST(Integrate, FrictionNeverIncreasesSpeed) {
  const PhysicsConfig cfg;
  ShipState s{{0, 0}, {30, -10}, 0.0, true};
  double prev = length(s.velocity);
  for (int i = 0; i < 1000; ++i) {
    s = integrate(s, {0.5, 0}, cfg);
    EXPECT_LT(length(s.velocity), prev);
    prev = length(s.velocity);
  }
}

TEST(Config, Validation) {
  PhysicsConfig c;
  EXPECT_NO_THROW(c.validate());
  c.friction_coeff = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.frames_per_second = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.speed_norm_divisor = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SweepCollide, ZeroLengthSweepMisses) {
  const Track t = fixtures::square_room();
  EXPECT_FALSE(sweep_collide({50, 50}, {50, 50}, t).has_value());
}

TEST(SweepCollide, AxisAlignedCrossing) {
  const Track t = fixtures::square_room();
  const auto hit = sweep_collide({60, 50}, {140, 50}, t);
  ASSERT_TRUE(hit.has_value());
  EXPECT_DOUBLE_EQ(hit->t, 0.5);
  EXPECT_EQ(hit->wall_id, 1);
}

TEST(SweepCollide, CornerTieGoesToLowestId) {
  const Track t = fixtures::square_room();
  const auto hit = sweep_collide({50, 50}, {150, 150}, t);
  ASSERT_TRUE(hit.has_value());
  EXPECT_DOUBLE_EQ(hit->t, 0.5);
  EXPECT_EQ(hit->wall_id, 1);
}

TEST(SweepCollide, AgreesWithSampledOracleOnBundledMap) {
  const Track t = fixtures::bundled("oval");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.0, 360.0), ulen(0.0, 120.0);
  int agree = 0;
  const int n = 500;
  for (int i = 0; i < n; ++i) {
    const Vec2 p0 = fixtures::random_interior(t, rng);
    const Vec2 p1 = p0 + unit_from_heading(ua(rng)) * ulen(rng);
    agree += sweep_collide(p0, p1, t).has_value() == oracle::sampled_sweep_hits(t, p0, p1);
  }
  EXPECT_GE(agree, n - 1);
}

TEST(Step, RestIsAFixedPoint) {
  const Track t = fixtures::square_room();
  const ShipState s{{50, 50}, {0, 0}, 0.0, true};
  const StepOutcome o = step(s, {0, 0}, PhysicsConfig{}, t);
  EXPECT_EQ(o.next_state, s);
  EXPECT_FALSE(o.collision.has_value());
}

TEST(Step, ForcedImpactAtEndOfFrame) {
  const Track t = fixtures::square_room();
  const PhysicsConfig cfg = frictionless(10);  // dt = 0.1
  const StepOutcome o = step({{99, 50}, {10, 0}, 0.0, true}, {0, 0}, cfg, t);
  ASSERT_TRUE(o.collision.has_value());
  EXPECT_FALSE(o.next_state.alive);
  EXPECT_EQ(o.collision->wall_id, 1);
  EXPECT_DOUBLE_EQ(o.collision->point.x, 100.0);
  EXPECT_EQ(o.next_state.position, o.collision->point);
}

TEST(Step, NoTunnelingAtHighSpeed) {
  const Track t = fixtures::square_room();
  const StepOutcome o = step({{50, 50}, {1e5, 0}, 0.0, true}, {0, 0}, PhysicsConfig{}, t);
  ASSERT_TRUE(o.collision.has_value());
  EXPECT_DOUBLE_EQ(o.next_state.position.x, 100.0);
}

TEST(Step, ClearanceShortcutMatchesFullStep) {
  const Track t = fixtures::bundled("oval");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1), ua(0, 360), us(0, 60);
  const PhysicsConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    const Vec2 p = fixtures::random_interior(t, rng);
    const ShipState s{p, unit_from_heading(ua(rng)) * us(rng), ua(rng), true};
    const ControlCommand c{u(rng), std::abs(u(rng))};
    const StepOutcome a = step(s, c, cfg, t);
    const StepOutcome b = step(s, c, cfg, t, RayCaster(t, p).nearest().first);
    EXPECT_EQ(a.next_state, b.next_state);
    EXPECT_EQ(a.collision.has_value(), b.collision.has_value());
  }
}

TEST(Step, ReplayIsBitIdentical) {
  const Track t = fixtures::bundled("oval");
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<ControlCommand> cmds(1000);
  for (auto& c : cmds) c = {u(rng), std::abs(u(rng)) * 0.2};
  auto run = [&] {
    ShipState s{t.start("A").position, {0, 0}, t.start("A").heading, true};
    PhysicsConfig cfg;
    cfg.gravity = {0.0, -0.01};
    for (const auto& c : cmds) {
      if (!s.alive) break;
      s = step(s, c, cfg, t).next_state;
    }
    return s;
  };
  const ShipState a = run(), b = run();
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::memcmp(&a.position, &b.position, sizeof(Vec2)), 0);
}
