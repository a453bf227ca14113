#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "support/fixtures.hpp"
#include "support/transforms.hpp"
#include "xprace/sensors.hpp"

using namespace xprace;

namespace {

SensorVector sense_room(const ShipState& s, ControlCommand last = {}) {
  const Track t = fixtures::square_room();
  return sense(s, t, initial_progress(t, s.position), last, SensorConfig{}, PhysicsConfig{});
}

}  // namespace

TEST(SensorLayout, NamesAndCount) {
  EXPECT_EQ(kSensorCount, 23u);
  EXPECT_EQ(kSensorNames.front(), "ship_speed_norm");
  EXPECT_EQ(kSensorNames[static_cast<std::size_t>(Sensor::tt_retro_point)], "tt_retro_point");
  EXPECT_EQ(kSensorNames.back(), "wp3_dist");
}

TEST(Sense, CentreOfRoomAtRest) {
  const SensorVector v = sense_room({{50, 50}, {0, 0}, 0.0, true});
  EXPECT_EQ(v[Sensor::ship_speed_norm], 0.0);
  EXPECT_NEAR(v[Sensor::wall_0], v[Sensor::wall_180], 1e-12);
  EXPECT_NEAR(v[Sensor::wall_m90], v[Sensor::wall_p90], 1e-12);
  EXPECT_NEAR(v[Sensor::wall_0], 0.1, 1e-12);
  EXPECT_NEAR(v[Sensor::wall_m15], v[Sensor::wall_p15], 1e-12);
  EXPECT_NEAR(v[Sensor::wall_m30], v[Sensor::wall_p30], 1e-12);
  EXPECT_NEAR(v[Sensor::closest_wall], 0.1, 1e-12);
  // Four walls tie; the straight-ahead ray wins.
  EXPECT_EQ(v[Sensor::angle_diff_closest], 0.0);
  EXPECT_EQ(v[Sensor::tt_tracking], 1.0);
  EXPECT_EQ(v[Sensor::tt_retro_point], 1.0);
}

TEST(Sense, SpeedNormalisation) {
  EXPECT_DOUBLE_EQ(sense_room({{50, 50}, {20, 0}, 0.0, true})[Sensor::ship_speed_norm], 1.0);
  EXPECT_DOUBLE_EQ(sense_room({{50, 50}, {0, 10}, 0.0, true})[Sensor::ship_speed_norm], 0.5);
  EXPECT_DOUBLE_EQ(sense_room({{50, 50}, {300, 0}, 0.0, true})[Sensor::ship_speed_norm], 1.0);
}

TEST(Sense, TrackAndWaypointAngles) {
  // At the start facing east the track points east and the next waypoint
  // is dead ahead.
  const SensorVector v = sense_room({{25, 25}, {0, 0}, 0.0, true});
  EXPECT_NEAR(v[Sensor::angle_diff_tracking], 0.0, 1e-12);
  EXPECT_NEAR(v[Sensor::wp1_angle], 0.0, 1e-12);
  EXPECT_NEAR(v[Sensor::wp1_dist], 50.0 / 500.0, 1e-12);
  EXPECT_NEAR(v[Sensor::wp2_angle], 45.0 / 180.0, 1e-12);
  EXPECT_NEAR(v[Sensor::wp2_dist], 50.0 * std::sqrt(2.0) / 500.0, 1e-12);
  EXPECT_NEAR(v[Sensor::wp3_angle], 0.5, 1e-12);
  // Facing north, the track is 90 degrees clockwise.
  const SensorVector n = sense_room({{25, 25}, {0, 0}, 90.0, true});
  EXPECT_NEAR(n[Sensor::angle_diff_tracking], -0.5, 1e-12);
  EXPECT_NEAR(n[Sensor::wall_track], 75.0 / 500.0, 1e-12);
}

TEST(Sense, LastCommandEcho) {
  const SensorVector v = sense_room({{50, 50}, {0, 0}, 0.0, true}, {-0.25, 0.75});
  EXPECT_EQ(v[Sensor::last_turn], -0.25);
  EXPECT_EQ(v[Sensor::last_thrust], 0.75);
}

TEST(Sense, ExactClosestWallMode) {
  SensorConfig cfg;
  cfg.closest_mode = ClosestWallMode::exact;
  const Track t = fixtures::square_room();
  const ShipState s{{30, 80}, {0, 0}, 0.0, true};
  const SensorVector v = sense(s, t, initial_progress(t, s.position), {}, cfg, PhysicsConfig{});
  EXPECT_NEAR(v[Sensor::closest_wall], 20.0 / 500.0, 1e-12);
  EXPECT_NEAR(v[Sensor::angle_diff_closest], 0.5, 1e-12);
}

TEST(Sense, AllEntriesWithinDeclaredRanges) {
  for (const char* name : {"oval", "circuit"}) {
    const Track t = fixtures::bundled(name);
    std::mt19937_64 rng(99);
    for (int i = 0; i < 5000; ++i) {
      const auto s = fixtures::random_state(t, rng);
      const SensorVector v = fixtures::sense_at(t, s.ship, s.last);
      for (std::size_t k = 0; k < kSensorCount; ++k) {
        const double x = v.values[k];
        ASSERT_TRUE(std::isfinite(x)) << kSensorNames[k];
        ASSERT_GE(x, sensor_lower_bound(static_cast<Sensor>(k))) << kSensorNames[k];
        ASSERT_LE(x, 1.0) << kSensorNames[k];
      }
    }
  }
}

TEST(Sense, IsPure) {
  const Track t = fixtures::bundled("circuit");
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto s = fixtures::random_state(t, rng);
    EXPECT_EQ(fixtures::sense_at(t, s.ship, s.last), fixtures::sense_at(t, s.ship, s.last));
  }
}

TEST(TimeToCollision, Examples) {
  const Track t = fixtures::square_room();
  const SensorConfig cfg;
  const PhysicsConfig phys;
  // Moving perpendicular to the query direction: never arrives.
  EXPECT_EQ(time_to_collision({{50, 50}, {0, 5}, 0.0, true}, t, 0.0, cfg, phys), cfg.max_tt_frames);
  // 10 units/s toward a wall 50 ahead: 5 s = 80 frames; twice as fast, half.
  EXPECT_NEAR(time_to_collision({{50, 50}, {10, 0}, 0.0, true}, t, 0.0, cfg, phys), 80.0, 1e-9);
  EXPECT_NEAR(time_to_collision({{50, 50}, {20, 0}, 0.0, true}, t, 0.0, cfg, phys), 40.0, 1e-9);
  // Receding.
  EXPECT_EQ(time_to_collision({{50, 50}, {10, 0}, 0.0, true}, t, 180.0, cfg, phys), cfg.max_tt_frames);
  // Far beyond the cap.
  EXPECT_EQ(time_to_collision({{50, 50}, {0.01, 0}, 0.0, true}, t, 0.0, cfg, phys), cfg.max_tt_frames);
}

TEST(RetroPoint, ClosedFormEdges) {
  const int fps = 16, cap = 256;
  EXPECT_EQ(retro_point_frames(100, 0, 40, fps, cap), cap);
  EXPECT_EQ(retro_point_frames(100, -3, 40, fps, cap), cap);
  // Exactly at the stopping distance.
  EXPECT_EQ(retro_point_frames(20.0 * 20.0 / 80.0, 20, 40, fps, cap), 0.0);
  EXPECT_EQ(retro_point_frames(1.0, 20, 40, fps, cap), 0.0);
  EXPECT_NEAR(retro_point_frames(105, 20, 40, fps, cap), 16.0 * 100.0 / 20.0, 1e-12);
}

TEST(RetroPoint, AgreesWithBrakingSimulation) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ud(20.0, 400.0), uv(2.0, 40.0);
  const PhysicsConfig phys;
  for (int i = 0; i < 300; ++i) {
    const double d = ud(rng), v = uv(rng);
    const double k = retro_point_frames(d, v, phys.max_thrust_accel, phys.frames_per_second, 256);
    const int sim = oracle::braking_sim_frames(d, v, phys.max_thrust_accel, phys.frames_per_second, 256);
    EXPECT_LE(std::abs(k - sim), 1.0 + 1e-9) << "d=" << d << " v=" << v;
  }
}

TEST(Invariance, RotationOfTheWholeWorld) {
  const Track t = fixtures::bundled("circuit");
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ua(0.0, 360.0);
  for (int i = 0; i < 100; ++i) {
    const double phi = ua(rng);
    const auto m = fixtures::rotation_about_origin(phi);
    const Track rt = fixtures::transform_track(t, m);
    const auto s = fixtures::random_state(t, rng);
    ShipState rs = s.ship;
    rs.position = m.point(s.ship.position);
    rs.velocity = m.vector(s.ship.velocity);
    rs.heading = m.heading(s.ship.heading);
    const SensorVector a = fixtures::sense_at(t, s.ship, s.last);
    const SensorVector b = fixtures::sense_at(rt, rs, s.last);
    for (std::size_t k = 0; k < kSensorCount; ++k) {
      const double gap = is_angle_sensor(static_cast<Sensor>(k)) ? fixtures::angle_reading_gap(a.values[k], b.values[k])
                                                                  : std::abs(a.values[k] - b.values[k]);
      EXPECT_LE(gap, 1e-9) << kSensorNames[k] << " phi=" << phi;
    }
  }
}

TEST(Invariance, MirrorAcrossTheHeadingAxis) {
  const Track t = fixtures::bundled("oval");
  std::mt19937_64 rng(22);
  const std::pair<Sensor, Sensor> swapped[] = {
      {Sensor::wall_m15, Sensor::wall_p15}, {Sensor::wall_m30, Sensor::wall_p30}, {Sensor::wall_m90, Sensor::wall_p90}};
  for (int i = 0; i < 100; ++i) {
    const auto s = fixtures::random_state(t, rng);
    const auto m = fixtures::mirror_about(s.ship.position, s.ship.heading);
    const Track mt = fixtures::transform_track(t, m);
    ShipState ms = s.ship;
    ms.velocity = m.vector(s.ship.velocity);
    const SensorVector a = fixtures::sense_at(t, s.ship, s.last);
    const SensorVector b = fixtures::sense_at(mt, ms, {-s.last.turn, s.last.thrust});
    SensorVector expect = a;
    for (auto [l, r] : swapped) std::swap(expect[l], expect[r]);
    for (std::size_t k = 0; k < kSensorCount; ++k) {
      const Sensor id = static_cast<Sensor>(k);
      if (is_angle_sensor(id) || id == Sensor::last_turn) expect.values[k] = -expect.values[k];
      const double gap = is_angle_sensor(id) ? fixtures::angle_reading_gap(expect.values[k], b.values[k])
                                             : std::abs(expect.values[k] - b.values[k]);
      EXPECT_LE(gap, 1e-9) << kSensorNames[k];
    }
  }
}
