#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include "support/fixtures.hpp"
#include "xprace/evaluation.hpp"
#include "xprace/harness/baseline.hpp"

using namespace xprace;

namespace {

struct FitnessRow {
  double c, b;
  bool has_t;
  double t;
  const char* expected;
};

constexpr FitnessRow kFitnessTable[] = {
#include "oracles/fitness_table.inc"
};

struct Constant {
  ControlCommand cmd;
  ControlCommand operator()(const EpisodeView&) const { return cmd; }
};

struct Script {
  const std::vector<ControlCommand>* cmds;
  ControlCommand operator()(const EpisodeView& v) const {
    return static_cast<std::size_t>(v.frame) < cmds->size() ? (*cmds)[static_cast<std::size_t>(v.frame)] : ControlCommand{};
  }
};

struct Recording {
  BaselineDriver inner;
  std::vector<ControlCommand>* out;
  ControlCommand operator()(const EpisodeView& v) {
    const ControlCommand c = inner(v);
    out->push_back(c);
    return c;
  }
};

EpisodeResult result(double c, double b, std::optional<double> t, std::string label = "A") {
  EpisodeResult r;
  r.start_label = std::move(label);
  r.completion = c;
  r.speed_bonus = b;
  r.time_delta = t;
  if (t) r.lap_time = 50.0 - *t;
  return r;
}

}  // namespace

TEST(FrameBonus, Examples) {
  const FitnessConfig cfg;
  EXPECT_EQ(frame_bonus(0.0, cfg), 0.0);
  EXPECT_EQ(frame_bonus(1.0, cfg), 0.0);
  EXPECT_NEAR(frame_bonus(10.0, cfg), std::pow(10.0, 1.1) / 250.0, 1e-15);
  EXPECT_NEAR(frame_bonus(10.0, cfg), 0.05036, 1e-5);
  EXPECT_EQ(frame_bonus(1e4, cfg), 1.0);
}

TEST(Fitness, MatchesHighPrecisionTable) {
  const FitnessConfig cfg;
  for (const auto& row : kFitnessTable) {
    const double expected = std::strtod(row.expected, nullptr);
    const double got = fitness(result(row.c, row.b, row.has_t ? std::optional(row.t) : std::nullopt), cfg);
    const double err = expected == 0.0 ? std::abs(got) : std::abs(got - expected) / std::abs(expected);
    EXPECT_LE(err, 1e-12) << "C=" << row.c << " B=" << row.b << " T=" << row.t;
  }
}

TEST(Fitness, MonotoneInEachTerm) {
  const FitnessConfig cfg;
  EXPECT_LT(fitness(result(40, 5, 3.0), cfg), fitness(result(41, 5, 3.0), cfg));
  EXPECT_LT(fitness(result(40, 5, 3.0), cfg), fitness(result(40, 6, 3.0), cfg));
  EXPECT_EQ(fitness(result(40, 50, 3.0), cfg), fitness(result(40, 80, 3.0), cfg));
  EXPECT_LT(fitness(result(40, 5, 3.0), cfg), fitness(result(40, 5, 4.0), cfg));
  EXPECT_EQ(fitness(result(40, 5, -75.0), cfg), fitness(result(40, 5, -90.0), cfg));
}

TEST(Fitness, RejectsCompletionOutsideRange) {
  EXPECT_THROW(fitness(result(100.5, 0, std::nullopt), FitnessConfig{}), Error);
  EXPECT_THROW(fitness(result(-1, 0, std::nullopt), FitnessConfig{}), Error);
}

TEST(TotalFitness, SumOverStarts) {
  const FitnessConfig cfg;
  const auto a = result(50, 10, std::nullopt, "A"), b = result(100, 30, 5.0, "B");
  EXPECT_EQ(total_fitness({a}, {"A"}, cfg), fitness(a, cfg));
  EXPECT_DOUBLE_EQ(total_fitness({a, b}, {"A", "B"}, cfg), fitness(a, cfg) + fitness(b, cfg));
  EXPECT_EQ(total_fitness({a, b}, {"A", "B"}, cfg), total_fitness({b, a}, {"A", "B"}, cfg));
  EXPECT_THROW(total_fitness({a}, {"A", "B"}, cfg), Error);
  EXPECT_THROW(total_fitness({a, a}, {"A"}, cfg), Error);
  EXPECT_THROW(total_fitness({a, b}, {"A"}, cfg), Error);
}

TEST(Episode, IdleShipStallsAfterTheWindow) {
  const Track t = fixtures::bundled("oval");
  const EpisodeResult r = run_episode(Constant{{0, 0}}, t, t.start("A"), {}, {}, {});
  EXPECT_EQ(r.termination, Termination::stalled);
  EXPECT_EQ(r.frames, 48);
  EXPECT_EQ(r.completion, 0.0);
  EXPECT_EQ(r.speed_bonus, 0.0);
  EXPECT_FALSE(r.lap_time.has_value());
}

TEST(Episode, FullThrustAheadCrashes) {
  const Track t = fixtures::bundled("oval");
  const EpisodeResult r = run_episode(Constant{{0, 1}}, t, t.start("A"), {}, {}, {});
  EXPECT_EQ(r.termination, Termination::collision);
  EXPECT_GT(r.completion, 0.0);
  EXPECT_LT(r.completion, 50.0);
  EXPECT_GT(r.speed_bonus, 0.0);
}

TEST(Episode, NonFiniteCommandCountsAsCollision) {
  const Track t = fixtures::bundled("oval");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const EpisodeResult r = run_episode(Constant{{nan, 0.5}}, t, t.start("A"), {}, {}, {});
  EXPECT_EQ(r.termination, Termination::collision);
  EXPECT_EQ(r.frames, 0);
}

TEST(Episode, TimeLimitCapsTheEpisode) {
  const Track t = fixtures::bundled("oval");
  FitnessConfig fit;
  fit.time_limit = 10.0;
  const PhysicsConfig phys;
  const EpisodeResult r = run_episode(BaselineDriver(phys), t, t.start("A"), phys, {}, fit);
  EXPECT_EQ(r.termination, Termination::time_limit);
  EXPECT_EQ(r.frames, 160);
  EXPECT_GT(r.completion, 0.0);
}

TEST(Episode, ScriptedLapFinishesAtExactly100) {
  const Track t = fixtures::bundled("oval");
  const PhysicsConfig phys;
  for (const auto& st : t.starts()) {
    std::vector<ControlCommand> cmds;
    const EpisodeResult live = run_episode(Recording{BaselineDriver(phys), &cmds}, t, st, phys, {}, {});
    ASSERT_EQ(live.termination, Termination::finished);
    const EpisodeResult r = run_episode(Script{&cmds}, t, st, phys, {}, {}, true);
    EXPECT_EQ(r.termination, Termination::finished);
    EXPECT_EQ(r.completion, 100.0);
    ASSERT_TRUE(r.lap_time.has_value());
    EXPECT_DOUBLE_EQ(*r.lap_time, r.frames * phys.dt());
    EXPECT_DOUBLE_EQ(*r.time_delta, *t.baseline_time() - *r.lap_time);
    ASSERT_TRUE(r.trace.has_value());
    EXPECT_EQ(r.trace->size(), static_cast<std::size_t>(r.frames) + 1);
    EXPECT_EQ(r.trace->back().completion, 100.0);
    for (std::size_t i = 1; i < r.trace->size(); ++i) EXPECT_GE((*r.trace)[i].completion, (*r.trace)[i - 1].completion);
  }
}

TEST(Episode, TerminatesWithinTheTimeLimit) {
  const Track t = fixtures::bundled("circuit");
  const PhysicsConfig phys;
  const FitnessConfig fit;
  BaselineDriverConfig slow;
  slow.cruise_speed = 6.0;
  const EpisodeResult r = run_episode(BaselineDriver(phys, slow), t, t.start("A"), phys, {}, fit);
  EXPECT_LE(r.frames, static_cast<int>(fit.time_limit * phys.frames_per_second) + 1);
}

TEST(Episode, IsDeterministic) {
  const Track t = fixtures::bundled("circuit");
  const PhysicsConfig phys;
  const auto a = run_episode(BaselineDriver(phys), t, t.start("B"), phys, {}, {}, true);
  const auto b = run_episode(BaselineDriver(phys), t, t.start("B"), phys, {}, {}, true);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.speed_bonus, b.speed_bonus);
  ASSERT_EQ(a.trace->size(), b.trace->size());
  for (std::size_t i = 0; i < a.trace->size(); ++i) EXPECT_EQ((*a.trace)[i].position, (*b.trace)[i].position);
}

TEST(Episode, MissingBaselineIsAConfigError) {
  const Track t = load_track(fixtures::square_room_text());
  EXPECT_THROW(run_episode(Constant{{0, 0}}, t, t.start("A"), {}, {}, {}), ConfigError);
  FitnessConfig fit;
  fit.baseline_time = 30.0;
  EXPECT_NO_THROW(run_episode(Constant{{0, 0}}, t, t.start("A"), {}, {}, fit));
}

TEST(Baseline, DriverFinishesBothBundledMaps) {
  for (const char* name : {"oval", "circuit"}) {
    const Track t = fixtures::bundled(name);
    const auto r = measure_baseline(t, {}, {}, {});
    ASSERT_EQ(r.episodes.size(), 2u);
    EXPECT_GT(r.baseline_time, 0.0);
    EXPECT_LT(r.baseline_time, 120.0);
    // The stored value is what the measurement reproduces.
    EXPECT_NEAR(r.baseline_time, *t.baseline_time(), 1e-9) << name;
  }
}

TEST(Baseline, WithBaselineTimeRewritesOnlyThatLine) {
  const std::string room = fixtures::square_room_text();
  const std::string once = with_baseline_time(room, 12.5);
  EXPECT_EQ(load_track(once).baseline_time(), 12.5);
  const std::string twice = with_baseline_time(once, 7.25);
  EXPECT_EQ(load_track(twice).baseline_time(), 7.25);
  EXPECT_EQ(twice.size(), once.size());
  EXPECT_THROW(with_baseline_time("not a map", 1.0), Error);
}
