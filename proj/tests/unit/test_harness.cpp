#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include "support/fixtures.hpp"
#include "xprace/xprace.hpp"

using namespace xprace;
namespace fs = std::filesystem;

namespace {

TrialConfig small_trial(const std::string& name, int generations = 3, int pop = 10) {
  TrialConfig c;
  c.map_path = fixtures::map_path("oval");
  c.evolution.population_size = pop;
  c.evolution.elitism = 2;
  c.generations = generations;
  c.seed = 5;
  c.checkpoint_interval = 2;
  c.output_dir = fixtures::scratch_dir(name) / "run";
  return c;
}

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

Trace make_trace(const std::string& label, Termination term, int rows, Vec2 from, Vec2 to) {
  Trace t{label, term, "oval", {}};
  for (int i = 0; i < rows; ++i) {
    const double a = rows > 1 ? static_cast<double>(i) / (rows - 1) : 0.0;
    t.rows.push_back({i, from + (to - from) * a, 0.0, 1.0, 0.0, 0.5, a * 10});
  }
  return t;
}

}  // namespace

TEST(Config, ParsesAndResolvesRelativePaths) {
  const Json j = Json::parse(R"({"map": "maps/oval.map", "generations": 7, "seed": 9,
                                 "output_dir": "runs/x", "evolution": {"population_size": 30},
                                 "fitness": {"time_limit": 60}, "trace_policy": "best_per_generation"})");
  const TrialConfig c = trial_config_from_json(j, fixtures::source_dir());
  EXPECT_EQ(c.map_path, fixtures::source_dir() / "maps/oval.map");
  EXPECT_EQ(c.output_dir, fixtures::source_dir() / "runs/x");
  EXPECT_EQ(c.generations, 7);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.evolution.population_size, 30);
  EXPECT_EQ(c.fitness.time_limit, 60.0);
  EXPECT_EQ(c.trace_policy, TracePolicy::best_per_generation);
  EXPECT_EQ(c.seeded_evolution().rng_seed, 9u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RoundTripsThroughJson) {
  const TrialConfig c = small_trial("config_rt");
  const TrialConfig back = trial_config_from_json(trial_config_to_json(c));
  EXPECT_EQ(trial_config_to_json(back), trial_config_to_json(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(trial_config_from_json(Json::parse(R"({"map": "m", "generatons": 3})")), ConfigError);
  EXPECT_THROW(trial_config_from_json(Json::parse(R"({"map": "m", "physics": {"fps": 3}})")), ConfigError);
  EXPECT_THROW(trial_config_from_json(Json::parse(R"({"generations": 3})")), ConfigError);
  EXPECT_THROW(trial_config_from_json(Json::parse(R"({"map": "m", "generations": "many"})")), ConfigError);
  EXPECT_THROW(trial_config_from_json(Json::parse(R"({"map": "m", "trace_policy": "sometimes"})")), ConfigError);
  TrialConfig c = small_trial("config_bad");
  c.starts = {"A", "C"};
  EXPECT_THROW(c.validate(), ConfigError);
  c.starts = {"A", "A"};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_trial("config_bad");
  c.map_path = "/nonexistent.map";
  EXPECT_THROW(c.validate(), Error);
}

TEST(Log, RoundTripAndSchema) {
  GenerationRecord a{0, 12.5, 3.25, 2, {{std::nullopt, false, std::nullopt}, {std::nullopt, false, std::nullopt}}, false};
  GenerationRecord b{1, 400.125, 99.0, 3, {{41.0625, true, 43.5}, {std::nullopt, false, std::nullopt}}, false};
  GenerationRecord c{2, 0.1 + 0.2, 1e-300, 1, {{40.0, false, 40.0}, {38.5, true, 38.5}}, true};
  const std::string text = format_log({"A", "B"}, {a, b, c});
  EXPECT_EQ(text.substr(0, text.find('\n')), "# xprace.generations v1");
  const GenerationLog log = parse_log(text);
  EXPECT_EQ(log.starts, (std::vector<std::string>{"A", "B"}));
  ASSERT_EQ(log.records.size(), 3u);
  EXPECT_EQ(log.records[0], a);
  EXPECT_EQ(log.records[1], b);
  EXPECT_EQ(log.records[2], c);  // shortest round-trip formatting is exact
  EXPECT_THROW(parse_log("# xprace.generations v2\n"), Error);
  EXPECT_THROW(parse_log(text.substr(0, text.size() - 3) + ",9\n"), Error);
}

TEST(TraceCsv, RoundTrip) {
  const Trace t = make_trace("B", Termination::finished, 5, {1.5, -2}, {100.125, 7});
  const std::string csv = trace_to_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "# start=B termination=finished map=oval");
  const Trace back = parse_trace_csv(csv);
  EXPECT_EQ(back.start_label, "B");
  EXPECT_EQ(back.termination, Termination::finished);
  EXPECT_EQ(back.map_name, "oval");
  ASSERT_EQ(back.rows.size(), 5u);
  EXPECT_EQ(back.rows[4].position, t.rows[4].position);
  // The comment line is optional.
  const Trace bare = parse_trace_csv(csv.substr(csv.find('\n') + 1));
  EXPECT_EQ(bare.rows.size(), 5u);
}

TEST(Trial, OneGenerationSmallPopulation) {
  TrialConfig cfg = small_trial("trial_one", 1);
  const TrialOutcome out = run_trial(cfg);
  EXPECT_TRUE(out.completed);
  ASSERT_EQ(out.records.size(), 1u);
  EXPECT_EQ(parse_log(slurp(out.run_dir / "generations.csv")).records, out.records);
  int checkpoints = 0;
  for (const auto& e : fs::directory_iterator(out.run_dir / "checkpoints")) checkpoints += e.is_regular_file();
  EXPECT_EQ(checkpoints, 1);
  EXPECT_TRUE(fs::exists(checkpoint_path(out.run_dir, 1)));
  EXPECT_TRUE(fs::exists(out.run_dir / "champion.json"));
  const Json manifest = read_json_file(out.run_dir / "manifest.json");
  EXPECT_EQ(manifest.at("completed_generations"), 1);
  EXPECT_EQ(manifest.at("map_name"), "oval");
}

TEST(Trial, RefusesToOverwriteARun) {
  TrialConfig cfg = small_trial("trial_twice", 1);
  run_trial(cfg);
  EXPECT_THROW(run_trial(cfg), Error);
}

TEST(Trial, WorkerCountDoesNotChangeTheLog) {
  TrialConfig one = small_trial("workers_1", 4, 16);
  TrialConfig many = small_trial("workers_8", 4, 16);
  many.workers = 8;
  const auto a = run_trial(one);
  const auto b = run_trial(many);
  EXPECT_EQ(slurp(a.run_dir / "generations.csv"), slurp(b.run_dir / "generations.csv"));
  EXPECT_EQ(champion_to_json(*a.champion), champion_to_json(*b.champion));
}

TEST(Trial, InterruptAndResumeReproducesTheLog) {
  const TrialConfig full = small_trial("resume_full", 6, 12);
  TrialConfig part = small_trial("resume_part", 6, 12);
  const auto a = run_trial(full);
  TrialOptions stop;
  stop.stop_after = 3;
  const auto first = run_trial(part, stop);
  EXPECT_FALSE(first.completed);
  EXPECT_EQ(first.records.size(), 3u);
  TrialOptions resume;
  resume.resume = true;
  part.workers = 3;  // allowed to change
  const auto b = run_trial(part, resume);
  EXPECT_TRUE(b.completed);
  EXPECT_EQ(slurp(a.run_dir / "generations.csv"), slurp(b.run_dir / "generations.csv"));
  EXPECT_EQ(slurp(checkpoint_path(a.run_dir, 6)), slurp(checkpoint_path(b.run_dir, 6)));
}

TEST(Trial, ResumeRejectsAChangedConfig) {
  TrialConfig cfg = small_trial("resume_changed", 2);
  run_trial(cfg);
  cfg.seed = 99;
  TrialOptions resume;
  resume.resume = true;
  EXPECT_THROW(run_trial(cfg, resume), ConfigError);
}

TEST(Trial, CorruptCheckpointNamesItsGeneration) {
  TrialConfig cfg = small_trial("corrupt", 2);
  cfg.checkpoint_interval = 1;
  run_trial(cfg);
  const fs::path cp = checkpoint_path(cfg.output_dir, 2);
  std::string text = slurp(cp);
  write_text_file(cp, text.substr(0, text.size() / 2));
  try {
    load_checkpoint(cp);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.generation(), 2);
  }
  TrialOptions resume;
  resume.resume = true;
  cfg.generations = 3;
  EXPECT_THROW(run_trial(cfg, resume), CheckpointError);
}

TEST(Trial, UnwritableOutputIsReported) {
  TrialConfig cfg = small_trial("unwritable", 1);
  const fs::path blocker = cfg.output_dir.parent_path() / "file";
  write_text_file(blocker, "x");
  cfg.output_dir = blocker / "run";
  EXPECT_THROW(run_trial(cfg), Error);
}

TEST(Trial, TracePolicies) {
  TrialConfig cfg = small_trial("traces", 2);
  cfg.trace_policy = TracePolicy::best_per_generation;
  const auto out = run_trial(cfg);
  int files = 0;
  for (const auto& e : fs::directory_iterator(out.run_dir / "traces")) {
    ++files;
    const Trace t = parse_trace_csv(slurp(e.path()));
    EXPECT_EQ(t.map_name, "oval");
    EXPECT_FALSE(t.rows.empty());
  }
  EXPECT_EQ(files, 2 * 2);  // generations x starts
}

TEST(Replay, ChampionReproducesTheLoggedFitness) {
  const TrialConfig cfg = small_trial("replay", 3);
  const auto out = run_trial(cfg);
  const Track track = cfg.validate();
  const GenomeFile gf = load_genome_file(out.run_dir / "champion.json");
  ASSERT_TRUE(gf.map_name.has_value());
  double total = 0.0;
  for (const auto& label : cfg.starts)
    total += replay(gf.genome, track, label, cfg.physics, cfg.sensors, cfg.fitness, gf.map_name).fitness;
  EXPECT_EQ(total, out.records.back().best_fitness);
  EXPECT_EQ(total, out.champion->fitness);
}

TEST(Replay, IsByteIdenticalAndChecksTheMap) {
  const TrialConfig cfg = small_trial("replay_bytes", 1);
  const auto out = run_trial(cfg);
  const Track track = cfg.validate();
  const auto& g = out.champion->genome;
  auto csv = [&] {
    return trace_to_csv(trace_from_episode(replay(g, track, "A", cfg.physics, cfg.sensors, cfg.fitness).episode, track));
  };
  EXPECT_EQ(csv(), csv());
  const Track circuit = fixtures::bundled("circuit");
  EXPECT_THROW(replay(g, circuit, "A", cfg.physics, cfg.sensors, cfg.fitness, std::string("oval")), ValidationError);
}

TEST(Render, OneTraceOnePolylineAndMarker) {
  const Track t = fixtures::bundled("oval");
  const std::string svg = render_svg({make_trace("A", Termination::collision, 10, {-40, -120}, {100, -110})}, t);
  EXPECT_EQ(count(svg, "<polyline class=\"trace\""), 1);
  EXPECT_EQ(count(svg, "class=\"terminal crash\""), 1);
  EXPECT_EQ(count(svg, "<line class=\"wall\""), static_cast<int>(t.walls().size()));
}

TEST(Render, TenTracesGiveTenPolylines) {
  const Track t = fixtures::bundled("oval");
  std::vector<Trace> traces;
  for (int i = 0; i < 10; ++i)
    traces.push_back(make_trace(i % 2 ? "A" : "B", i < 4 ? Termination::finished : Termination::stalled, 20,
                                {-40.0 + i, -120}, {0, -100.0 + i}));
  const std::string svg = render_svg(traces, t);
  EXPECT_EQ(count(svg, "<polyline class=\"trace\""), 10);
  EXPECT_EQ(count(svg, "class=\"terminal finish\""), 4);
  EXPECT_EQ(count(svg, "class=\"terminal stop\""), 6);
}

TEST(Render, InverseTransformRecoversWorldPoints) {
  const Track t = fixtures::bundled("circuit");
  Trace tr = make_trace("A", Termination::finished, 50, t.start("A").position, t.start("B").position);
  tr.map_name = "circuit";
  const std::string svg = render_svg({tr}, t);
  auto attr = [&](const std::string& name) {
    std::smatch m;
    EXPECT_TRUE(std::regex_search(svg, m, std::regex(name + "=\"([^\"]+)\"")));
    return std::stod(m[1]);
  };
  const SvgTransform xf{attr("data-min-x"), attr("data-max-y"), attr("data-scale"), attr("data-margin")};
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, std::regex("<polyline class=\"trace\"[^>]*points=\"([^\"]+)\"")));
  std::istringstream pts(m[1].str());
  std::string pair;
  std::size_t i = 0;
  while (pts >> pair) {
    const auto comma = pair.find(',');
    const Vec2 w = xf.to_world({std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1))});
    ASSERT_LT(i, tr.rows.size());
    EXPECT_LE(distance(w, tr.rows[i].position), 0.5) << i;
    ++i;
  }
  EXPECT_EQ(i, tr.rows.size());
}

TEST(Render, RejectsEmptyInputAndForeignTraces) {
  const Track t = fixtures::bundled("oval");
  EXPECT_THROW(render_svg({}, t), Error);
  EXPECT_THROW(render_svg({make_trace("A", Termination::finished, 0, {}, {})}, t), Error);
  Trace other = make_trace("A", Termination::finished, 3, {-40, -120}, {0, -120});
  other.map_name = "circuit";
  EXPECT_THROW(render_svg({other}, t), Error);
}

TEST(Render, FitnessPlotHasOneLinePerRun) {
  auto series = [](const std::string& name, std::vector<double> best) {
    FitnessSeries f{name, {}};
    for (std::size_t g = 0; g < best.size(); ++g) {
      GenerationRecord r;
      r.generation = static_cast<std::int64_t>(g);
      r.best_fitness = best[g];
      f.records.push_back(r);
    }
    return f;
  };
  const std::string svg = render_fitness_svg({series("run1", {1, 5, 7}), series("run2", {2, 3})});
  EXPECT_EQ(count(svg, "<polyline class=\"fitness\""), 2);
}
