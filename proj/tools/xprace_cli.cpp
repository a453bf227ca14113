// xprace command-line entry point.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xprace/xprace.hpp"

namespace fs = std::filesystem;
using namespace xprace;

namespace {

struct EpisodeConfigs {
  PhysicsConfig physics;
  SensorConfig sensors;
  FitnessConfig fitness;
};

// Only the physics, sensors and fitness sections of a trial config matter
// for replay and baseline runs.
EpisodeConfigs episode_configs(const std::string& config_path) {
  EpisodeConfigs c;
  if (config_path.empty()) return c;
  const TrialConfig t = load_trial_config(config_path);
  c.physics = t.physics;
  c.sensors = t.sensors;
  c.fitness = t.fitness;
  return c;
}

std::string fmt_seconds(const std::optional<double>& s) {
  if (!s) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *s);
  return buf;
}

int cmd_evolve(const std::string& config_path, bool resume, std::optional<int> workers, std::optional<int> generations,
               std::optional<int> stop_after, const std::string& output, bool quiet) {
  TrialConfig cfg = load_trial_config(config_path);
  if (workers) cfg.workers = *workers;
  if (generations) cfg.generations = *generations;
  if (!output.empty()) cfg.output_dir = output;
  TrialOptions opts;
  opts.resume = resume;
  opts.stop_after = stop_after;
  if (!quiet) {
    opts.on_record = [&](const GenerationRecord& r) {
      std::printf("gen %4lld  best %10.3f  mean %9.3f  species %3d", static_cast<long long>(r.generation),
                  r.best_fitness, r.mean_fitness, r.species_count);
      for (std::size_t s = 0; s < r.starts.size(); ++s)
        std::printf("  lap[%s] %s", cfg.starts[s].c_str(), fmt_seconds(r.starts[s].champion_lap).c_str());
      std::printf("\n");
      std::fflush(stdout);
    };
  }
  const TrialOutcome out = run_trial(cfg, opts);
  std::printf("%s: %zu generations logged%s\n", out.run_dir.string().c_str(), out.records.size(),
              out.completed ? "" : " (stopped early; resume to continue)");
  return 0;
}

int cmd_replay(const std::string& genome_path, const std::string& map_path, const std::string& start,
               const std::string& config_path, const std::string& out_path) {
  const GenomeFile gf = load_genome_file(genome_path);
  const Track track = load_track_file(map_path);
  const EpisodeConfigs c = episode_configs(config_path);
  const ReplayResult r = replay(gf.genome, track, start, c.physics, c.sensors, c.fitness, gf.map_name);
  const std::string csv = trace_to_csv(trace_from_episode(r.episode, track));
  if (out_path.empty() || out_path == "-") {
    std::cout << csv;
    std::cerr << "start " << start << ": " << to_string(r.episode.termination) << ", completion "
              << r.episode.completion << "%, lap " << fmt_seconds(r.episode.lap_time) << ", fitness " << r.fitness
              << "\n";
  } else {
    write_text_file(out_path, csv);
    std::printf("start %s: %s, completion %.3f%%, lap %s, fitness %.6f\n", start.c_str(),
                to_string(r.episode.termination), r.episode.completion, fmt_seconds(r.episode.lap_time).c_str(),
                r.fitness);
  }
  return 0;
}

int cmd_render(const std::vector<std::string>& trace_paths, const std::string& map_path, const std::string& out) {
  const Track track = load_track_file(map_path);
  std::vector<Trace> traces;
  for (const auto& p : trace_paths) traces.push_back(parse_trace_csv(read_text_file(p)));
  write_text_file(out, render_svg(traces, track));
  std::printf("%s: %zu traces\n", out.c_str(), traces.size());
  return 0;
}

int cmd_plot(const std::vector<std::string>& logs, const std::string& out) {
  std::vector<FitnessSeries> runs;
  for (const auto& p : logs) runs.push_back({p, parse_log(read_text_file(p)).records});
  write_text_file(out, render_fitness_svg(runs));
  std::printf("%s: %zu runs\n", out.c_str(), runs.size());
  return 0;
}

int cmd_validate_map(const std::string& map_path) {
  const Track t = load_track_file(map_path);
  std::printf("%s: ok (%zu walls, %d waypoints, %zu starts, loop %.3f, baseline %s)\n", t.name().c_str(),
              t.walls().size(), t.waypoint_count(), t.starts().size(), t.loop_length(),
              fmt_seconds(t.baseline_time()).c_str());
  return 0;
}

int cmd_baseline(const std::string& map_path, const std::string& config_path, std::optional<double> cruise,
                 bool write) {
  const std::string text = read_text_file(map_path);
  const Track track = load_track_file(map_path);
  const EpisodeConfigs c = episode_configs(config_path);
  BaselineDriverConfig driver;
  if (cruise) driver.cruise_speed = *cruise;
  const BaselineResult r = measure_baseline(track, c.physics, c.sensors, c.fitness, driver);
  for (const auto& e : r.episodes) std::fprintf(stderr, "start %s: %.3f s\n", e.start_label.c_str(), *e.lap_time);
  std::printf("%.6g\n", r.baseline_time);
  if (write) write_text_file(map_path, with_baseline_time(text, r.baseline_time));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Racing-agent neuroevolution: evolve, replay and render controllers."};
  app.require_subcommand(1);

  std::string config, genome, map, start, out;
  std::vector<std::string> files;
  bool resume = false, quiet = false, no_write = false;
  std::optional<int> workers, generations, stop_after;
  std::optional<double> cruise;

  auto* evolve = app.add_subcommand("evolve", "Run (or resume) an evolutionary trial");
  evolve->add_option("config", config, "Trial config (JSON)")->required()->check(CLI::ExistingFile);
  evolve->add_flag("--resume", resume, "Continue from the latest checkpoint in the output directory");
  evolve->add_option("--workers", workers, "Evaluation threads (overrides config)")->check(CLI::PositiveNumber);
  evolve->add_option("--generations", generations, "Total generations (overrides config)")->check(CLI::PositiveNumber);
  evolve->add_option("--stop-after", stop_after, "Stop after this many generations in this invocation")
      ->check(CLI::PositiveNumber);
  evolve->add_option("--output", out, "Run directory (overrides config)");
  evolve->add_flag("-q,--quiet", quiet, "No per-generation output");

  auto* rep = app.add_subcommand("replay", "Re-run a genome from one start and emit its trace CSV");
  rep->add_option("genome", genome, "Genome or champion file")->required()->check(CLI::ExistingFile);
  rep->add_option("map", map, "Map file")->required()->check(CLI::ExistingFile);
  rep->add_option("--start", start, "Start label")->required();
  rep->add_option("--config", config, "Trial config supplying physics/sensor/fitness settings")
      ->check(CLI::ExistingFile);
  rep->add_option("-o,--output", out, "Trace CSV path (default: stdout)");

  auto* render = app.add_subcommand("render", "Draw traces over a map as SVG");
  render->add_option("files", files, "Trace CSVs followed by the map file")->required()->expected(2, -1);
  render->add_option("-o,--output", out, "SVG path")->required();

  auto* plot = app.add_subcommand("plot", "Plot best fitness per generation from run logs as SVG");
  plot->add_option("logs", files, "generations.csv files")->required()->check(CLI::ExistingFile);
  plot->add_option("-o,--output", out, "SVG path")->required();

  auto* validate = app.add_subcommand("validate-map", "Parse and validate a map file");
  validate->add_option("map", map, "Map file")->required()->check(CLI::ExistingFile);

  auto* base = app.add_subcommand("baseline", "Measure the scripted driver's lap time and store it in the map");
  base->add_option("map", map, "Map file")->required()->check(CLI::ExistingFile);
  base->add_option("--config", config, "Trial config supplying physics/sensor/fitness settings")
      ->check(CLI::ExistingFile);
  base->add_option("--cruise", cruise, "Driver cruise speed")->check(CLI::PositiveNumber);
  base->add_flag("--no-write", no_write, "Print only; leave the map file unchanged");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "xprace: " << e.what() << "\n";
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    if (*evolve) return cmd_evolve(config, resume, workers, generations, stop_after, out, quiet);
    if (*rep) return cmd_replay(genome, map, start, config, out);
    if (*render) {
      const std::string map_path = files.back();
      files.pop_back();
      for (const auto& f : files)
        if (!fs::is_regular_file(f)) throw Error("no such trace file: " + f);
      if (!fs::is_regular_file(map_path)) throw Error("no such map file: " + map_path);
      return cmd_render(files, map_path, out);
    }
    if (*plot) return cmd_plot(files, out);
    if (*validate) return cmd_validate_map(map);
    if (*base) return cmd_baseline(map, config, cruise, !no_write);
  } catch (const std::exception& e) {
    std::cerr << "xprace: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
