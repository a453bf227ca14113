#pragma once

// The generational loop: evaluate (in parallel), log, speciate, reproduce,
// checkpoint. The log is a pure function of the TrialConfig; worker count
// only changes how fast it is produced.
//
// Run directory:
//   manifest.json              config, schema versions, progress
//   generations.csv            one GenerationRecord per row
//   champion.json              best genome of the last completed generation
//   checkpoints/gen_NNNNNN.json  state after NNNNNN completed generations
//   traces/                    per-policy trace CSVs

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "xprace/evaluation.hpp"
#include "xprace/harness/config.hpp"
#include "xprace/harness/log.hpp"
#include "xprace/harness/replay.hpp"
#include "xprace/neat/serialize.hpp"
#include "xprace/neat/species.hpp"

namespace xprace {

struct GenomeEvaluation {
  double fitness = 0.0;
  std::vector<EpisodeResult> episodes;  // in configured start order
};

inline GenomeEvaluation evaluate_genome(const neat::Genome& genome, const Track& track, const TrialConfig& cfg) {
  const neat::Network net(genome);
  GenomeEvaluation e;
  e.episodes.reserve(cfg.starts.size());
  for (const auto& label : cfg.starts)
    e.episodes.push_back(run_episode(net, track, track.start(label), cfg.physics, cfg.sensors, cfg.fitness));
  e.fitness = total_fitness(e.episodes, cfg.starts, cfg.fitness);
  return e;
}

/// Workers claim genome indices from a shared counter and write into
/// their own result slot, so the output order never depends on timing.
inline std::vector<GenomeEvaluation> evaluate_population(const std::vector<neat::Genome>& genomes, const Track& track,
                                                         const TrialConfig& cfg, int workers) {
  std::vector<GenomeEvaluation> out(genomes.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(1, workers)));
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = next++; i < genomes.size(); i = next++) out[i] = evaluate_genome(genomes[i], track, cfg);
    } catch (...) {
      errors[w] = std::current_exception();
      next = genomes.size();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, static_cast<std::size_t>(w));
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline Json record_to_json(const GenerationRecord& r) {
  Json starts = Json::array();
  for (const auto& s : r.starts)
    starts.push_back({{"best_lap", s.best_lap ? Json(*s.best_lap) : Json(nullptr)},
                      {"first_completion", s.first_completion},
                      {"champion_lap", s.champion_lap ? Json(*s.champion_lap) : Json(nullptr)}});
  return {{"generation", r.generation},       {"best_fitness", r.best_fitness},
          {"mean_fitness", r.mean_fitness},   {"species_count", r.species_count},
          {"starts", std::move(starts)},      {"champion_finished_all", r.champion_finished_all}};
}

inline GenerationRecord record_from_json(const Json& j) {
  GenerationRecord r;
  r.generation = j.at("generation").get<std::int64_t>();
  r.best_fitness = j.at("best_fitness").get<double>();
  r.mean_fitness = j.at("mean_fitness").get<double>();
  r.species_count = j.at("species_count").get<int>();
  for (const auto& s : j.at("starts")) {
    StartStats st;
    if (!s.at("best_lap").is_null()) st.best_lap = s.at("best_lap").get<double>();
    st.first_completion = s.at("first_completion").get<bool>();
    if (!s.at("champion_lap").is_null()) st.champion_lap = s.at("champion_lap").get<double>();
    r.starts.push_back(st);
  }
  r.champion_finished_all = j.at("champion_finished_all").get<bool>();
  return r;
}

struct Checkpoint {
  neat::Population population;
  std::vector<GenerationRecord> records;
  std::optional<Champion> champion;
};

inline constexpr int kCheckpointVersion = 1;

inline Json checkpoint_to_json(const neat::Population& pop, const std::vector<GenerationRecord>& records,
                               const std::optional<Champion>& champion) {
  Json recs = Json::array();
  for (const auto& r : records) recs.push_back(record_to_json(r));
  return {{"format", "xprace.checkpoint"},
          {"version", kCheckpointVersion},
          {"completed_generations", pop.generation()},
          {"population", neat::population_to_json(pop)},
          {"records", std::move(recs)},
          {"champion", champion ? champion_to_json(*champion) : Json(nullptr)}};
}

inline std::filesystem::path checkpoint_path(const std::filesystem::path& run_dir, std::uint64_t completed) {
  char name[32];
  std::snprintf(name, sizeof name, "gen_%06llu.json", static_cast<unsigned long long>(completed));
  return run_dir / "checkpoints" / name;
}

/// Generation number encoded in a checkpoint file name, if it is one.
inline std::optional<std::int64_t> checkpoint_generation(const std::filesystem::path& p) {
  const std::string name = p.filename().string();
  if (name.size() != 15 || name.rfind("gen_", 0) != 0 || name.substr(10) != ".json") return std::nullopt;
  std::int64_t g = 0;
  for (char c : name.substr(4, 6)) {
    if (c < '0' || c > '9') return std::nullopt;
    g = g * 10 + (c - '0');
  }
  return g;
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::int64_t gen = checkpoint_generation(path).value_or(-1);
  try {
    const Json j = Json::parse(read_text_file(path.string()));
    if (j.value("format", std::string{}) != "xprace.checkpoint" || j.at("version").get<int>() != kCheckpointVersion)
      throw CheckpointError(gen, "not a version-1 checkpoint");
    Checkpoint c{neat::population_from_json(j.at("population")), {}, std::nullopt};
    for (const auto& r : j.at("records")) c.records.push_back(record_from_json(r));
    if (!j.at("champion").is_null()) c.champion = champion_from_json(j.at("champion"));
    if (j.at("completed_generations").get<std::uint64_t>() != c.population.generation() ||
        c.records.size() != c.population.generation())
      throw CheckpointError(gen, "generation counters disagree");
    for (std::size_t i = 0; i < c.records.size(); ++i)
      if (c.records[i].generation != static_cast<std::int64_t>(i))
        throw CheckpointError(gen, "records out of sequence");
    return c;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(gen, e.what());
  }
}

inline std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& run_dir) {
  const auto dir = run_dir / "checkpoints";
  if (!std::filesystem::is_directory(dir)) return std::nullopt;
  std::optional<std::filesystem::path> best;
  std::int64_t best_gen = -1;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto g = checkpoint_generation(entry.path());
    if (g && *g > best_gen) {
      best_gen = *g;
      best = entry.path();
    }
  }
  return best;
}

struct TrialOptions {
  bool resume = false;
  std::optional<int> stop_after;  // generations to run in this call before checkpointing and returning
  std::function<void(const GenerationRecord&)> on_record;
  // Sees the evaluated, speciated population before it reproduces.
  std::function<void(const neat::Population&, const std::vector<GenomeEvaluation>&, const GenerationRecord&)>
      on_generation;
};

struct TrialOutcome {
  std::filesystem::path run_dir;
  std::vector<GenerationRecord> records;
  std::optional<Champion> champion;
  bool completed = false;  // reached cfg.generations
};

namespace detail {

/// Config fields that may change between a run and its resumption.
inline Json resumable_identity(Json config) {
  config.erase("generations");
  config.erase("workers");
  config.erase("output_dir");
  return config;
}

inline Json manifest_json(const TrialConfig& cfg, const Track& track, std::uint64_t completed) {
  return {{"format", "xprace.run"},
          {"version", 1},
          {"log_schema_version", kLogSchemaVersion},
          {"checkpoint_version", kCheckpointVersion},
          {"sensor_table_version", kSensorTableVersion},
          {"map_name", track.name()},
          {"completed_generations", completed},
          {"config", trial_config_to_json(cfg)}};
}

inline void write_traces(const std::filesystem::path& dir, std::int64_t generation, std::size_t genome_index,
                         const neat::Genome& genome, const Track& track, const TrialConfig& cfg) {
  const neat::Network net(genome);
  for (const auto& label : cfg.starts) {
    const EpisodeResult r = run_episode(net, track, track.start(label), cfg.physics, cfg.sensors, cfg.fitness, true);
    char name[96];
    std::snprintf(name, sizeof name, "gen_%06lld_g%04zu_%s.csv", static_cast<long long>(generation), genome_index,
                  label.c_str());
    write_text_file(dir / name, trace_to_csv(trace_from_episode(r, track)));
  }
}

}  // namespace detail

inline TrialOutcome run_trial(const TrialConfig& cfg, const TrialOptions& opts = {}) {
  namespace fs = std::filesystem;
  const Track track = cfg.validate();
  const fs::path run_dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(run_dir / "checkpoints", ec);
  if (ec) throw Error("cannot create run directory " + run_dir.string() + ": " + ec.message());
  if (cfg.trace_policy != TracePolicy::never) fs::create_directories(run_dir / "traces", ec);
  if (ec) throw Error("cannot create " + (run_dir / "traces").string() + ": " + ec.message());

  std::optional<neat::Population> pop;
  TrialOutcome outcome;
  outcome.run_dir = run_dir;

  const auto existing = latest_checkpoint(run_dir);
  if (opts.resume) {
    if (!existing) throw Error("nothing to resume in " + run_dir.string());
    const Json manifest = read_json_file(run_dir / "manifest.json");
    if (detail::resumable_identity(manifest.at("config")) != detail::resumable_identity(trial_config_to_json(cfg)))
      throw ConfigError("config differs from the run being resumed (only generations and workers may change)");
    Checkpoint c = load_checkpoint(*existing);
    pop.emplace(std::move(c.population));
    outcome.records = std::move(c.records);
    outcome.champion = std::move(c.champion);
  } else {
    if (existing || fs::exists(run_dir / "generations.csv"))
      throw Error("run directory " + run_dir.string() + " already holds a run (use resume)");
    pop.emplace(cfg.seeded_evolution());
  }

  const fs::path log_path = run_dir / "generations.csv";
  write_text_file(log_path, format_log(cfg.starts, outcome.records));
  std::ofstream log(log_path, std::ios::binary | std::ios::app);
  if (!log) throw Error("cannot write " + log_path.string());
  write_text_file_atomic(run_dir / "manifest.json", detail::manifest_json(cfg, track, pop->generation()).dump(2));

  std::vector<bool> seen_finish(cfg.starts.size(), false);
  for (const auto& r : outcome.records)
    for (std::size_t s = 0; s < r.starts.size() && s < seen_finish.size(); ++s)
      seen_finish[s] = seen_finish[s] || r.starts[s].best_lap.has_value();

  auto save = [&] {
    write_text_file_atomic(checkpoint_path(run_dir, pop->generation()),
                           checkpoint_to_json(*pop, outcome.records, outcome.champion).dump());
    if (outcome.champion) write_text_file_atomic(run_dir / "champion.json", champion_to_json(*outcome.champion).dump(2));
    write_text_file_atomic(run_dir / "manifest.json", detail::manifest_json(cfg, track, pop->generation()).dump(2));
  };

  int ran = 0;
  while (pop->generation() < static_cast<std::uint64_t>(cfg.generations) && (!opts.stop_after || ran < *opts.stop_after)) {
    const auto g = static_cast<std::int64_t>(pop->generation());
    auto& genomes = pop->genomes();
    const auto evals = evaluate_population(genomes, track, cfg, cfg.workers);

    std::size_t best = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < genomes.size(); ++i) {
      genomes[i].fitness = evals[i].fitness;
      sum += evals[i].fitness;
      if (evals[i].fitness > evals[best].fitness) best = i;
    }
    pop->speciate();

    GenerationRecord rec;
    rec.generation = g;
    rec.best_fitness = evals[best].fitness;
    rec.mean_fitness = sum / static_cast<double>(genomes.size());
    rec.species_count = static_cast<int>(pop->species().size());
    rec.champion_finished_all = true;
    for (std::size_t s = 0; s < cfg.starts.size(); ++s) {
      StartStats st;
      for (const auto& e : evals) {
        const auto& lap = e.episodes[s].lap_time;
        if (lap && (!st.best_lap || *lap < *st.best_lap)) st.best_lap = lap;
      }
      st.first_completion = st.best_lap && !seen_finish[s];
      seen_finish[s] = seen_finish[s] || st.best_lap.has_value();
      st.champion_lap = evals[best].episodes[s].lap_time;
      rec.champion_finished_all = rec.champion_finished_all && st.champion_lap.has_value();
      rec.starts.push_back(st);
    }
    outcome.champion = Champion{genomes[best], evals[best].fitness, g, track.name()};

    if (cfg.trace_policy == TracePolicy::best_per_generation) {
      detail::write_traces(run_dir / "traces", g, best, genomes[best], track, cfg);
    } else if (cfg.trace_policy == TracePolicy::top_k_per_species) {
      for (const auto& sp : pop->species()) {
        std::vector<std::size_t> idx = sp.member_indices;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return evals[a].fitness > evals[b].fitness; });
        for (std::size_t k = 0; k < idx.size() && k < static_cast<std::size_t>(cfg.trace_top_k); ++k)
          detail::write_traces(run_dir / "traces", g, idx[k], genomes[idx[k]], track, cfg);
      }
    }

    log << log_row(rec);
    log.flush();
    if (!log) throw Error("cannot write " + log_path.string());
    outcome.records.push_back(rec);
    if (opts.on_record) opts.on_record(rec);
    if (opts.on_generation) opts.on_generation(*pop, evals, rec);

    pop->reproduce();
    ++ran;
    const bool last = pop->generation() >= static_cast<std::uint64_t>(cfg.generations) ||
                      (opts.stop_after && ran >= *opts.stop_after);
    if (pop->generation() % static_cast<std::uint64_t>(cfg.checkpoint_interval) == 0 || last) save();
  }
  outcome.completed = pop->generation() >= static_cast<std::uint64_t>(cfg.generations);
  return outcome;
}

}  // namespace xprace
