#pragma once

// Versioned JSON encodings for genomes, innovation tables, species, and
// whole populations. Doubles are written with round-trip precision.

#include <string>
#include <vector>

#include "xprace/json_util.hpp"
#include "xprace/neat/genome.hpp"
#include "xprace/neat/operators.hpp"
#include "xprace/neat/species.hpp"

namespace xprace::neat {

inline constexpr int kGenomeFormatVersion = 1;

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::input: return "input";
    case NodeKind::bias: return "bias";
    case NodeKind::hidden: return "hidden";
    case NodeKind::output: return "output";
  }
  return "?";
}

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::steepened_sigmoid: return "steepened_sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::logistic: return "logistic";
  }
  return "?";
}

inline NodeKind node_kind_from(const std::string& s) {
  if (s == "input") return NodeKind::input;
  if (s == "bias") return NodeKind::bias;
  if (s == "hidden") return NodeKind::hidden;
  if (s == "output") return NodeKind::output;
  throw GenomeError("unknown node kind '" + s + "'");
}

inline Activation activation_from(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "steepened_sigmoid") return Activation::steepened_sigmoid;
  if (s == "tanh") return Activation::tanh;
  if (s == "logistic") return Activation::logistic;
  throw GenomeError("unknown activation '" + s + "'");
}

inline Json genome_to_json(const Genome& g) {
  Json nodes = Json::array();
  for (const auto& n : g.nodes) nodes.push_back({n.id, to_string(n.kind), to_string(n.activation)});
  Json conns = Json::array();
  for (const auto& c : g.connections) conns.push_back({c.innovation, c.in_node, c.out_node, c.weight, c.enabled});
  Json j = {{"format", "xprace.genome"},
            {"version", kGenomeFormatVersion},
            {"inputs", kInputCount},
            {"outputs", kOutputCount},
            {"node_fields", {"id", "kind", "activation"}},
            {"connection_fields", {"innovation", "in", "out", "weight", "enabled"}},
            {"nodes", std::move(nodes)},
            {"connections", std::move(conns)}};
  j["fitness"] = g.fitness ? Json(*g.fitness) : Json(nullptr);
  return j;
}

inline Genome genome_from_json(const Json& j) {
  try {
    if (j.value("format", std::string{}) != "xprace.genome") throw GenomeError("not a genome document");
    if (j.at("version").get<int>() != kGenomeFormatVersion)
      throw GenomeError("unsupported genome version " + j.at("version").dump());
    if (j.at("inputs").get<int>() != kInputCount || j.at("outputs").get<int>() != kOutputCount)
      throw GenomeError("genome arity " + j.at("inputs").dump() + "/" + j.at("outputs").dump() + " does not match " +
                        std::to_string(kInputCount) + "/" + std::to_string(kOutputCount));
    Genome g;
    for (const auto& n : j.at("nodes"))
      g.nodes.push_back({n.at(0).get<int>(), node_kind_from(n.at(1).get<std::string>()),
                         activation_from(n.at(2).get<std::string>())});
    for (const auto& c : j.at("connections"))
      g.connections.push_back({c.at(1).get<int>(), c.at(2).get<int>(), c.at(3).get<double>(), c.at(4).get<bool>(),
                               c.at(0).get<int>()});
    if (j.contains("fitness") && !j.at("fitness").is_null()) g.fitness = j.at("fitness").get<double>();
    validate_genome(g);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw GenomeError(std::string("malformed genome: ") + e.what());
  }
}

inline Json innovations_to_json(const InnovationTable& t) {
  Json conns = Json::array();
  for (const auto& [key, innov] : t.connections()) conns.push_back({key.first, key.second, innov});
  Json splits = Json::array();
  for (const auto& [innov, ids] : t.splits()) splits.push_back({innov, ids});
  return {{"next_innovation", t.next_innovation()},
          {"next_node_id", t.next_node_id()},
          {"connections", std::move(conns)},
          {"splits", std::move(splits)}};
}

inline InnovationTable innovations_from_json(const Json& j) {
  std::map<std::pair<int, int>, int> conns;
  for (const auto& c : j.at("connections")) conns[{c.at(0).get<int>(), c.at(1).get<int>()}] = c.at(2).get<int>();
  std::map<int, std::vector<int>> splits;
  for (const auto& s : j.at("splits")) splits[s.at(0).get<int>()] = s.at(1).get<std::vector<int>>();
  InnovationTable t;
  t.restore(std::move(conns), std::move(splits), j.at("next_innovation").get<int>(), j.at("next_node_id").get<int>());
  return t;
}

inline Json evolution_config_to_json(const EvolutionConfig& c) {
  return {{"population_size", c.population_size},
          {"stagnation_limit", c.stagnation_limit},
          {"elitism", c.elitism},
          {"min_species_floor", c.min_species_floor},
          {"compatibility_threshold", c.compatibility_threshold},
          {"compat_coeffs", {{"excess", c.compat_coeffs.excess}, {"disjoint", c.compat_coeffs.disjoint}, {"weight", c.compat_coeffs.weight}}},
          {"weight_mutate_prob", c.weight_mutate_prob},
          {"weight_perturb_sigma", c.weight_perturb_sigma},
          {"weight_replace_prob", c.weight_replace_prob},
          {"weight_limit", c.weight_limit},
          {"add_connection_prob", c.add_connection_prob},
          {"add_node_prob", c.add_node_prob},
          {"toggle_enable_prob", c.toggle_enable_prob},
          {"crossover_prob", c.crossover_prob},
          {"tournament_size", c.tournament_size},
          {"initial_connection_density", c.initial_connection_density},
          {"hidden_layers", c.hidden_layers},
          {"rng_seed", c.rng_seed}};
}

inline EvolutionConfig evolution_config_from_json(const Json& j) {
  EvolutionConfig c;
  JsonFields f(j, "evolution");
  f.allow_only({"population_size", "stagnation_limit", "elitism", "min_species_floor", "compatibility_threshold",
                "compat_coeffs", "weight_mutate_prob", "weight_perturb_sigma", "weight_replace_prob", "weight_limit",
                "add_connection_prob", "add_node_prob", "toggle_enable_prob", "crossover_prob", "tournament_size",
                "initial_connection_density", "hidden_layers", "rng_seed"});
  f.get("population_size", c.population_size);
  f.get("stagnation_limit", c.stagnation_limit);
  f.get("elitism", c.elitism);
  f.get("min_species_floor", c.min_species_floor);
  f.get("compatibility_threshold", c.compatibility_threshold);
  if (const Json* k = f.find("compat_coeffs")) {
    JsonFields kf(*k, "evolution.compat_coeffs");
    kf.allow_only({"excess", "disjoint", "weight"});
    kf.get("excess", c.compat_coeffs.excess);
    kf.get("disjoint", c.compat_coeffs.disjoint);
    kf.get("weight", c.compat_coeffs.weight);
  }
  f.get("weight_mutate_prob", c.weight_mutate_prob);
  f.get("weight_perturb_sigma", c.weight_perturb_sigma);
  f.get("weight_replace_prob", c.weight_replace_prob);
  f.get("weight_limit", c.weight_limit);
  f.get("add_connection_prob", c.add_connection_prob);
  f.get("add_node_prob", c.add_node_prob);
  f.get("toggle_enable_prob", c.toggle_enable_prob);
  f.get("crossover_prob", c.crossover_prob);
  f.get("tournament_size", c.tournament_size);
  f.get("initial_connection_density", c.initial_connection_density);
  f.get("hidden_layers", c.hidden_layers);
  f.get("rng_seed", c.rng_seed);
  c.validate();
  return c;
}

inline Json population_to_json(const Population& p) {
  Json genomes = Json::array();
  for (const auto& g : p.genomes()) genomes.push_back(genome_to_json(g));
  Json species = Json::array();
  for (const auto& s : p.species()) {
    species.push_back({{"id", s.id},
                       {"representative", genome_to_json(s.representative)},
                       {"best_fitness_ever", s.best_fitness_ever},
                       {"generations_since_improvement", s.generations_since_improvement}});
  }
  return {{"format", "xprace.population"},
          {"version", 1},
          {"generation", p.generation()},
          {"next_species_id", p.next_species_id()},
          {"config", evolution_config_to_json(p.config())},
          {"innovations", innovations_to_json(p.innovations())},
          {"species", std::move(species)},
          {"genomes", std::move(genomes)}};
}

inline Population population_from_json(const Json& j) {
  try {
    if (j.value("format", std::string{}) != "xprace.population" || j.at("version").get<int>() != 1)
      throw GenomeError("not a version-1 population document");
    std::vector<Genome> genomes;
    for (const auto& g : j.at("genomes")) genomes.push_back(genome_from_json(g));
    std::vector<Species> species;
    for (const auto& s : j.at("species")) {
      Species sp;
      sp.id = s.at("id").get<int>();
      sp.representative = genome_from_json(s.at("representative"));
      sp.best_fitness_ever = s.at("best_fitness_ever").get<double>();
      sp.generations_since_improvement = s.at("generations_since_improvement").get<int>();
      species.push_back(std::move(sp));
    }
    return Population(evolution_config_from_json(j.at("config")), std::move(genomes), std::move(species),
                      innovations_from_json(j.at("innovations")), j.at("generation").get<std::uint64_t>(),
                      j.at("next_species_id").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw GenomeError(std::string("malformed population: ") + e.what());
  }
}

}  // namespace xprace::neat
