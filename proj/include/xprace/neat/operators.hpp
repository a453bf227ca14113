#pragma once

// Genetic operators: layered initial topology, structural and weight
// mutation, crossover and the compatibility distance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "xprace/errors.hpp"
#include "xprace/neat/genome.hpp"

namespace xprace::neat {

struct CompatibilityCoeffs {
  double excess = 1.0;    // c1
  double disjoint = 1.0;  // c2
  double weight = 0.4;    // c3
};

struct EvolutionConfig {
  int population_size = 200;
  int stagnation_limit = 50;
  int elitism = 4;
  int min_species_floor = 3;
  double compatibility_threshold = 3.0;
  CompatibilityCoeffs compat_coeffs;

  double weight_mutate_prob = 0.8;
  double weight_perturb_sigma = 0.5;
  double weight_replace_prob = 0.1;
  double weight_limit = 8.0;
  double add_connection_prob = 0.05;
  double add_node_prob = 0.03;
  double toggle_enable_prob = 0.01;

  double crossover_prob = 0.75;
  int tournament_size = 3;

  double initial_connection_density = 0.5;
  std::vector<int> hidden_layers{12, 8};
  std::uint64_t rng_seed = 1;

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("evolution.") + name + " must be in [0, 1]");
    };
    if (population_size < 1) throw ConfigError("evolution.population_size must be >= 1");
    if (elitism < 0) throw ConfigError("evolution.elitism must be >= 0");
    if (min_species_floor < 0) throw ConfigError("evolution.min_species_floor must be >= 0");
    if (stagnation_limit < 1) throw ConfigError("evolution.stagnation_limit must be >= 1");
    if (population_size < elitism * std::max(1, min_species_floor))
      throw ConfigError("evolution.population_size must be >= elitism * min_species_floor");
    if (!(compatibility_threshold >= 0.0)) throw ConfigError("evolution.compatibility_threshold must be >= 0");
    prob(weight_mutate_prob, "weight_mutate_prob");
    prob(weight_replace_prob, "weight_replace_prob");
    prob(add_connection_prob, "add_connection_prob");
    prob(add_node_prob, "add_node_prob");
    prob(toggle_enable_prob, "toggle_enable_prob");
    prob(crossover_prob, "crossover_prob");
    if (!(weight_perturb_sigma >= 0.0)) throw ConfigError("evolution.weight_perturb_sigma must be >= 0");
    if (!(weight_limit > 0.0)) throw ConfigError("evolution.weight_limit must be positive");
    if (tournament_size < 1) throw ConfigError("evolution.tournament_size must be >= 1");
    if (!(initial_connection_density > 0.0 && initial_connection_density <= 1.0))
      throw ConfigError("evolution.initial_connection_density must be in (0, 1]");
    for (int w : hidden_layers)
      if (w < 1) throw ConfigError("evolution.hidden_layers widths must be >= 1");
  }
};

// ---------------------------------------------------------------------------

namespace detail {

inline bool outputs_reachable(const Genome& g) {
  for (int out : {kTurnOutput, kThrustOutput}) {
    bool ok = false;
    for (int in = 0; in <= kBiasNode && !ok; ++in) ok = reaches(g, in, out, true);
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

/// Inputs+bias -> hidden layers -> outputs, each adjacent-layer link present
/// with probability `initial_connection_density`. Genomes where an output is
/// unreachable are re-rolled.
inline std::vector<Genome> initial_population(const EvolutionConfig& cfg, InnovationTable& table, Rng& rng) {
  cfg.validate();
  std::vector<std::vector<int>> layers;
  std::vector<int> first;
  for (int i = 0; i <= kBiasNode; ++i) first.push_back(i);
  layers.push_back(first);
  for (int width : cfg.hidden_layers) {
    std::vector<int> layer;
    for (int k = 0; k < width; ++k) layer.push_back(table.new_node_id());
    layers.push_back(layer);
  }
  layers.push_back({kTurnOutput, kThrustOutput});

  // Register every potential link up front so innovation ids do not depend
  // on which genome happened to sample a link first.
  std::vector<std::pair<int, int>> links;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    for (int a : layers[l])
      for (int b : layers[l + 1]) {
        table.connection(a, b);
        links.push_back({a, b});
      }

  constexpr int kMaxRerolls = 10000;
  std::vector<Genome> population;
  population.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i) {
    Genome g;
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kMaxRerolls) throw ConfigError("initial_connection_density too low to reach the outputs");
      g = minimal_genome();
      for (std::size_t l = 1; l + 1 < layers.size(); ++l)
        for (int id : layers[l]) g.add_node({id, NodeKind::hidden, Activation::steepened_sigmoid});
      for (auto [a, b] : links) {
        if (!chance(rng, cfg.initial_connection_density)) continue;
        g.add_connection({a, b, uniform(rng, -1.0, 1.0), true, *table.find_connection(a, b)});
      }
      if (detail::outputs_reachable(g)) break;
    }
    population.push_back(std::move(g));
  }
  return population;
}

// ---------------------------------------------------------------------------

inline void mutate_weights(Genome& g, const EvolutionConfig& cfg, Rng& rng) {
  std::normal_distribution<double> perturb(0.0, cfg.weight_perturb_sigma);
  for (auto& c : g.connections) {
    if (chance(rng, cfg.weight_replace_prob)) c.weight = uniform(rng, -1.0, 1.0);
    else c.weight += perturb(rng);
    c.weight = std::clamp(c.weight, -cfg.weight_limit, cfg.weight_limit);
  }
}

/// Adds one new feed-forward connection between unconnected nodes. Returns
/// false when no candidate was found within a bounded number of draws.
inline bool mutate_add_connection(Genome& g, InnovationTable& table, Rng& rng) {
  std::vector<int> sources, targets;
  for (const auto& n : g.nodes) {
    if (n.kind != NodeKind::output) sources.push_back(n.id);
    if (n.kind == NodeKind::hidden || n.kind == NodeKind::output) targets.push_back(n.id);
  }
  if (sources.empty() || targets.empty()) return false;
  for (int attempt = 0; attempt < 32; ++attempt) {
    const int a = sources[pick_index(rng, sources.size())];
    const int b = targets[pick_index(rng, targets.size())];
    if (a == b || g.find_connection(a, b) || creates_cycle(g, a, b)) continue;
    g.add_connection({a, b, uniform(rng, -1.0, 1.0), true, table.connection(a, b)});
    return true;
  }
  return false;
}

/// Splits an enabled connection a->b into a->h (weight 1) and h->b (old
/// weight); a->b is disabled.
inline bool split_connection(Genome& g, std::size_t conn_index, InnovationTable& table) {
  ConnectionGene& old = g.connections.at(conn_index);
  if (!old.enabled) return false;
  const int a = old.in_node, b = old.out_node;
  const double w = old.weight;
  const int h = table.split_node(old.innovation, g);
  old.enabled = false;
  g.add_node({h, NodeKind::hidden, Activation::steepened_sigmoid});
  g.add_connection({a, h, 1.0, true, table.connection(a, h)});
  g.add_connection({h, b, w, true, table.connection(h, b)});
  return true;
}

inline bool mutate_add_node(Genome& g, InnovationTable& table, Rng& rng) {
  std::vector<std::size_t> enabled;
  for (std::size_t i = 0; i < g.connections.size(); ++i)
    if (g.connections[i].enabled) enabled.push_back(i);
  if (enabled.empty()) return false;
  return split_connection(g, enabled[pick_index(rng, enabled.size())], table);
}

inline Genome mutate(Genome g, InnovationTable& table, const EvolutionConfig& cfg, Rng& rng) {
  if (chance(rng, cfg.weight_mutate_prob)) mutate_weights(g, cfg, rng);
  if (chance(rng, cfg.add_connection_prob)) mutate_add_connection(g, table, rng);
  if (chance(rng, cfg.add_node_prob)) mutate_add_node(g, table, rng);
  if (!g.connections.empty() && chance(rng, cfg.toggle_enable_prob)) {
    auto& c = g.connections[pick_index(rng, g.connections.size())];
    c.enabled = !c.enabled;
  }
  return g;
}

// ---------------------------------------------------------------------------

/// Matching genes are drawn from either parent at random; disjoint and
/// excess genes come from the fitter parent, or from both when fitness ties.
/// Genes that would close a cycle in the child are dropped.
inline Genome crossover(const Genome& parent_a, const Genome& parent_b, Rng& rng) {
  if (!parent_a.fitness || !parent_b.fitness) throw GenomeError("crossover needs evaluated parents");
  const bool tie = *parent_a.fitness == *parent_b.fitness;
  const Genome& fit = *parent_a.fitness >= *parent_b.fitness ? parent_a : parent_b;
  const Genome& other = &fit == &parent_a ? parent_b : parent_a;

  std::map<int, const ConnectionGene*> other_genes;
  for (const auto& c : other.connections) other_genes[c.innovation] = &c;

  std::vector<ConnectionGene> genes;
  for (const auto& c : fit.connections) {
    auto it = other_genes.find(c.innovation);
    if (it == other_genes.end()) {
      genes.push_back(c);
      continue;
    }
    const ConnectionGene& o = *it->second;
    ConnectionGene child = chance(rng, 0.5) ? c : o;
    if (c.enabled != o.enabled) child.enabled = !chance(rng, 0.75);
    genes.push_back(child);
  }
  if (tie) {
    std::map<int, bool> in_fit;
    for (const auto& c : fit.connections) in_fit[c.innovation] = true;
    for (const auto& c : other.connections)
      if (!in_fit.count(c.innovation)) genes.push_back(c);
  }
  std::sort(genes.begin(), genes.end(), [](const auto& x, const auto& y) { return x.innovation < y.innovation; });

  Genome child = minimal_genome();
  Digraph graph;
  auto node_of = [&](int id) -> NodeGene {
    if (const auto* n = fit.find_node(id)) return *n;
    return *other.find_node(id);
  };
  for (const auto& c : genes) {
    if (child.find_connection(c.in_node, c.out_node)) continue;
    if (!child.has_node(c.in_node)) child.add_node(node_of(c.in_node));
    if (!child.has_node(c.out_node)) child.add_node(node_of(c.out_node));
    if (graph.reaches(c.out_node, c.in_node)) continue;
    graph.add_edge(c.in_node, c.out_node);
    child.connections.push_back(c);
  }
  // Keep hidden nodes of the fitter parent even when unconnected.
  for (const auto& n : fit.nodes)
    if (n.kind == NodeKind::hidden) child.add_node(n);
  return child;
}

/// delta = c1*E/N + c2*D/N + c3*mean|dw| over matching genes.
inline double compatibility(const Genome& a, const Genome& b, const CompatibilityCoeffs& k) {
  const auto& ga = a.connections;
  const auto& gb = b.connections;
  const int max_a = ga.empty() ? -1 : ga.back().innovation;
  const int max_b = gb.empty() ? -1 : gb.back().innovation;
  std::size_t i = 0, j = 0;
  int excess = 0, disjoint = 0, matching = 0;
  double wdiff = 0.0;
  while (i < ga.size() || j < gb.size()) {
    if (i < ga.size() && j < gb.size() && ga[i].innovation == gb[j].innovation) {
      ++matching;
      wdiff += std::abs(ga[i].weight - gb[j].weight);
      ++i;
      ++j;
    } else if (j >= gb.size() || (i < ga.size() && ga[i].innovation < gb[j].innovation)) {
      (ga[i].innovation > max_b ? excess : disjoint) += 1;
      ++i;
    } else {
      (gb[j].innovation > max_a ? excess : disjoint) += 1;
      ++j;
    }
  }
  const std::size_t larger = std::max(ga.size(), gb.size());
  const double n = (ga.size() < 20 && gb.size() < 20) ? 1.0 : static_cast<double>(larger);
  const double mean_w = matching > 0 ? wdiff / matching : 0.0;
  return k.excess * excess / n + k.disjoint * disjoint / n + k.weight * mean_w;
}

}  // namespace xprace::neat
