#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "xprace/errors.hpp"
#include "xprace/neat/genome.hpp"
#include "xprace/neat/operators.hpp"

namespace xprace::neat {

struct Species {
  int id = 0;
  Genome representative;
  std::vector<Genome> members;
  std::vector<std::size_t> member_indices;  // positions in the speciated population
  double best_fitness_ever = -std::numeric_limits<double>::infinity();
  int generations_since_improvement = 0;

  double best_member_fitness() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : members) best = std::max(best, m.fitness.value_or(best));
    return best;
  }
};

/// Assigns every genome to the first species whose representative lies
/// within the compatibility threshold, founding species as needed. Empty
/// species are dropped; each survivor's next representative is the member
/// closest to its current one. Stagnation counters are updated here.
inline std::vector<Species> speciate(const std::vector<Genome>& population, const std::vector<Species>& previous,
                                     const EvolutionConfig& cfg, int& next_species_id) {
  std::vector<Species> species;
  species.reserve(previous.size());
  for (const auto& p : previous) {
    Species s;
    s.id = p.id;
    s.representative = p.representative;
    s.best_fitness_ever = p.best_fitness_ever;
    s.generations_since_improvement = p.generations_since_improvement;
    species.push_back(std::move(s));
  }

  for (std::size_t i = 0; i < population.size(); ++i) {
    const Genome& g = population[i];
    if (!g.fitness) throw GenomeError("speciate needs evaluated genomes");
    bool placed = false;
    for (auto& s : species) {
      if (compatibility(g, s.representative, cfg.compat_coeffs) < cfg.compatibility_threshold) {
        s.members.push_back(g);
        s.member_indices.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) {
      Species s;
      s.id = next_species_id++;
      s.representative = g;
      s.members.push_back(g);
      s.member_indices.push_back(i);
      species.push_back(std::move(s));
    }
  }

  std::erase_if(species, [](const Species& s) { return s.members.empty(); });

  for (auto& s : species) {
    std::size_t closest = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.members.size(); ++k) {
      const double d = compatibility(s.members[k], s.representative, cfg.compat_coeffs);
      if (d < best_d) {
        best_d = d;
        closest = k;
      }
    }
    s.representative = s.members[closest];
    s.representative.fitness.reset();

    const double current = s.best_member_fitness();
    if (current > s.best_fitness_ever) {
      s.best_fitness_ever = current;
      s.generations_since_improvement = 0;
    } else {
      ++s.generations_since_improvement;
    }
  }
  return species;
}

namespace detail {

inline std::vector<std::size_t> rank_by_best(const std::vector<Species>& species) {
  std::vector<std::size_t> order(species.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = species[a].best_member_fitness(), fb = species[b].best_member_fitness();
    if (fa != fb) return fa > fb;
    return species[a].id < species[b].id;
  });
  return order;
}

/// Offspring counts summing to `total`. Every species first receives
/// min(elitism, size) slots (best species first, while budget lasts); the
/// rest is split by mean shared fitness with largest-remainder rounding.
inline std::vector<int> allocate_quotas(const std::vector<Species>& species, int total, int elitism) {
  const std::size_t n = species.size();
  std::vector<int> quota(n, 0);
  std::vector<double> share(n, 0.0);

  double min_fit = std::numeric_limits<double>::infinity();
  for (const auto& s : species)
    for (const auto& m : s.members) min_fit = std::min(min_fit, *m.fitness);
  const double shift = min_fit < 0.0 ? -min_fit : 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& m : species[i].members) acc += *m.fitness + shift;
    share[i] = acc / static_cast<double>(species[i].members.size());
    sum += share[i];
  }
  for (std::size_t i = 0; i < n; ++i) share[i] = sum > 0.0 ? share[i] / sum * total : static_cast<double>(total) / n;

  int budget = total;
  for (std::size_t i : rank_by_best(species)) {
    const int want = std::max(1, std::min(elitism, static_cast<int>(species[i].members.size())));
    quota[i] = std::min(want, budget);
    budget -= quota[i];
  }

  std::vector<double> extra(n, 0.0);
  double extra_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    extra[i] = std::max(0.0, share[i] - quota[i]);
    extra_sum += extra[i];
  }
  if (budget > 0) {
    if (extra_sum <= 0.0) std::fill(extra.begin(), extra.end(), 1.0), extra_sum = static_cast<double>(n);
    std::vector<double> exact(n), frac(n);
    int given = 0;
    for (std::size_t i = 0; i < n; ++i) {
      exact[i] = extra[i] / extra_sum * budget;
      const int whole = static_cast<int>(std::floor(exact[i]));
      quota[i] += whole;
      given += whole;
      frac[i] = exact[i] - whole;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t k = 0; given < budget; k = (k + 1) % n, ++given) ++quota[order[k]];
  }
  return quota;
}

inline const Genome& tournament(const std::vector<Genome>& members, int size, Rng& rng) {
  std::size_t best = pick_index(rng, members.size());
  for (int k = 1; k < size; ++k) {
    const std::size_t c = pick_index(rng, members.size());
    if (*members[c].fitness > *members[best].fitness || (*members[c].fitness == *members[best].fitness && c < best))
      best = c;
  }
  return members[best];
}

}  // namespace detail

/// Removes stagnant species (see the floor rule below),
/// then breeds exactly `population_size` genomes: unchanged elites first,
/// then tournament-selected crossover/mutation offspring. Child k of this
/// generation draws from its own stream derive_rng(seed, generation, k).
inline std::vector<Genome> reproduce(std::vector<Species>& species, const EvolutionConfig& cfg, InnovationTable& table,
                                     std::uint64_t seed, std::uint64_t generation) {
  if (species.empty()) throw GenomeError("reproduce needs at least one species");
  for (const auto& s : species)
    for (const auto& m : s.members)
      if (!m.fitness) throw GenomeError("reproduce needs evaluated genomes");

  // Stagnant species go, except that the best-ranked stagnant ones are
  // readmitted while fewer than min_species_floor (at least one) survive.
  // The species holding the population champion always stays, so the
  // elite copy keeps the best fitness from dropping.
  {
    const auto ranked = detail::rank_by_best(species);
    std::vector<bool> keep(species.size(), true);
    int kept = 0;
    for (std::size_t i = 0; i < species.size(); ++i) {
      keep[i] = species[i].generations_since_improvement < cfg.stagnation_limit || i == ranked.front();
      kept += keep[i];
    }
    const int floor = std::max(1, cfg.min_species_floor);
    for (std::size_t r = 0; r < ranked.size() && kept < floor; ++r)
      if (!keep[ranked[r]]) keep[ranked[r]] = true, ++kept;
    std::vector<Species> survivors;
    for (std::size_t i = 0; i < species.size(); ++i)
      if (keep[i]) survivors.push_back(std::move(species[i]));
    species = std::move(survivors);
  }

  const auto quota = detail::allocate_quotas(species, cfg.population_size, cfg.elitism);
  std::vector<Genome> next;
  next.reserve(static_cast<std::size_t>(cfg.population_size));
  for (std::size_t si = 0; si < species.size(); ++si) {
    auto& s = species[si];
    std::vector<Genome> ranked = s.members;
    std::stable_sort(ranked.begin(), ranked.end(), [](const Genome& a, const Genome& b) { return *a.fitness > *b.fitness; });

    const int elites = std::min({cfg.elitism, quota[si], static_cast<int>(ranked.size())});
    for (int e = 0; e < elites; ++e) next.push_back(ranked[static_cast<std::size_t>(e)]);

    for (int k = elites; k < quota[si]; ++k) {
      Rng rng = derive_rng(seed, generation, next.size());
      const Genome& p1 = detail::tournament(ranked, cfg.tournament_size, rng);
      Genome child;
      if (ranked.size() > 1 && chance(rng, cfg.crossover_prob)) {
        const Genome* p2 = &detail::tournament(ranked, cfg.tournament_size, rng);
        for (int retry = 0; retry < 3 && p2 == &p1; ++retry) p2 = &detail::tournament(ranked, cfg.tournament_size, rng);
        child = crossover(p1, *p2, rng);
      } else {
        child = p1;
      }
      child = mutate(std::move(child), table, cfg, rng);
      child.fitness.reset();
      next.push_back(std::move(child));
    }
  }
  return next;
}

/// Generational state: genomes, species, and the innovation table.
class Population {
 public:
  static constexpr std::uint64_t kInitStream = ~std::uint64_t{0};

  explicit Population(EvolutionConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    Rng rng = derive_rng(cfg_.rng_seed, kInitStream);
    genomes_ = initial_population(cfg_, table_, rng);
  }

  Population(EvolutionConfig cfg, std::vector<Genome> genomes, std::vector<Species> species, InnovationTable table,
             std::uint64_t generation, int next_species_id)
      : cfg_(std::move(cfg)),
        genomes_(std::move(genomes)),
        species_(std::move(species)),
        table_(std::move(table)),
        generation_(generation),
        next_species_id_(next_species_id) {}

  const EvolutionConfig& config() const noexcept { return cfg_; }
  std::vector<Genome>& genomes() noexcept { return genomes_; }
  const std::vector<Genome>& genomes() const noexcept { return genomes_; }
  const std::vector<Species>& species() const noexcept { return species_; }
  const InnovationTable& innovations() const noexcept { return table_; }
  std::uint64_t generation() const noexcept { return generation_; }
  int next_species_id() const noexcept { return next_species_id_; }

  /// Requires every genome to carry a fitness.
  void speciate() { species_ = neat::speciate(genomes_, species_, cfg_, next_species_id_); }

  void reproduce() {
    genomes_ = neat::reproduce(species_, cfg_, table_, cfg_.rng_seed, generation_);
    for (auto& s : species_) {
      s.members.clear();
      s.member_indices.clear();
    }
    ++generation_;
  }

  void advance() {
    speciate();
    reproduce();
  }

 private:
  EvolutionConfig cfg_;
  std::vector<Genome> genomes_;
  std::vector<Species> species_;
  InnovationTable table_;
  std::uint64_t generation_ = 0;
  int next_species_id_ = 0;
};

}  // namespace xprace::neat
