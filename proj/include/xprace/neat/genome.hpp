#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xprace/errors.hpp"

namespace xprace::neat {

inline constexpr int kInputCount = 23;
inline constexpr int kOutputCount = 2;
inline constexpr int kBiasNode = kInputCount;       // id 23
inline constexpr int kTurnOutput = kInputCount + 1;  // id 24
inline constexpr int kThrustOutput = kInputCount + 2;
inline constexpr int kFirstHiddenId = kInputCount + 1 + kOutputCount;  // 26

enum class NodeKind { input, bias, hidden, output };
enum class Activation { identity, steepened_sigmoid, tanh, logistic };

struct NodeGene {
  int id = 0;
  NodeKind kind = NodeKind::hidden;
  Activation activation = Activation::steepened_sigmoid;
  friend bool operator==(const NodeGene&, const NodeGene&) = default;
};

struct ConnectionGene {
  int in_node = 0;
  int out_node = 0;
  double weight = 0.0;
  bool enabled = true;
  int innovation = 0;
  friend bool operator==(const ConnectionGene&, const ConnectionGene&) = default;
};

/// Nodes are kept sorted by id, connections by innovation number.
struct Genome {
  std::vector<NodeGene> nodes;
  std::vector<ConnectionGene> connections;
  std::optional<double> fitness;

  bool has_node(int id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id, [](const NodeGene& n, int v) { return n.id < v; });
    return it != nodes.end() && it->id == id;
  }

  const NodeGene* find_node(int id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id, [](const NodeGene& n, int v) { return n.id < v; });
    return (it != nodes.end() && it->id == id) ? &*it : nullptr;
  }

  void add_node(NodeGene n) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), n.id, [](const NodeGene& a, int v) { return a.id < v; });
    if (it != nodes.end() && it->id == n.id) return;
    nodes.insert(it, n);
  }

  const ConnectionGene* find_connection(int in, int out) const {
    for (const auto& c : connections)
      if (c.in_node == in && c.out_node == out) return &c;
    return nullptr;
  }

  void add_connection(ConnectionGene c) {
    auto it = std::lower_bound(connections.begin(), connections.end(), c.innovation,
                               [](const ConnectionGene& a, int v) { return a.innovation < v; });
    connections.insert(it, c);
  }

  /// Same genes and weights; fitness is ignored.
  bool same_genes(const Genome& o) const { return nodes == o.nodes && connections == o.connections; }
};

inline Activation default_activation(NodeKind kind, int id) {
  switch (kind) {
    case NodeKind::input:
    case NodeKind::bias:
      return Activation::identity;
    case NodeKind::hidden:
      return Activation::steepened_sigmoid;
    case NodeKind::output:
      return id == kTurnOutput ? Activation::tanh : Activation::logistic;
  }
  return Activation::identity;
}

/// Inputs, bias and both outputs, no connections.
inline Genome minimal_genome() {
  Genome g;
  for (int i = 0; i < kInputCount; ++i) g.nodes.push_back({i, NodeKind::input, Activation::identity});
  g.nodes.push_back({kBiasNode, NodeKind::bias, Activation::identity});
  g.nodes.push_back({kTurnOutput, NodeKind::output, Activation::tanh});
  g.nodes.push_back({kThrustOutput, NodeKind::output, Activation::logistic});
  return g;
}

/// Adjacency over node ids, used for reachability queries.
class Digraph {
 public:
  void add_edge(int from, int to) { out_[from].push_back(to); }

  bool reaches(int from, int to) const {
    if (from == to) return true;
    std::set<int> seen{from};
    std::vector<int> stack{from};
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      auto it = out_.find(n);
      if (it == out_.end()) continue;
      for (int m : it->second) {
        if (m == to) return true;
        if (seen.insert(m).second) stack.push_back(m);
      }
    }
    return false;
  }

 private:
  std::map<int, std::vector<int>> out_;
};

inline Digraph connection_graph(const Genome& g, bool enabled_only) {
  Digraph d;
  for (const auto& c : g.connections)
    if (!enabled_only || c.enabled) d.add_edge(c.in_node, c.out_node);
  return d;
}

/// Whether `to` is reachable from `from` following connections (optionally
/// only enabled ones).
inline bool reaches(const Genome& g, int from, int to, bool enabled_only) {
  return connection_graph(g, enabled_only).reaches(from, to);
}

/// Adding in->out would close a directed cycle through any gene.
inline bool creates_cycle(const Genome& g, int in, int out) { return reaches(g, out, in, false); }

inline bool has_enabled_cycle(const Genome& g) {
  // Kahn's algorithm over the enabled subgraph.
  std::map<int, int> indegree;
  std::map<int, std::vector<int>> out;
  for (const auto& n : g.nodes) indegree[n.id] = 0;
  for (const auto& c : g.connections) {
    if (!c.enabled) continue;
    ++indegree[c.out_node];
    out[c.in_node].push_back(c.out_node);
  }
  std::vector<int> ready;
  for (const auto& [id, d] : indegree)
    if (d == 0) ready.push_back(id);
  std::size_t removed = 0;
  while (!ready.empty()) {
    const int n = ready.back();
    ready.pop_back();
    ++removed;
    if (auto it = out.find(n); it != out.end())
      for (int m : it->second)
        if (--indegree[m] == 0) ready.push_back(m);
  }
  return removed != indegree.size();
}

/// Empty string when valid, else the first violated invariant.
inline std::string genome_violation(const Genome& g) {
  for (std::size_t i = 1; i < g.nodes.size(); ++i)
    if (g.nodes[i - 1].id >= g.nodes[i].id) return "node ids not unique/sorted";
  for (int i = 0; i < kInputCount; ++i) {
    const auto* n = g.find_node(i);
    if (!n || n->kind != NodeKind::input) return "missing input node " + std::to_string(i);
  }
  if (const auto* n = g.find_node(kBiasNode); !n || n->kind != NodeKind::bias) return "missing bias node";
  if (const auto* n = g.find_node(kTurnOutput); !n || n->kind != NodeKind::output) return "missing turn output";
  if (const auto* n = g.find_node(kThrustOutput); !n || n->kind != NodeKind::output) return "missing thrust output";
  int inputs = 0, outputs = 0;
  for (const auto& n : g.nodes) {
    inputs += n.kind == NodeKind::input;
    outputs += n.kind == NodeKind::output;
  }
  if (inputs != kInputCount || outputs != kOutputCount) return "wrong input/output node count";

  std::set<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < g.connections.size(); ++i) {
    const auto& c = g.connections[i];
    if (i > 0 && g.connections[i - 1].innovation >= c.innovation) return "innovations not unique/sorted";
    const auto* a = g.find_node(c.in_node);
    const auto* b = g.find_node(c.out_node);
    if (!a || !b) return "connection " + std::to_string(c.innovation) + " references a missing node";
    if (b->kind == NodeKind::input || b->kind == NodeKind::bias) return "connection into an input";
    if (a->kind == NodeKind::output) return "connection out of an output";
    if (!pairs.insert({c.in_node, c.out_node}).second) return "duplicate connection";
  }
  if (has_enabled_cycle(g)) return "enabled connections form a cycle";
  return {};
}

inline void validate_genome(const Genome& g) {
  if (auto v = genome_violation(g); !v.empty()) throw GenomeError("invalid genome: " + v);
}

/// Run-wide historical markings. A structural signature (in, out) always
/// receives the same innovation number; splits of the same connection reuse
/// hidden node ids whenever the genome does not already hold them.
class InnovationTable {
 public:
  int connection(int in, int out) {
    auto [it, inserted] = connections_.try_emplace({in, out}, next_innovation_);
    if (inserted) ++next_innovation_;
    return it->second;
  }

  std::optional<int> find_connection(int in, int out) const {
    auto it = connections_.find({in, out});
    if (it == connections_.end()) return std::nullopt;
    return it->second;
  }

  int split_node(int innovation, const Genome& g) {
    auto& ids = splits_[innovation];
    for (int id : ids)
      if (!g.has_node(id)) return id;
    ids.push_back(next_node_id_++);
    return ids.back();
  }

  int new_node_id() { return next_node_id_++; }

  int next_innovation() const noexcept { return next_innovation_; }
  int next_node_id() const noexcept { return next_node_id_; }
  const std::map<std::pair<int, int>, int>& connections() const noexcept { return connections_; }
  const std::map<int, std::vector<int>>& splits() const noexcept { return splits_; }

  void restore(std::map<std::pair<int, int>, int> connections, std::map<int, std::vector<int>> splits,
               int next_innovation, int next_node_id) {
    connections_ = std::move(connections);
    splits_ = std::move(splits);
    next_innovation_ = next_innovation;
    next_node_id_ = next_node_id;
  }

  friend bool operator==(const InnovationTable&, const InnovationTable&) = default;

 private:
  std::map<std::pair<int, int>, int> connections_;
  std::map<int, std::vector<int>> splits_;
  int next_innovation_ = 0;
  int next_node_id_ = kFirstHiddenId;
};

using Rng = std::mt19937_64;

/// Independent stream for a (seed, a, b) coordinate, e.g. (trial seed,
/// generation, child index).
inline Rng derive_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }
inline std::size_t pick_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace xprace::neat
