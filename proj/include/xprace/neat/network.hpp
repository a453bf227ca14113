#pragma once

#include <cmath>
#include <map>
#include <queue>
#include <span>
#include <vector>

#include "xprace/errors.hpp"
#include "xprace/neat/genome.hpp"
#include "xprace/physics.hpp"

namespace xprace::neat {

inline double apply_activation(Activation a, double x) {
  switch (a) {
    case Activation::identity:
      return x;
    case Activation::steepened_sigmoid:
      return 1.0 / (1.0 + std::exp(-4.9 * x));
    case Activation::tanh:
      return std::tanh(x);
    case Activation::logistic:
      return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

/// Feed-forward evaluator built from the enabled connections of a genome.
class Network {
 public:
  explicit Network(const Genome& genome) {
    // Dense slot per node, in id order.
    std::map<int, int> slot;
    for (const auto& n : genome.nodes) {
      slot[n.id] = static_cast<int>(slot.size());
      activation_.push_back(n.activation);
    }
    for (int i = 0; i < kInputCount; ++i) {
      if (!slot.count(i)) throw GenomeError("genome lacks input node " + std::to_string(i));
    }
    if (!slot.count(kBiasNode) || !slot.count(kTurnOutput) || !slot.count(kThrustOutput))
      throw GenomeError("genome lacks bias or output nodes");
    bias_slot_ = slot.at(kBiasNode);
    turn_slot_ = slot.at(kTurnOutput);
    thrust_slot_ = slot.at(kThrustOutput);

    const std::size_t count = genome.nodes.size();
    std::vector<std::vector<Edge>> incoming(count);
    std::vector<std::vector<int>> outgoing(count);
    std::vector<int> indegree(count, 0);
    for (const auto& c : genome.connections) {
      if (!c.enabled) continue;
      auto a = slot.find(c.in_node), b = slot.find(c.out_node);
      if (a == slot.end() || b == slot.end())
        throw GenomeError("connection " + std::to_string(c.innovation) + " references a missing node");
      incoming[b->second].push_back({a->second, c.weight});
      outgoing[a->second].push_back(b->second);
      ++indegree[b->second];
    }

    // Kahn's algorithm, lowest slot first, so the order is a function of the genome.
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (std::size_t i = 0; i < count; ++i)
      if (indegree[i] == 0) ready.push(static_cast<int>(i));
    std::vector<bool> is_source(count, false);
    for (const auto& n : genome.nodes)
      if (n.kind == NodeKind::input || n.kind == NodeKind::bias) is_source[slot.at(n.id)] = true;
    std::size_t visited = 0;
    while (!ready.empty()) {
      const int s = ready.top();
      ready.pop();
      ++visited;
      if (!is_source[static_cast<std::size_t>(s)]) order_.push_back({s, std::move(incoming[s])});
      for (int t : outgoing[s])
        if (--indegree[t] == 0) ready.push(t);
    }
    if (visited != count) throw GenomeError("enabled connections form a cycle");

    for (const auto& n : genome.nodes)
      if (n.kind == NodeKind::input) input_slots_.push_back(slot.at(n.id));
    values_size_ = count;
  }

  ControlCommand activate(std::span<const double> inputs) const {
    std::vector<double> values(values_size_, 0.0);
    return activate(inputs, values);
  }

  /// `scratch` is resized as needed; reuse it across frames to avoid allocation.
  ControlCommand activate(std::span<const double> inputs, std::vector<double>& scratch) const {
    if (inputs.size() != static_cast<std::size_t>(kInputCount))
      throw GenomeError("network expects " + std::to_string(kInputCount) + " inputs, got " +
                        std::to_string(inputs.size()));
    scratch.assign(values_size_, 0.0);
    for (std::size_t i = 0; i < input_slots_.size(); ++i) {
      if (!std::isfinite(inputs[i])) throw GenomeError("non-finite network input");
      scratch[static_cast<std::size_t>(input_slots_[i])] = inputs[i];
    }
    scratch[static_cast<std::size_t>(bias_slot_)] = 1.0;
    for (const auto& node : order_) {
      double sum = 0.0;
      for (const auto& e : node.incoming) sum += e.weight * scratch[static_cast<std::size_t>(e.from)];
      scratch[static_cast<std::size_t>(node.slot)] = apply_activation(activation_[static_cast<std::size_t>(node.slot)], sum);
    }
    return {scratch[static_cast<std::size_t>(turn_slot_)], scratch[static_cast<std::size_t>(thrust_slot_)]};
  }

  std::size_t evaluated_nodes() const noexcept { return order_.size(); }

 private:
  struct Edge {
    int from;
    double weight;
  };
  struct Step {
    int slot;
    std::vector<Edge> incoming;
  };

  std::vector<Activation> activation_;
  std::vector<Step> order_;
  std::vector<int> input_slots_;
  int bias_slot_ = 0, turn_slot_ = 0, thrust_slot_ = 0;
  std::size_t values_size_ = 0;
};

inline Network build_network(const Genome& genome) { return Network(genome); }

}  // namespace xprace::neat
