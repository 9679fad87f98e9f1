#pragma once

#include <functional>
#include <optional>

#include "shardlearn/learner.hpp"
#include "shardlearn/topology.hpp"

namespace shardlearn {

// How an internal node turns child predictions into its own. Learned nodes
// run online least squares over their inputs; Sum nodes add them up (a
// single-child node with no constant feature degenerates to Sum, i.e. a
// structural pass-through).
enum class CombineMode { Learned, Sum };

struct NodeState {
  uint32_t id = 0;
  std::optional<WeightModel> leaf_model;  // leaves only
  std::vector<double> w;                  // internal: child weights (+ constant last)
  bool has_constant = false;
  CombineMode combine = CombineMode::Learned;
  ScheduleSpec sched;
  uint64_t step = 0;  // learning-rate index, one per applied update
  Metrics local;      // node's own progressive loss against the label
};

struct TreeState {
  std::vector<NodeState> nodes;             // indexed by node id
  std::vector<std::vector<uint32_t>> layers;  // node ids per layer, ascending
};

TreeState init_tree_state(const Topology& topo, unsigned bits, const ScheduleSpec& sched);

// Raw and transmitted (possibly clamped) prediction of every node for one
// routed instance. parts is indexed by shard id.
struct ForwardResult {
  std::vector<double> raw;
  std::vector<double> transmitted;
};
ForwardResult forward_tree(const Topology& topo, const TreeState& state,
                           const std::vector<SparseVector>& parts);

// Prediction of the whole tree with frozen weights.
double predict_tree(const Topology& topo, const TreeState& state,
                    const std::vector<SparseVector>& parts);

// One streaming step on one routed instance: a frozen forward pass, then
// every node takes its own gradient step at its raw output and records the
// raw prediction in its local metrics. Returns the forward pass the updates
// were computed from.
ForwardResult local_instance_step(const Topology& topo, TreeState& state,
                                  const std::vector<SparseVector>& parts, double y,
                                  const LossSpec& loss);

using NodeObserver =
    std::function<void(uint64_t t, uint32_t node, double raw, double transmitted)>;

// Train every node on every instance with no cross-instance delay: leaves
// first, then each layer in id order. Thresholding clamps transmitted values
// to [0,1] only; each node's own update sees its raw prediction. Returns the
// root's progressive metrics.
Metrics run_local_pipeline(const Topology& topo, const ShardPlan& plan, ExampleStream& stream,
                           TreeState& state, const LossSpec& loss, unsigned passes,
                           const NodeObserver& observer = {});

// Product-expanded linear map of the frozen tree: coefficient per index in
// [0, max_index] plus the bias contributed by constant features.
struct EffectiveMap {
  std::vector<double> w;
  double bias = 0.0;
};
EffectiveMap effective_weights(const Topology& topo, const ShardPlan& plan,
                               const TreeState& state, uint32_t max_index);

}  // namespace shardlearn
