#include "shardlearn/pipeline.hpp"

#include <cmath>
#include <exception>

#include "shardlearn/errors.hpp"
#include "shardlearn/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shardlearn {

TreeState init_tree_state(const Topology& topo, unsigned bits, const ScheduleSpec& sched) {
  validate(sched);
  TreeState st;
  st.nodes.resize(topo.nodes.size());
  uint32_t max_layer = 0;
  for (const auto& nd : topo.nodes) max_layer = std::max(max_layer, nd.layer);
  st.layers.assign(max_layer + 1, {});
  for (const auto& nd : topo.nodes) {
    NodeState& ns = st.nodes[nd.id];
    ns.id = nd.id;
    ns.sched = sched;
    ns.has_constant = nd.has_constant_feature;
    if (nd.is_leaf()) {
      ns.leaf_model.emplace(bits);
    } else {
      if (nd.fan_in == 1 && !nd.has_constant_feature)
        ns.combine = CombineMode::Sum;
      ns.w.assign(nd.fan_in + (nd.has_constant_feature ? 1 : 0), 0.0);
    }
    st.layers[nd.layer].push_back(nd.id);
  }
  return st;
}

namespace {

double node_raw(const Topology& topo, const TreeState& state, uint32_t id,
                const std::vector<SparseVector>& parts, const std::vector<double>& transmitted) {
  const NodeSpec& nd = topo.nodes[id];
  const NodeState& ns = state.nodes[id];
  if (nd.is_leaf()) return dot(parts[nd.shard], *ns.leaf_model);
  double acc = 0.0;
  const auto& kids = topo.children[id];
  if (ns.combine == CombineMode::Sum) {
    for (uint32_t c : kids) acc += transmitted[c];
  } else {
    for (size_t k = 0; k < kids.size(); ++k) acc += ns.w[k] * transmitted[kids[k]];
    if (ns.has_constant) acc += ns.w.back();
  }
  return acc;
}

void check_finite(double raw, uint32_t id) {
  if (!std::isfinite(raw))
    throw NumericOverflow("node " + std::to_string(id) +
                          " prediction overflowed; reduce the learning rate");
}

void node_update(const Topology& topo, TreeState& state, uint32_t id,
                 const std::vector<SparseVector>& parts, const std::vector<double>& transmitted,
                 double raw, double y, const LossSpec& loss) {
  const NodeSpec& nd = topo.nodes[id];
  NodeState& ns = state.nodes[id];
  if (!nd.is_leaf() && ns.combine == CombineMode::Sum) return;
  double d1 = loss_eval(loss, raw, y).d1;
  double eta = learning_rate(ns.sched, ++ns.step);
  if (nd.is_leaf()) {
    WeightModel& w = *ns.leaf_model;
    for (const auto& e : parts[nd.shard].entries) {
      double g = d1 * e.value;
      w[e.index] -= eta * g;
    }
  } else {
    const auto& kids = topo.children[id];
    for (size_t k = 0; k < kids.size(); ++k) {
      double g = d1 * transmitted[kids[k]];
      ns.w[k] -= eta * g;
    }
    if (ns.has_constant) {
      double g = d1 * 1.0;
      ns.w.back() -= eta * g;
    }
  }
}

}  // namespace

ForwardResult forward_tree(const Topology& topo, const TreeState& state,
                           const std::vector<SparseVector>& parts) {
  ForwardResult fr;
  fr.raw.assign(topo.nodes.size(), 0.0);
  fr.transmitted.assign(topo.nodes.size(), 0.0);
  const int threads = thread_count();
  for (const auto& layer : state.layers) {
    // Nodes of one layer read only lower layers and write disjoint slots,
    // so they can run concurrently with identical results.
    int64_t n = int64_t(layer.size());
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads) if (threads > 1 && n > 1)
#endif
    for (int64_t k = 0; k < n; ++k) {
      uint32_t id = layer[size_t(k)];
      double raw = node_raw(topo, state, id, parts, fr.transmitted);
      fr.raw[id] = raw;
      fr.transmitted[id] = topo.nodes[id].threshold_output ? clamp01(raw) : raw;
    }
    // Exceptions may not cross the parallel region, so validate afterwards.
    for (uint32_t id : layer) check_finite(fr.raw[id], id);
  }
  return fr;
}

ForwardResult local_instance_step(const Topology& topo, TreeState& state,
                                  const std::vector<SparseVector>& parts, double y,
                                  const LossSpec& loss) {
  ForwardResult fwd = forward_tree(topo, state, parts);
  // Every node's update depends only on the frozen forward pass and its own
  // weights, so the whole tree can update in one parallel sweep.
  const int threads = thread_count();
  int64_t n = int64_t(topo.nodes.size());
  std::exception_ptr err;
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads) if (threads > 1 && n > 1)
#endif
  for (int64_t k = 0; k < n; ++k) {
    try {
      uint32_t id = uint32_t(k);
      state.nodes[id].local.record(fwd.raw[id], y);
      node_update(topo, state, id, parts, fwd.transmitted, fwd.raw[id], y, loss);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return fwd;
}

double predict_tree(const Topology& topo, const TreeState& state,
                    const std::vector<SparseVector>& parts) {
  return forward_tree(topo, state, parts).raw[topo.root];
}

Metrics run_local_pipeline(const Topology& topo, const ShardPlan& plan, ExampleStream& stream,
                           TreeState& state, const LossSpec& loss, unsigned passes,
                           const NodeObserver& observer) {
  if (plan.kind != ShardKind::Feature)
    throw ConfigError("the tree pipeline needs a feature shard plan");
  if (plan.n_shards != topo.n_shards())
    throw ConfigError("shard plan and topology disagree on shard count");

  uint64_t t = 0;
  SparseVector x;
  double y;
  for (unsigned pass = 0; pass < passes; ++pass) {
    if (pass > 0) stream.reset();
    while (stream.next(x, y)) {
      ++t;
      auto parts = route_instance(plan, x);
      ForwardResult fwd = local_instance_step(topo, state, parts, y, loss);
      if (observer)
        for (const auto& layer : state.layers)
          for (uint32_t id : layer) observer(t, id, fwd.raw[id], fwd.transmitted[id]);
    }
  }
  return state.nodes[topo.root].local;
}

EffectiveMap effective_weights(const Topology& topo, const ShardPlan& plan,
                               const TreeState& state, uint32_t max_index) {
  EffectiveMap out;
  out.w.assign(size_t(max_index) + 1, 0.0);
  std::vector<double> factor(topo.nodes.size(), 0.0);
  factor[topo.root] = 1.0;
  for (auto layer_it = state.layers.rbegin(); layer_it != state.layers.rend(); ++layer_it) {
    for (uint32_t id : *layer_it) {
      const NodeSpec& nd = topo.nodes[id];
      const NodeState& ns = state.nodes[id];
      if (nd.is_leaf()) {
        for (uint32_t i = 0; i <= max_index; ++i)
          if (plan.shard_of_index(i) == uint32_t(nd.shard)) out.w[i] = factor[id] * (*ns.leaf_model)[i];
        continue;
      }
      const auto& kids = topo.children[id];
      if (ns.combine == CombineMode::Sum) {
        for (uint32_t c : kids) factor[c] = factor[id];
      } else {
        for (size_t k = 0; k < kids.size(); ++k) factor[kids[k]] = factor[id] * ns.w[k];
        if (ns.has_constant) out.bias += factor[id] * ns.w.back();
      }
    }
  }
  return out;
}

}  // namespace shardlearn
