#include "shardlearn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "shardlearn/cg.hpp"
#include "shardlearn/errors.hpp"

namespace shardlearn {

const char* rule_name(UpdateRule r) {
  switch (r) {
    case UpdateRule::Sgd: return "sgd";
    case UpdateRule::Local: return "local";
    case UpdateRule::DelayedGlobal: return "delayed-global";
    case UpdateRule::Corrective: return "corrective";
    case UpdateRule::Backprop: return "backprop";
    case UpdateRule::Minibatch: return "minibatch";
    case UpdateRule::MinibatchCg: return "minibatch-cg";
  }
  return "?";
}

std::optional<UpdateRule> parse_rule(const std::string& s) {
  for (UpdateRule r :
       {UpdateRule::Sgd, UpdateRule::Local, UpdateRule::DelayedGlobal, UpdateRule::Corrective,
        UpdateRule::Backprop, UpdateRule::Minibatch, UpdateRule::MinibatchCg}) {
    if (s == rule_name(r)) return r;
  }
  return std::nullopt;
}

SchedAction schedule_next(NodeSchedule& ns, size_t pending_local, size_t pending_global,
                          uint64_t remaining_in_stream) {
  const bool drain = remaining_in_stream < ns.target_tau;
  const bool can_local = pending_local > 0 && ns.in_flight < ns.target_tau;
  const bool can_global = pending_global > 0 && (ns.in_flight >= ns.target_tau || drain);
  if (can_local && can_global) {
    ns.last = (ns.last == SchedAction::DoLocal) ? SchedAction::DoGlobal : SchedAction::DoLocal;
    return ns.last;
  }
  if (can_global) {
    ns.last = SchedAction::DoGlobal;
    return ns.last;
  }
  if (can_local) {
    ns.last = SchedAction::DoLocal;
    return ns.last;
  }
  return SchedAction::Wait;
}

void LinkQueue::push(uint64_t instance, uint64_t deliver_at) {
  if (q.size() >= capacity) throw ConfigError("response buffer overflowed; raise the buffer size");
  if (!q.empty() && q.back().deliver_at > deliver_at)
    throw std::logic_error("link messages must keep send order");
  q.push_back({instance, deliver_at});
}

bool LinkQueue::deliverable(uint64_t now) const { return !q.empty() && q.front().deliver_at <= now; }

LinkMessage LinkQueue::pop() {
  if (q.empty()) throw std::logic_error("pop on an empty link");
  LinkMessage m = q.front();
  q.pop_front();
  return m;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << "t,node,action,inflight\n";
  for (const auto& r : rows)
    os << r.t << ',' << r.node << ',' << r.action << ',' << r.in_flight << '\n';
}

namespace {

double clamp_ind(const Topology& topo, const ForwardResult& f, uint32_t node) {
  if (!topo.nodes[node].threshold_output) return 1.0;
  return (f.raw[node] > 0.0 && f.raw[node] < 1.0) ? 1.0 : 0.0;
}

std::vector<uint64_t> path_delays(const Topology& topo) {
  std::vector<uint64_t> d(topo.nodes.size(), 0);
  // parents always have higher layer, so walking ids per ascending layer
  // from the root downward is safe; do it by repeated parent lookup instead.
  for (uint32_t id = 0; id < topo.nodes.size(); ++id) {
    uint64_t total = 0;
    int64_t cur = id;
    while (topo.parent[size_t(cur)] >= 0) {
      total += topo.delay_to_parent[size_t(cur)];
      cur = topo.parent[size_t(cur)];
    }
    d[id] = total;
  }
  return d;
}

WeightModel leaf_union(const Topology& topo, const ShardPlan& plan, const TreeState& state,
                       unsigned bits) {
  WeightModel out(bits);
  for (uint32_t i = 0; i < out.size(); ++i) {
    uint32_t s = plan.shard_of_index(i);
    const auto& leaf = state.nodes[topo.leaf_of_shard[s]];
    out[i] = (*leaf.leaf_model)[i];
  }
  return out;
}

struct SimValidation {
  std::vector<uint64_t> path;
  uint64_t max_path = 0;
};

SimValidation validate_delays(const Topology& topo, const SimOptions& opt) {
  if (opt.target_tau > opt.buffer_capacity)
    throw ConfigError("delay target exceeds the buffer capacity");
  SimValidation v;
  v.path = path_delays(topo);
  for (uint64_t d : v.path) v.max_path = std::max(v.max_path, d);
  if (v.max_path > opt.target_tau)
    throw ConfigError("a link delay path exceeds the delay target; responses would arrive late");
  return v;
}

SimResult run_shared_table(const Topology&, const ShardPlan& plan, ExampleStream& stream,
                           const ScheduleSpec& sched, const LossSpec& loss, unsigned bits,
                           const SimOptions& opt) {
  SimResult res{Metrics{}, {}, WeightModel(bits), TreeState{}, false};
  if (opt.rule == UpdateRule::Sgd) {
    if (plan.n_shards != 1) throw ConfigError("plain sgd runs on a single shard");
    res.metrics = train_sequential(res.feature_weights, stream, sched, loss, opt.passes,
                                   opt.keep_log);
    return res;
  }
  MinibatchOptions mo;
  mo.batch_size = opt.batch_size;
  mo.conjugate = (opt.rule == UpdateRule::MinibatchCg);
  mo.passes = opt.passes;
  mo.keep_log = opt.keep_log;
  if (mo.conjugate) {
    CgState cg(res.feature_weights.size());
    res.metrics = minibatch_train(res.feature_weights, stream, sched, loss, mo, &cg);
  } else {
    res.metrics = minibatch_train(res.feature_weights, stream, sched, loss, mo, nullptr);
  }
  return res;
}

SimResult run_local_rule(const Topology& topo, const ShardPlan& plan, ExampleStream& stream,
                         const ScheduleSpec& sched, const LossSpec& loss, unsigned bits,
                         const SimOptions& opt) {
  SimResult res{Metrics{}, {}, WeightModel(bits), TreeState{}, false};
  TreeState state = init_tree_state(topo, bits, sched);
  state.nodes[topo.root].local.keep_log = opt.keep_log;
  uint64_t t = 0;
  SparseVector x;
  double y = 0.0;
  for (unsigned pass = 0; pass < opt.passes; ++pass) {
    if (pass > 0) stream.reset();
    while (stream.next(x, y)) {
      ++t;
      auto parts = route_instance(plan, x);
      local_instance_step(topo, state, parts, y, loss);
      if (opt.keep_trace)
        for (uint32_t id = 0; id < topo.nodes.size(); ++id)
          res.trace.push_back({t, id, 'L', 0});
    }
  }
  res.metrics = state.nodes[topo.root].local;
  res.feature_weights = leaf_union(topo, plan, state, bits);
  res.tree = std::move(state);
  res.tree_valid = true;
  return res;
}

// delayed-global and corrective: the tree degenerates to one summed linear
// model split over the leaves; each leaf runs the send/consume schedule.
SimResult run_delayed_rule(const Topology& topo, const ShardPlan& plan, ExampleStream& stream,
                           const ScheduleSpec& sched, const LossSpec& loss, unsigned bits,
                           const SimOptions& opt) {
  const bool corrective = (opt.rule == UpdateRule::Corrective);
  SimValidation v = validate_delays(topo, opt);
  SimResult res{Metrics{}, {}, WeightModel(bits), TreeState{}, false};
  TreeState state = init_tree_state(topo, bits, sched);
  for (auto& ns : state.nodes)
    if (!ns.leaf_model) ns.combine = CombineMode::Sum;

  const size_t n_nodes = topo.nodes.size();
  std::vector<uint32_t> leaves;
  for (uint32_t id = 0; id < n_nodes; ++id)
    if (topo.nodes[id].is_leaf()) leaves.push_back(id);

  std::vector<NodeSchedule> nsched(n_nodes);
  std::vector<LinkQueue> link(n_nodes);
  std::vector<std::deque<PendingRecord>> pending(n_nodes);
  for (uint32_t id : leaves) {
    nsched[id].target_tau = opt.target_tau;
    nsched[id].buffer_capacity = opt.buffer_capacity;
    link[id].capacity = opt.buffer_capacity;
  }
  std::vector<double> final_pred;
  Metrics global_m;
  global_m.keep_log = opt.keep_log;

  auto consume = [&](uint32_t id, uint64_t clock) {
    LinkMessage msg = link[id].pop();
    if (pending[id].empty() || pending[id].front().t != msg.instance)
      throw std::logic_error("response does not match the oldest pending record");
    PendingRecord rec = std::move(pending[id].front());
    pending[id].pop_front();
    NodeState& ns = state.nodes[id];
    double eta = learning_rate(ns.sched, ++ns.step);
    double yf = final_pred[msg.instance - 1];
    if (corrective)
      corrective_update(ns, rec, yf, eta, loss);
    else
      delayed_global_update(ns, rec, yf, eta, loss);
    nsched[id].in_flight -= 1;
    if (opt.keep_trace) res.trace.push_back({clock, id, 'G', nsched[id].in_flight});
  };

  uint64_t t = 0;
  SparseVector x;
  double y = 0.0;
  for (unsigned pass = 0; pass < opt.passes; ++pass) {
    if (pass > 0) stream.reset();
    while (stream.next(x, y)) {
      ++t;
      auto parts = route_instance(plan, x);
      for (uint32_t id : leaves) {
        while (schedule_next(nsched[id], 1, link[id].deliverable(t) ? 1 : 0,
                             std::numeric_limits<uint64_t>::max()) == SchedAction::DoGlobal)
          consume(id, t);
        if (opt.target_tau > 0 && nsched[id].in_flight >= opt.target_tau)
          throw std::logic_error("scheduler stalled before a send");
      }
      double root_raw = 0.0;
      for (uint32_t id : leaves) {
        NodeState& ns = state.nodes[id];
        const SparseVector& part = parts[size_t(topo.nodes[id].shard)];
        double p = 0.0;
        PendingRecord rec;
        rec.t = t;
        if (corrective) {
          p = corrective_send(ns, part, y, loss, rec);
        } else {
          p = dot(part, *ns.leaf_model);
          if (!std::isfinite(p))
            throw NumericOverflow("node " + std::to_string(id) + " prediction overflowed");
          rec.x = part;
          rec.p_sent = p;
          rec.y = y;
        }
        ns.local.record(p, y);
        if (pending[id].size() >= opt.buffer_capacity)
          throw ConfigError("pending record buffer overflowed; raise the buffer size");
        pending[id].push_back(std::move(rec));
        root_raw += p;
      }
      if (!std::isfinite(root_raw)) throw NumericOverflow("combined prediction overflowed");
      global_m.record(root_raw, y);
      final_pred.push_back(root_raw);
      for (uint32_t id : leaves) {
        nsched[id].in_flight += 1;
        link[id].push(t, t + v.path[id]);
        if (opt.keep_trace) res.trace.push_back({t, id, 'L', nsched[id].in_flight});
        // zero delay target: the feedback for this very instance is due now
        while (nsched[id].in_flight > opt.target_tau && link[id].deliverable(t)) consume(id, t);
      }
    }
  }
  // drain: the stream is done, the clock keeps ticking until every response
  // has come home
  uint64_t clock = t;
  const uint64_t deadline = t + v.max_path + 2;
  for (;;) {
    bool busy = false;
    for (uint32_t id : leaves) busy = busy || nsched[id].in_flight > 0;
    if (!busy) break;
    ++clock;
    if (clock > deadline) throw std::logic_error("drain failed to finish");
    for (uint32_t id : leaves)
      while (nsched[id].in_flight > 0 && link[id].deliverable(clock) &&
             schedule_next(nsched[id], 0, 1, 0) == SchedAction::DoGlobal)
        consume(id, clock);
  }

  res.metrics = global_m;
  res.feature_weights = leaf_union(topo, plan, state, bits);
  res.tree = std::move(state);
  res.tree_valid = true;
  return res;
}

SimResult run_backprop_rule(const Topology& topo, const ShardPlan& plan, ExampleStream& stream,
                            const ScheduleSpec& sched, const LossSpec& loss, unsigned bits,
                            const SimOptions& opt) {
  SimValidation v = validate_delays(topo, opt);
  SimResult res{Metrics{}, {}, WeightModel(bits), TreeState{}, false};
  TreeState state = init_tree_state(topo, bits, sched);

  struct BpCache {
    uint64_t t = 0;
    double d1_root = 0.0;
    ForwardResult fwd;                       // pre-update forward pass
    std::vector<std::vector<double>> w_pred;  // internal weights at prediction time
    std::vector<SparseVector> parts;
    double y = 0.0;
  };
  std::deque<BpCache> cache;

  // Responses are consumed tree-wide, so one schedule and one gate link
  // paced by the slowest root-to-node path stand in for all of them.
  NodeSchedule shared;
  shared.target_tau = opt.target_tau;
  shared.buffer_capacity = opt.buffer_capacity;
  LinkQueue gate;
  gate.capacity = opt.buffer_capacity;
  Metrics global_m;
  global_m.keep_log = opt.keep_log;

  auto consume = [&](uint64_t clock) {
    LinkMessage msg = gate.pop();
    if (cache.empty() || cache.front().t != msg.instance)
      throw std::logic_error("response does not match the oldest pending instance");
    BpCache c = std::move(cache.front());
    cache.pop_front();
    std::vector<double> m_raw(topo.nodes.size(), 0.0);
    m_raw[topo.root] = opt.backprop_scale * c.d1_root;
    for (auto layer = state.layers.rbegin(); layer != state.layers.rend(); ++layer) {
      for (uint32_t id : *layer) {
        double m = m_raw[id];
        NodeState& ns = state.nodes[id];
        const NodeSpec& spec = topo.nodes[id];
        if (id != topo.root) {
          // the node's own delayed correction
          double eta = learning_rate(ns.sched, ++ns.step);
          if (spec.is_leaf()) {
            WeightModel& w = *ns.leaf_model;
            for (const auto& e : c.parts[size_t(spec.shard)].entries) {
              double g = m * e.value;
              w[e.index] -= eta * g;
            }
          } else if (ns.combine == CombineMode::Learned) {
            const auto& kids = topo.children[id];
            for (size_t k = 0; k < kids.size(); ++k) {
              double g = m * c.fwd.transmitted[kids[k]];
              ns.w[k] -= eta * g;
            }
            if (ns.has_constant) {
              double g = m * 1.0;
              ns.w.back() -= eta * g;
            }
          }
        }
        if (spec.is_leaf()) continue;
        const auto& kids = topo.children[id];
        if (ns.combine == CombineMode::Sum) {
          for (uint32_t kid : kids) m_raw[kid] = m * clamp_ind(topo, c.fwd, kid);
        } else {
          const auto& wp = c.w_pred[id];
          for (size_t k = 0; k < kids.size(); ++k)
            m_raw[kids[k]] = m * wp[k] * clamp_ind(topo, c.fwd, kids[k]);
        }
      }
    }
    shared.in_flight -= 1;
    if (opt.keep_trace)
      for (uint32_t id = 0; id < topo.nodes.size(); ++id)
        if (id != topo.root) res.trace.push_back({clock, id, 'G', shared.in_flight});
  };

  uint64_t t = 0;
  SparseVector x;
  double y = 0.0;
  for (unsigned pass = 0; pass < opt.passes; ++pass) {
    if (pass > 0) stream.reset();
    while (stream.next(x, y)) {
      ++t;
      auto parts = route_instance(plan, x);
      while (schedule_next(shared, 1, gate.deliverable(t) ? 1 : 0,
                           std::numeric_limits<uint64_t>::max()) == SchedAction::DoGlobal)
        consume(t);
      if (opt.target_tau > 0 && shared.in_flight >= opt.target_tau)
        throw std::logic_error("scheduler stalled before a send");
      BpCache c;
      c.t = t;
      c.y = y;
      c.w_pred.resize(topo.nodes.size());
      for (uint32_t id = 0; id < topo.nodes.size(); ++id)
        if (!topo.nodes[id].is_leaf() && state.nodes[id].combine == CombineMode::Learned)
          c.w_pred[id] = state.nodes[id].w;
      c.fwd = local_instance_step(topo, state, parts, y, loss);
      c.d1_root = loss_eval(loss, c.fwd.raw[topo.root], y).d1;
      c.parts = std::move(parts);
      global_m.record(c.fwd.raw[topo.root], y);
      if (cache.size() >= opt.buffer_capacity)
        throw ConfigError("pending record buffer overflowed; raise the buffer size");
      cache.push_back(std::move(c));
      gate.push(t, t + v.max_path);
      shared.in_flight += 1;
      if (opt.keep_trace)
        for (uint32_t id = 0; id < topo.nodes.size(); ++id)
          res.trace.push_back({t, id, 'L', shared.in_flight});
      while (shared.in_flight > opt.target_tau && gate.deliverable(t)) consume(t);
    }
  }
  uint64_t clock = t;
  const uint64_t deadline = t + v.max_path + 2;
  while (shared.in_flight > 0) {
    ++clock;
    if (clock > deadline) throw std::logic_error("drain failed to finish");
    while (shared.in_flight > 0 && gate.deliverable(clock) &&
           schedule_next(shared, 0, 1, 0) == SchedAction::DoGlobal)
      consume(clock);
  }

  res.metrics = global_m;
  res.feature_weights = leaf_union(topo, plan, state, bits);
  res.tree = std::move(state);
  res.tree_valid = true;
  return res;
}

}  // namespace

SimResult run_simulation(const Topology& topo, const ShardPlan& plan, ExampleStream& stream,
                         const ScheduleSpec& sched, const LossSpec& loss, unsigned bits,
                         const SimOptions& opt) {
  validate(sched);
  if (opt.passes == 0) throw ConfigError("need at least one pass");
  switch (opt.rule) {
    case UpdateRule::Sgd:
    case UpdateRule::Minibatch:
    case UpdateRule::MinibatchCg:
      return run_shared_table(topo, plan, stream, sched, loss, bits, opt);
    case UpdateRule::Local:
    case UpdateRule::DelayedGlobal:
    case UpdateRule::Corrective:
    case UpdateRule::Backprop:
      break;
  }
  if (plan.kind != ShardKind::Feature)
    throw ConfigError("tree rules need a feature shard plan");
  if (plan.n_shards != topo.n_shards())
    throw ConfigError("shard plan and topology disagree on shard count");
  if (opt.rule == UpdateRule::Local) return run_local_rule(topo, plan, stream, sched, loss, bits, opt);
  if (opt.rule == UpdateRule::Backprop)
    return run_backprop_rule(topo, plan, stream, sched, loss, bits, opt);
  return run_delayed_rule(topo, plan, stream, sched, loss, bits, opt);
}

}  // namespace shardlearn
