#include "shardlearn/global_rules.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <exception>
#include <unordered_map>

#include "shardlearn/cg.hpp"
#include "shardlearn/errors.hpp"
#include "shardlearn/parallel.hpp"

namespace shardlearn {

namespace {

void apply_global(WeightModel& w, const SparseVector& x, double d1, double eta) {
  for (const auto& e : x.entries) {
    double g = d1 * e.value;
    w[e.index] -= eta * g;
  }
}

double clamp_indicator(const Topology& topo, const ForwardResult& f, uint32_t node) {
  if (!topo.nodes[node].threshold_output) return 1.0;
  return (f.raw[node] > 0.0 && f.raw[node] < 1.0) ? 1.0 : 0.0;
}

}  // namespace

double corrective_send(NodeState& ns, const SparseVector& x, double y, const LossSpec& loss,
                       PendingRecord& rec) {
  if (!ns.leaf_model) throw std::logic_error("corrective_send needs a leaf node");
  WeightModel& w = *ns.leaf_model;
  double p = dot(x, w);
  if (!std::isfinite(p)) throw NumericOverflow("prediction overflowed at node " + std::to_string(ns.id));
  LossEval le = loss_eval(loss, p, y);
  double eta = learning_rate(ns.sched, ++ns.step);
  rec.x = x;
  rec.p_sent = p;
  rec.y = y;
  rec.d1_send = le.d1;
  rec.eta_send = eta;
  rec.local_applied = true;
  rec.consumed = false;
  rec.w_before.clear();
  rec.w_before.reserve(x.entries.size());
  for (const auto& e : x.entries) {
    rec.w_before.push_back(w[e.index]);
    double g = le.d1 * e.value;
    w[e.index] -= eta * g;
  }
  return p;
}

void delayed_global_update(NodeState& ns, PendingRecord& rec, double yhat_final, double eta,
                           const LossSpec& loss) {
  if (rec.consumed) throw std::logic_error("pending record consumed twice");
  if (rec.local_applied) throw std::logic_error("record carries a local update; use corrective_update");
  if (!ns.leaf_model) throw std::logic_error("delayed_global_update needs a leaf node");
  LossEval le = loss_eval(loss, yhat_final, rec.y);
  apply_global(*ns.leaf_model, rec.x, le.d1, eta);
  rec.consumed = true;
}

void corrective_update(NodeState& ns, PendingRecord& rec, double yhat_final, double eta,
                       const LossSpec& loss) {
  if (rec.consumed) throw std::logic_error("pending record consumed twice");
  if (!rec.local_applied) throw std::logic_error("record has no local update to undo");
  if (!ns.leaf_model) throw std::logic_error("corrective_update needs a leaf node");
  WeightModel& w = *ns.leaf_model;
  // Undo the send-time step. When the stored weight still matches what that
  // step produced (compared bitwise), restoring the saved value cancels it
  // exactly; otherwise fall back to an additive undo.
  for (size_t k = 0; k < rec.x.entries.size(); ++k) {
    const auto& e = rec.x.entries[k];
    double g = rec.d1_send * e.value;
    double step = rec.eta_send * g;
    double after = rec.w_before[k] - step;
    if (std::bit_cast<uint64_t>(w[e.index]) == std::bit_cast<uint64_t>(after)) {
      w[e.index] = rec.w_before[k];
    } else {
      w[e.index] += step;
    }
  }
  LossEval le = loss_eval(loss, yhat_final, rec.y);
  apply_global(w, rec.x, le.d1, eta);
  rec.consumed = true;
}

TreeGradients backprop_gradients(const Topology& topo, const TreeState& state,
                                 const std::vector<SparseVector>& parts, double y,
                                 const LossSpec& loss, double scale) {
  ForwardResult f = forward_tree(topo, state, parts);
  const size_t n = topo.nodes.size();
  TreeGradients out;
  out.leaf.resize(n);
  out.internal.resize(n);
  std::vector<double> m_raw(n, 0.0);
  LossEval le = loss_eval(loss, f.raw[topo.root], y);
  out.d1_root = scale * le.d1;
  // The loss sits on the root's raw output, so no clamp indicator applies
  // at the root itself.
  m_raw[topo.root] = out.d1_root;
  for (auto layer = state.layers.rbegin(); layer != state.layers.rend(); ++layer) {
    for (uint32_t id : *layer) {
      double m = m_raw[id];
      const NodeState& ns = state.nodes[id];
      const NodeSpec& spec = topo.nodes[id];
      if (spec.is_leaf()) {
        const SparseVector& x = parts[static_cast<size_t>(spec.shard)];
        auto& grad = out.leaf[id];
        grad.entries.reserve(x.entries.size());
        for (const auto& e : x.entries) grad.entries.push_back({e.index, m * e.value});
        continue;
      }
      const auto& kids = topo.children[id];
      if (ns.combine == CombineMode::Sum) {
        for (uint32_t c : kids) m_raw[c] = m * clamp_indicator(topo, f, c);
      } else {
        auto& grad = out.internal[id];
        grad.assign(ns.w.size(), 0.0);
        for (size_t k = 0; k < kids.size(); ++k) grad[k] = m * f.transmitted[kids[k]];
        if (ns.has_constant) grad[kids.size()] = m;
        for (size_t k = 0; k < kids.size(); ++k) {
          double mi = m * ns.w[k];
          m_raw[kids[k]] = mi * clamp_indicator(topo, f, kids[k]);
        }
      }
    }
  }
  return out;
}

SparseVector minibatch_gradient(const WeightModel& w,
                                const std::vector<VectorStream::Example>& batch,
                                const LossSpec& loss, std::vector<double>* yhats) {
  const size_t n = batch.size();
  std::vector<double> yh(n, 0.0);
  const int threads = thread_count();
  // Weights are frozen for the whole batch, so per-example dots are
  // independent; only the accumulation below is order-sensitive. Exceptions
  // may not cross the parallel region, so they are carried out by hand.
  std::exception_ptr err;
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads) if (threads > 1 && n > 1)
#endif
  for (int64_t k = 0; k < static_cast<int64_t>(n); ++k) {
    try {
      yh[static_cast<size_t>(k)] = dot(batch[static_cast<size_t>(k)].x, w);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  for (size_t k = 0; k < n; ++k) {
    if (!std::isfinite(yh[k])) throw NumericOverflow("prediction overflowed in batch");
  }
  std::unordered_map<uint32_t, double> acc;
  for (size_t k = 0; k < n; ++k) {
    double d1 = loss_eval(loss, yh[k], batch[k].y).d1;
    for (const auto& e : batch[k].x.entries) acc[e.index] += d1 * e.value;
  }
  std::vector<uint32_t> keys;
  keys.reserve(acc.size());
  for (const auto& kv : acc) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  SparseVector g;
  g.entries.reserve(keys.size());
  for (uint32_t i : keys) g.entries.push_back({i, acc[i]});
  if (yhats) *yhats = std::move(yh);
  return g;
}

void minibatch_gd_step(WeightModel& w, const SparseVector& g, double eta) {
  for (const auto& e : g.entries) w[e.index] -= eta * e.value;
}

Metrics minibatch_train(WeightModel& w, ExampleStream& stream, const ScheduleSpec& sched,
                        const LossSpec& loss, const MinibatchOptions& opt, CgState* cg) {
  if (opt.batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (opt.conjugate && cg == nullptr) throw std::logic_error("conjugate path needs a CgState");
  if (opt.passes == 0) throw ConfigError("need at least one pass");
  validate(sched);
  Metrics m;
  m.keep_log = opt.keep_log;
  std::vector<VectorStream::Example> batch;
  batch.reserve(opt.batch_size);
  uint64_t t_batch = 0;
  auto flush = [&]() {
    if (batch.empty()) return;
    ++t_batch;
    std::vector<double> yhats;
    if (opt.conjugate) {
      cg_step(*cg, w, batch, sched, loss, yhats);
    } else {
      SparseVector g = minibatch_gradient(w, batch, loss, &yhats);
      double eta = learning_rate(sched, t_batch);
      minibatch_gd_step(w, g, eta);
    }
    for (size_t k = 0; k < batch.size(); ++k) m.record(yhats[k], batch[k].y);
    batch.clear();
  };
  for (unsigned p = 0; p < opt.passes; ++p) {
    if (p > 0) stream.reset();
    SparseVector x;
    double y = 0.0;
    while (stream.next(x, y)) {
      batch.push_back({x, y});
      if (batch.size() == opt.batch_size) flush();
    }
  }
  // A short tail is flushed only once the whole stream is done; batches may
  // span pass boundaries.
  flush();
  if (opt.conjugate) {
    cg_finalize(*cg, w);
    m.flagged_fallbacks = cg->fallback_count;
  }
  return m;
}

}  // namespace shardlearn
