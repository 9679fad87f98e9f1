#pragma once

#include "shardlearn/pipeline.hpp"

namespace shardlearn {

// What a node remembers about an instance it sent upward, until the master's
// answer for that instance comes back.
struct PendingRecord {
  uint64_t t = 0;
  SparseVector x;      // the node's input slice
  double p_sent = 0.0; // its own raw prediction at send time
  double y = 0.0;
  // Set when the rule trained locally at send time (corrective):
  double d1_send = 0.0;
  double eta_send = 0.0;
  std::vector<double> w_before;  // touched weights before the local update
  bool local_applied = false;
  bool consumed = false;
};

// Send-time half of the corrective rule: a plain local gradient step that
// also records exactly what it changed. Returns the raw prediction.
double corrective_send(NodeState& ns, const SparseVector& x, double y, const LossSpec& loss,
                       PendingRecord& rec);

// Gradient of the final prediction's loss, applied to a node that did no
// local training at send time: w_i -= eta * (l'(yhat_final, y) * x_i).
// A record can be consumed once.
void delayed_global_update(NodeState& ns, PendingRecord& rec, double yhat_final, double eta,
                           const LossSpec& loss);

// Receive-time half of the corrective rule: undoes the send-time local step
// (bit-exactly when nothing else touched those weights in between, using the
// send-time rate) and then applies the same global gradient as
// delayed_global_update. The net effect of send + receive equals a single
// delayed_global_update by construction.
void corrective_update(NodeState& ns, PendingRecord& rec, double yhat_final, double eta,
                       const LossSpec& loss);

// Chain-rule gradients of loss(tree(x), y) with respect to every weight of a
// frozen tree. Clamped transmissions contribute zero derivative outside the
// open interval (0, 1).
struct TreeGradients {
  std::vector<SparseVector> leaf;           // per node id; empty for internals
  std::vector<std::vector<double>> internal;  // per node id: child slots (+ constant)
  double d1_root = 0.0;
};
TreeGradients backprop_gradients(const Topology& topo, const TreeState& state,
                                 const std::vector<SparseVector>& parts, double y,
                                 const LossSpec& loss, double scale = 1.0);

// Batch gradient sum over frozen weights: g = sum_k l'(<w,x_k>, y_k) x_k,
// accumulated in ascending example order then ascending index. Per-example
// frozen predictions come back through yhats when non-null.
SparseVector minibatch_gradient(const WeightModel& w,
                                const std::vector<VectorStream::Example>& batch,
                                const LossSpec& loss, std::vector<double>* yhats = nullptr);

// w -= eta * g.
void minibatch_gd_step(WeightModel& w, const SparseVector& g, double eta);

struct CgState;

struct MinibatchOptions {
  size_t batch_size = 1;
  bool conjugate = false;
  unsigned passes = 1;
  bool keep_log = false;
};

// Streams batches of size b (tail batches are smaller, never dropped; the
// batch counter indexes the schedule). b = 1 without conjugate reproduces
// the sequential learner bit for bit. The conjugate path needs a CgState
// and finalizes it at the end.
Metrics minibatch_train(WeightModel& w, ExampleStream& stream, const ScheduleSpec& sched,
                        const LossSpec& loss, const MinibatchOptions& opt, CgState* cg = nullptr);

}  // namespace shardlearn
