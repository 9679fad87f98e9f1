#pragma once

#include <deque>
#include <iosfwd>
#include <optional>
#include <string>

#include "shardlearn/global_rules.hpp"

namespace shardlearn {

enum class UpdateRule { Sgd, Local, DelayedGlobal, Corrective, Backprop, Minibatch, MinibatchCg };

const char* rule_name(UpdateRule r);
std::optional<UpdateRule> parse_rule(const std::string& s);

enum class SchedAction { DoLocal, DoGlobal, Wait };

// One node's view of the send/feedback discipline. in_flight counts
// predictions sent upward whose global response has not been consumed yet.
struct NodeSchedule {
  uint64_t target_tau = 1024;
  size_t buffer_capacity = 2048;
  uint64_t in_flight = 0;
  SchedAction last = SchedAction::DoGlobal;
};

// Picks the node's next action. Local work may not push in_flight past
// target_tau, and consuming a response may not pull it below target_tau
// while plenty of stream remains, so in steady state the node alternates
// send / consume and every response is consumed exactly target_tau
// instances after its send. Once fewer than target_tau instances remain
// (the drain), responses may be consumed early; when both moves are legal
// the node alternates them. Pass a large remaining_in_stream when the true
// count is unknown.
SchedAction schedule_next(NodeSchedule& ns, size_t pending_local, size_t pending_global,
                          uint64_t remaining_in_stream);

// FIFO link with a per-message delivery time measured on the instance clock.
struct LinkMessage {
  uint64_t instance = 0;
  uint64_t deliver_at = 0;
};
struct LinkQueue {
  std::deque<LinkMessage> q;
  size_t capacity = 2048;
  void push(uint64_t instance, uint64_t deliver_at);  // keeps send order
  bool deliverable(uint64_t now) const;
  LinkMessage pop();
};

struct TraceRow {
  uint64_t t = 0;          // instance clock at the action
  uint32_t node = 0;
  char action = 'L';       // 'L' sent local work, 'G' consumed a response
  uint64_t in_flight = 0;  // after the action
};

struct SimOptions {
  UpdateRule rule = UpdateRule::Local;
  uint64_t target_tau = 1024;
  size_t buffer_capacity = 2048;
  double backprop_scale = 1.0;
  size_t batch_size = 1;
  unsigned passes = 1;
  bool keep_trace = false;
  bool keep_log = false;
};

struct SimResult {
  Metrics metrics;              // progressive metrics of the final prediction
  std::vector<TraceRow> trace;
  WeightModel feature_weights;  // union of the leaf tables, or the shared table
  TreeState tree;               // node state for tree-shaped rules
  bool tree_valid = false;
};

// Deterministic lockstep simulation of the whole node tree on one instance
// stream. Upward messages aggregate within their instance; the root's
// response to instance s travels down each node's FIFO and becomes
// deliverable at s plus the node's total link delay to the root, which
// therefore must not exceed target_tau. Consumed responses apply their
// updates top-down within one scheduled action. After the stream ends the
// clock keeps ticking until every response is drained.
//
// Rule notes: sgd and the minibatch rules learn one shared weight table
// (sgd needs a single shard; minibatch sharding only affects routing
// bookkeeping, not the result). delayed-global and corrective run on the
// summed linear model, so threshold and constant-feature flags do not
// apply to them. backprop trains the learned tree locally at every send
// and applies chain-rule corrections at every consume, with the response
// scale folded in once at the root.
SimResult run_simulation(const Topology& topo, const ShardPlan& plan, ExampleStream& stream,
                         const ScheduleSpec& sched, const LossSpec& loss, unsigned bits,
                         const SimOptions& opt);

// t,node,action,inflight rows.
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);

}  // namespace shardlearn
