#pragma once

#include <deque>

#include "shardlearn/learner.hpp"
#include "shardlearn/oracle.hpp"

namespace shardlearn {

// Gradient waiting to be applied tau steps after it was computed.
struct PendingGradient {
  SparseVector x;
  double d1;
};

// FIFO of pending gradients with a hard latency cap.
struct DelayBuffer {
  std::deque<PendingGradient> q;
  size_t capacity = 2048;
};

struct DelayedStepRecord {
  uint64_t t;  // loop step at which the instance arrived (tau + k)
  SparseVector x;
  double yhat;
  double y;
};

struct DelayedRunResult {
  Metrics metrics;
  std::vector<DelayedStepRecord> log;  // real instances only, in order
};

// Online gradient descent with update delay tau: at step t the gradient
// computed at step t - tau is applied with rate eta_t. The first tau steps
// consume a zero-padding prefix whose gradients are those of loss(0, 0).
// tau = 0 reproduces the sequential learner bit for bit.
DelayedRunResult delayed_sgd_run(WeightModel& w, ExampleStream& stream, uint64_t tau,
                                 const ScheduleSpec& sched, const LossSpec& loss,
                                 size_t buffer_capacity = 2048, bool keep_xs = true);

// Duplicate-block stream: T/tau blocks of tau copies of the base vector, the
// label flipping sign every block (period 2*tau instances). T must be a
// positive multiple of tau.
VectorStream make_adversarial_stream(const SparseVector& base, double y0, uint64_t tau,
                                     uint64_t T);

// Fixed-in-hindsight least squares over the streamed examples. Indices are
// remapped to a dense system internally; weights come back per index.
struct HindsightResult {
  std::vector<uint32_t> indices;  // ascending
  std::vector<double> w;          // aligned with indices
  bool used_pseudo_inverse = false;
  double predict(const SparseVector& x) const;
  double norm() const;
};
HindsightResult hindsight_oracle(const std::vector<VectorStream::Example>& examples);

struct RegretReport {
  double regret;  // total loss of the run minus total loss of the oracle
  double bound;   // 4 R L sqrt(tau T)
  double max_grad_norm;
  double max_abs_yhat;
};

// Regret of a logged run against the hindsight oracle, with the worst-case
// bound for comparison.
RegretReport regret_report(const std::vector<DelayedStepRecord>& log, const HindsightResult& star,
                           const LossSpec& loss, double R, double L, uint64_t tau);

}  // namespace shardlearn
