#pragma once

#include <cstdint>
#include <vector>

#include "shardlearn/loss.hpp"
#include "shardlearn/model.hpp"
#include "shardlearn/schedule.hpp"
#include "shardlearn/sparse.hpp"
#include "shardlearn/stream.hpp"

namespace shardlearn {

// Nonlinear conjugate gradient over streamed batches, with per-index lazy
// weight materialization so a step only touches indices present in its
// batch.
//
// Directions follow d_t = -g_t + beta_t d_{t-1} with the Polak-Ribiere
// beta_t = max{0, <g_t, g_t - g_{t-1}> / |g_{t-1}|^2} and the exact line
// step alpha_t = -<g_t, d_t> / <d_t, H_t d_t> on the local quadratic model
// of the batch. beta_t = 0 starts a new phase, zeroing every untouched
// direction component. Within a phase, an index untouched since step s
// keeps d_t,i = d_s,i * B_t / B_s where B is the running product of betas,
// so its pending drift is (A_t - A_{s-1}) * d_s,i / B_s with A the running
// sum of alpha_u * B_u. B is re-anchored to 1 whenever it drifts outside
// [1e-4, 1e4]: that closes a bookkeeping segment whose final A and B are
// recorded, so later folds chain through the closed segments instead of
// dividing by a vanishing (or exploding) product. Stored weights always
// exclude the current step's own alpha_t * d_t term; it is folded in by
// the next touch or by cg_finalize.
struct CgState {
  std::vector<double> dd;        // d_{s,i} / B_s at the index's last touch,
                                 // in its segment's units
  std::vector<double> a_prev;    // segment-local A_{s-1} at the last touch
  std::vector<uint32_t> seg_of;  // segment of the last touch
  SparseVector g_prev;
  double big_b = 1.0;            // B for the open segment (1 at its start)
  double big_a = 0.0;            // A for the open segment (0 at its start)
  uint32_t phase = 0;
  uint32_t segment = 0;
  std::vector<double> seg_close_a;    // closing A of each finished segment
  std::vector<double> seg_close_b;    // closing B of each finished segment
  std::vector<uint32_t> seg_phase;    // phase each segment belongs to
  uint64_t t = 0;                // batches processed
  uint64_t fallback_count = 0;   // steps where <d,Hd> <= 0 forced a plain
                                 // gradient step at the schedule's rate
  explicit CgState(size_t table_size)
      : dd(table_size, 0.0), a_prev(table_size, 0.0), seg_of(table_size, 0),
        seg_phase(1, 0) {}
};

// Folds index i's pending drift into w and returns its current direction
// component d_{t,i}. Model timestamps record the step of the last real
// touch; a timestamp from the future is a contract violation.
double lazy_touch(CgState& cg, WeightModel& w, uint32_t i);

// One CG step on a batch against the current weights. Frozen per-example
// predictions come back through yhats.
void cg_step(CgState& cg, WeightModel& w, const std::vector<VectorStream::Example>& batch,
             const ScheduleSpec& sched, const LossSpec& loss, std::vector<double>& yhats);

// Folds every index's pending drift into w, including the final step's own
// term. Idempotent.
void cg_finalize(CgState& cg, WeightModel& w);

}  // namespace shardlearn
