#pragma once

#include "shardlearn/loss.hpp"
#include "shardlearn/metrics.hpp"
#include "shardlearn/model.hpp"
#include "shardlearn/schedule.hpp"
#include "shardlearn/sparse.hpp"
#include "shardlearn/stream.hpp"

namespace shardlearn {

// One online gradient step: predict, then w_i -= eta_t * g_i with
// g_i = d1 * x_i. Returns the pre-update prediction. Throws NumericOverflow
// when the prediction is not finite.
double sgd_step(WeightModel& w, const SparseVector& x, double y, uint64_t t,
                const ScheduleSpec& sched, const LossSpec& loss);

// Streams pass after pass through the data; the step counter t keeps running
// across passes. Progressive metrics use pre-update predictions.
Metrics train_sequential(WeightModel& w, ExampleStream& stream, const ScheduleSpec& sched,
                         const LossSpec& loss, unsigned passes, bool keep_log = false);

}  // namespace shardlearn
