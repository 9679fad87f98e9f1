#include "shardlearn/learner.hpp"

#include <cmath>

#include "shardlearn/errors.hpp"

namespace shardlearn {

double sgd_step(WeightModel& w, const SparseVector& x, double y, uint64_t t,
                const ScheduleSpec& sched, const LossSpec& loss) {
  double yhat = dot(x, w);
  if (!std::isfinite(yhat))
    throw NumericOverflow("prediction overflowed at step " + std::to_string(t) +
                          "; reduce the learning rate");
  LossEval le = loss_eval(loss, yhat, y);
  double eta = learning_rate(sched, t);
  for (const auto& e : x.entries) {
    double g = le.d1 * e.value;
    w[e.index] -= eta * g;
  }
  return yhat;
}

Metrics train_sequential(WeightModel& w, ExampleStream& stream, const ScheduleSpec& sched,
                         const LossSpec& loss, unsigned passes, bool keep_log) {
  validate(sched);
  Metrics m;
  m.keep_log = keep_log;
  uint64_t t = 0;
  SparseVector x;
  double y;
  for (unsigned pass = 0; pass < passes; ++pass) {
    if (pass > 0) stream.reset();
    while (stream.next(x, y)) {
      double yhat = sgd_step(w, x, y, ++t, sched, loss);
      m.record(yhat, y);
    }
  }
  return m;
}

}  // namespace shardlearn
