#include "shardlearn/delay.hpp"

#include <algorithm>
#include <cmath>

#include "shardlearn/errors.hpp"

namespace shardlearn {

DelayedRunResult delayed_sgd_run(WeightModel& w, ExampleStream& stream, uint64_t tau,
                                 const ScheduleSpec& sched, const LossSpec& loss,
                                 size_t buffer_capacity, bool keep_xs) {
  validate(sched);
  if (tau > buffer_capacity)
    throw ConfigError("tau exceeds the delay buffer capacity");

  DelayBuffer buf;
  buf.capacity = buffer_capacity;
  double d1_zero = loss_eval(loss, 0.0, 0.0).d1;
  for (uint64_t i = 0; i < tau; ++i) buf.q.push_back({SparseVector{}, d1_zero});

  DelayedRunResult out;
  uint64_t t = tau;
  SparseVector x;
  double y;
  while (stream.next(x, y)) {
    ++t;
    double yhat = dot(x, w);
    if (!std::isfinite(yhat))
      throw NumericOverflow("prediction overflowed at step " + std::to_string(t) +
                            "; reduce the learning rate");
    out.metrics.record(yhat, y);
    out.log.push_back({t, keep_xs ? x : SparseVector{}, yhat, y});

    LossEval le = loss_eval(loss, yhat, y);
    buf.q.push_back({x, le.d1});
    if (buf.q.size() > buf.capacity + 1)
      throw ConfigError("delay buffer overflow");

    PendingGradient old = std::move(buf.q.front());
    buf.q.pop_front();
    double eta = learning_rate(sched, t);
    for (const auto& e : old.x.entries) {
      double g = old.d1 * e.value;
      w[e.index] -= eta * g;
    }
  }
  return out;
}

VectorStream make_adversarial_stream(const SparseVector& base, double y0, uint64_t tau,
                                     uint64_t T) {
  if (tau == 0 || T == 0 || T % tau != 0)
    throw ConfigError("adversarial stream needs T a positive multiple of tau");
  VectorStream s;
  for (uint64_t block = 0; block < T / tau; ++block) {
    double y = (block % 2 == 0) ? y0 : -y0;
    for (uint64_t i = 0; i < tau; ++i) s.push(base, y);
  }
  return s;
}

double HindsightResult::predict(const SparseVector& x) const {
  double acc = 0.0;
  size_t k = 0;
  for (const auto& e : x.entries) {
    while (k < indices.size() && indices[k] < e.index) ++k;
    if (k < indices.size() && indices[k] == e.index) acc += e.value * w[k];
  }
  return acc;
}

double HindsightResult::norm() const {
  double s = 0.0;
  for (double v : w) s += v * v;
  return std::sqrt(s);
}

HindsightResult hindsight_oracle(const std::vector<VectorStream::Example>& examples) {
  HindsightResult out;
  for (const auto& ex : examples)
    for (const auto& e : ex.x.entries) out.indices.push_back(e.index);
  std::sort(out.indices.begin(), out.indices.end());
  out.indices.erase(std::unique(out.indices.begin(), out.indices.end()), out.indices.end());

  std::vector<oracle::DensePoint> pts;
  pts.reserve(examples.size());
  for (const auto& ex : examples) {
    oracle::DensePoint p;
    p.x.assign(out.indices.size(), 0.0);
    for (const auto& e : ex.x.entries) {
      size_t k = std::lower_bound(out.indices.begin(), out.indices.end(), e.index) -
                 out.indices.begin();
      p.x[k] += e.value;
    }
    p.y = ex.y;
    pts.push_back(std::move(p));
  }
  auto sr = oracle::least_squares(oracle::moments(pts));
  out.w = sr.w;
  out.used_pseudo_inverse = sr.used_pseudo_inverse;
  return out;
}

RegretReport regret_report(const std::vector<DelayedStepRecord>& log, const HindsightResult& star,
                           const LossSpec& loss, double R, double L, uint64_t tau) {
  RegretReport r{0.0, 0.0, 0.0, 0.0};
  for (const auto& rec : log) {
    double alg = loss_eval(loss, rec.yhat, rec.y).value;
    double opt = loss_eval(loss, star.predict(rec.x), rec.y).value;
    r.regret += alg - opt;
    double gnorm = std::abs(loss_eval(loss, rec.yhat, rec.y).d1) * rec.x.l2_norm();
    r.max_grad_norm = std::max(r.max_grad_norm, gnorm);
    r.max_abs_yhat = std::max(r.max_abs_yhat, std::abs(rec.yhat));
  }
  r.bound = 4.0 * R * L * std::sqrt(double(tau) * double(log.size()));
  return r;
}

}  // namespace shardlearn
