#include "shardlearn/cg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "shardlearn/errors.hpp"

namespace shardlearn {

double lazy_touch(CgState& cg, WeightModel& w, uint32_t i) {
  uint64_t ts = w.timestamps()[i];
  if (ts > cg.t) throw std::logic_error("weight timestamp is from the future");
  if (ts == 0) return 0.0;
  uint32_t s0 = cg.seg_of[i];
  if (s0 == cg.segment) {
    w[i] += (cg.big_a - cg.a_prev[i]) * cg.dd[i];
    cg.a_prev[i] = cg.big_a;
    return cg.dd[i] * cg.big_b;
  }
  // The index slept through one or more segment closes. Chain the drift
  // through the closed segments of its phase; a segment from a later phase
  // means a restart zeroed the direction there, ending the accrual.
  uint32_t p0 = cg.seg_phase[s0];
  double acc = (cg.seg_close_a[s0] - cg.a_prev[i]) * cg.dd[i];
  double factor = cg.dd[i] * cg.seg_close_b[s0];
  for (uint32_t q = s0 + 1; q <= cg.segment; ++q) {
    if (cg.seg_phase[q] != p0) {
      factor = 0.0;
      break;
    }
    if (q == cg.segment) {
      acc += factor * cg.big_a;
      break;
    }
    acc += factor * cg.seg_close_a[q];
    factor *= cg.seg_close_b[q];
  }
  w[i] += acc;
  cg.dd[i] = factor;
  cg.seg_of[i] = cg.segment;
  cg.a_prev[i] = cg.big_a;
  return factor * cg.big_b;
}

void cg_step(CgState& cg, WeightModel& w, const std::vector<VectorStream::Example>& batch,
             const ScheduleSpec& sched, const LossSpec& loss, std::vector<double>& yhats) {
  if (batch.empty()) throw std::logic_error("cg_step on an empty batch");
  cg.t += 1;

  std::vector<uint32_t> touched;
  for (const auto& ex : batch)
    for (const auto& e : ex.x.entries) touched.push_back(e.index);
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  const size_t m = touched.size();

  std::vector<double> d_cur(m, 0.0);
  for (size_t k = 0; k < m; ++k) d_cur[k] = lazy_touch(cg, w, touched[k]);

  std::unordered_map<uint32_t, size_t> slot;
  slot.reserve(m * 2);
  for (size_t k = 0; k < m; ++k) slot.emplace(touched[k], k);

  const size_t n = batch.size();
  yhats.assign(n, 0.0);
  for (size_t k = 0; k < n; ++k) {
    yhats[k] = dot(batch[k].x, w);
    if (!std::isfinite(yhats[k])) throw NumericOverflow("prediction overflowed in batch");
  }

  std::vector<double> g(m, 0.0);
  for (size_t k = 0; k < n; ++k) {
    double d1 = loss_eval(loss, yhats[k], batch[k].y).d1;
    for (const auto& e : batch[k].x.entries) g[slot.at(e.index)] += d1 * e.value;
  }

  double beta = 0.0;
  bool restart = true;
  if (cg.t > 1) {
    double den = 0.0;
    for (const auto& e : cg.g_prev.entries) den += e.value * e.value;
    if (den > 0.0) {
      // <g, g - g_prev> only needs g's support; walk the two sorted lists.
      double num = 0.0;
      size_t j = 0;
      for (size_t k = 0; k < m; ++k) {
        while (j < cg.g_prev.entries.size() && cg.g_prev.entries[j].index < touched[k]) ++j;
        double gp = (j < cg.g_prev.entries.size() && cg.g_prev.entries[j].index == touched[k])
                        ? cg.g_prev.entries[j].value
                        : 0.0;
        num += g[k] * (g[k] - gp);
      }
      beta = num / den;
      if (!std::isfinite(beta) || beta <= 0.0) beta = 0.0;
      restart = (beta == 0.0);
    }
  }

  std::vector<double> d(m, 0.0);
  if (restart) {
    for (size_t k = 0; k < m; ++k) d[k] = -g[k];
  } else {
    for (size_t k = 0; k < m; ++k) d[k] = beta * d_cur[k] - g[k];
  }

  double gd = 0.0;
  for (size_t k = 0; k < m; ++k) gd += g[k] * d[k];
  double dhd = 0.0;
  for (size_t k = 0; k < n; ++k) {
    double dx = 0.0;
    for (const auto& e : batch[k].x.entries) dx += d[slot.at(e.index)] * e.value;
    double d2 = loss_eval(loss, yhats[k], batch[k].y).d2;
    dhd += d2 * dx * dx;
  }

  double alpha = 0.0;
  if (dhd > 0.0) {
    alpha = -gd / dhd;
  } else {
    // Curvature along d is not positive; take a plain gradient step at the
    // schedule's rate and start a fresh phase.
    ++cg.fallback_count;
    restart = true;
    for (size_t k = 0; k < m; ++k) d[k] = -g[k];
    alpha = learning_rate(sched, cg.t);
  }

  auto close_segment = [&cg]() {
    cg.seg_close_a.push_back(cg.big_a);
    cg.seg_close_b.push_back(cg.big_b);
    ++cg.segment;
    cg.seg_phase.push_back(cg.phase);
    cg.big_b = 1.0;
    cg.big_a = 0.0;
  };
  double a_for_touch = 0.0;
  if (restart) {
    ++cg.phase;
    close_segment();
  } else {
    cg.big_b *= beta;
    a_for_touch = cg.big_a;
    if (cg.big_b < 1e-4 || cg.big_b > 1e4) {
      close_segment();
      a_for_touch = 0.0;
    }
  }
  cg.big_a += alpha * cg.big_b;

  for (size_t k = 0; k < m; ++k) {
    uint32_t i = touched[k];
    cg.dd[i] = d[k] / cg.big_b;
    cg.a_prev[i] = a_for_touch;
    cg.seg_of[i] = cg.segment;
    w.timestamps()[i] = cg.t;
  }

  cg.g_prev.entries.clear();
  cg.g_prev.entries.reserve(m);
  for (size_t k = 0; k < m; ++k) cg.g_prev.entries.push_back({touched[k], g[k]});
}

void cg_finalize(CgState& cg, WeightModel& w) {
  const size_t n = w.weights().size();
  for (size_t i = 0; i < n; ++i) {
    if (w.timestamps()[i] != 0) lazy_touch(cg, w, static_cast<uint32_t>(i));
  }
}

}  // namespace shardlearn
