#include <cmath>
#include <cstring>
#include <random>

#include "cg_reference.hpp"
#include "doctest.h"
#include "shardlearn/global_rules.hpp"

using namespace shardlearn;

namespace {

SparseVector vec(std::initializer_list<FeatureEntry> es) {
  SparseVector x;
  x.entries = es;
  return x;
}

std::vector<VectorStream::Example> random_batchable(std::mt19937& rng, size_t count,
                                                    uint32_t index_space) {
  std::uniform_int_distribution<uint32_t> idx(0, index_space - 1);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_int_distribution<int> nnz(2, 6);
  std::vector<VectorStream::Example> out;
  for (size_t k = 0; k < count; ++k) {
    SparseVector x;
    int m = nnz(rng);
    for (int j = 0; j < m; ++j) x.entries.push_back({idx(rng), val(rng)});
    x.normalize();
    out.push_back({x, val(rng)});
  }
  return out;
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST_CASE("lazy and dense runs agree on random batch streams") {
  const unsigned bits = 6;
  const size_t table = size_t(1) << bits;
  ScheduleSpec sched = power_schedule(0.5, 4.0);
  LossSpec loss;

  for (uint32_t seed : {11u, 29u, 57u}) {
    std::mt19937 rng(seed);
    auto pool = random_batchable(rng, 120, uint32_t(table));

    WeightModel w(bits);
    CgState cg(table);
    cgref::DenseCg ref(table);

    for (size_t start = 0; start + 4 <= pool.size(); start += 4) {
      std::vector<VectorStream::Example> batch(pool.begin() + start, pool.begin() + start + 4);
      std::vector<double> yh;
      cg_step(cg, w, batch, sched, loss, yh);
      auto yr = ref.step(batch, sched, loss);
      for (size_t k = 0; k < yh.size(); ++k) CHECK(close_rel(yh[k], yr[k], 1e-9));
    }
    cg_finalize(cg, w);

    CHECK(cg.fallback_count == ref.fallback_count);
    for (size_t i = 0; i < table; ++i)
      CHECK(close_rel(w[uint32_t(i)], ref.w[i], 1e-9));
  }
}

TEST_CASE("drift folding rejects timestamps from the future") {
  WeightModel w(3);
  CgState cg(8);
  w.timestamps()[2] = 5;  // cg.t is still 0
  CHECK_THROWS_AS(lazy_touch(cg, w, 2), std::logic_error);
}

TEST_CASE("an index never seen carries no drift") {
  WeightModel w(3);
  CgState cg(8);
  cg.t = 7;
  cg.big_a = 123.0;
  CHECK(lazy_touch(cg, w, 4) == 0.0);
  CHECK(w[4] == 0.0);
}

TEST_CASE("zero curvature falls back to a plain gradient step") {
  WeightModel w(3);
  CgState cg(8);
  LossSpec loss;
  std::vector<VectorStream::Example> batch = {{vec({{1, 1.0}}), 0.0}};
  std::vector<double> yh;
  cg_step(cg, w, batch, power_schedule(1.0, 0.0), loss, yh);
  CHECK(cg.fallback_count == 1);
  CHECK(w[1] == 0.0);  // gradient was zero, so the step moved nothing
}

TEST_CASE("finalize is idempotent") {
  ScheduleSpec sched = power_schedule(0.5, 1.0);
  LossSpec loss;
  WeightModel w(4);
  CgState cg(16);
  std::mt19937 rng(3);
  auto pool = random_batchable(rng, 24, 16);
  std::vector<double> yh;
  for (size_t s = 0; s + 3 <= pool.size(); s += 3) {
    std::vector<VectorStream::Example> b(pool.begin() + s, pool.begin() + s + 3);
    cg_step(cg, w, b, sched, loss, yh);
  }
  cg_finalize(cg, w);
  std::vector<double> snap = w.weights();
  cg_finalize(cg, w);
  CHECK(std::memcmp(snap.data(), w.weights().data(), snap.size() * sizeof(double)) == 0);
}

TEST_CASE("the batch trainer wires conjugate steps through unchanged") {
  VectorStream s;
  std::mt19937 rng(19);
  for (auto& ex : random_batchable(rng, 6, 16)) s.push(ex.x, ex.y);
  ScheduleSpec sched = power_schedule(0.5, 1.0);
  LossSpec loss;

  WeightModel wa(4);
  CgState ca(16);
  MinibatchOptions opt;
  opt.batch_size = 2;
  opt.conjugate = true;
  Metrics m = minibatch_train(wa, s, sched, loss, opt, &ca);

  WeightModel wb(4);
  CgState cb(16);
  const auto& d = s.data();
  std::vector<double> yh;
  for (size_t k = 0; k < 6; k += 2) {
    std::vector<VectorStream::Example> b = {d[k], d[k + 1]};
    cg_step(cb, wb, b, sched, loss, yh);
  }
  cg_finalize(cb, wb);

  CHECK(std::memcmp(wa.weights().data(), wb.weights().data(),
                    wa.size() * sizeof(double)) == 0);
  CHECK(m.flagged_fallbacks == cb.fallback_count);
  CHECK(m.n_seen == 6);
}
