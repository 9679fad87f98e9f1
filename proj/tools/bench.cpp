// Compares the serial reference paths against the threaded ones on synthetic
// workloads and checks that both produce bit-identical models.

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "shardlearn/global_rules.hpp"
#include "shardlearn/parallel.hpp"
#include "shardlearn/pipeline.hpp"
#include "shardlearn/simulator.hpp"

namespace {

using namespace shardlearn;
using Clock = std::chrono::steady_clock;

constexpr unsigned kBits = 18;

// Small multiplicative generator; the benchmark only needs stable, spread-out
// synthetic values, not statistical quality.
struct Mix {
  uint64_t s;
  explicit Mix(uint64_t seed) : s(seed * 0x9e3779b97f4a7c15ULL + 1) {}
  uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
  double unit() { return double(next() >> 11) * 0x1.0p-53; }
};

VectorStream synth_stream(uint32_t n_instances, uint32_t feats_per_instance, uint64_t seed) {
  Mix rng(seed);
  VectorStream out;
  for (uint32_t t = 0; t < n_instances; ++t) {
    SparseVector x;
    uint32_t base = uint32_t(rng.next() & ((1u << kBits) - 1));
    for (uint32_t k = 0; k < feats_per_instance; ++k)
      x.entries.push_back({uint32_t((base + 37 * k)) & ((1u << kBits) - 1), rng.unit() - 0.5});
    std::sort(x.entries.begin(), x.entries.end(),
              [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
    x.entries.erase(std::unique(x.entries.begin(), x.entries.end(),
                                [](const FeatureEntry& a, const FeatureEntry& b) {
                                  return a.index == b.index;
                                }),
                    x.entries.end());
    out.push(std::move(x), rng.unit() < 0.5 ? 0.0 : 1.0);
  }
  return out;
}

struct LaneResult {
  double seconds = 0.0;
  WeightModel model{1};
};

LaneResult run_sim_lane(UpdateRule rule, uint32_t shards, VectorStream data) {
  Topology topo = build_topology(TopologyPreset::Binary, shards);
  ShardPlan plan = make_shard_plan(ShardKind::Feature, shards);
  ScheduleSpec sched = power_schedule(0.25, 100.0);
  LossSpec loss;
  SimOptions opt;
  opt.rule = rule;
  opt.target_tau = rule == UpdateRule::Local ? 0 : 4;
  opt.batch_size = 64;
  auto start = Clock::now();
  SimResult r = run_simulation(topo, plan, data, sched, loss, kBits, opt);
  auto stop = Clock::now();
  return {std::chrono::duration<double>(stop - start).count(), std::move(r.feature_weights)};
}

void report(const char* lane, const LaneResult& serial, const LaneResult& threaded) {
  bool same = serial.model == threaded.model;
  double speedup = threaded.seconds > 0.0 ? serial.seconds / threaded.seconds : 0.0;
  std::printf("%-12s %10.3fs %10.3fs %7.2fx   %s\n", lane, serial.seconds, threaded.seconds,
              speedup, same ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  uint32_t instances = 20000;
  uint32_t feats = 64;
  int threads = 4;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--instances") == 0 && i + 1 < argc)
      instances = uint32_t(std::strtoul(argv[++i], nullptr, 10));
    else if (std::strcmp(argv[i], "--features") == 0 && i + 1 < argc)
      feats = uint32_t(std::strtoul(argv[++i], nullptr, 10));
    else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc)
      threads = int(std::strtol(argv[++i], nullptr, 10));
    else {
      std::fprintf(stderr, "usage: %s [--instances N] [--features N] [--threads N]\n", argv[0]);
      return 1;
    }
  }

  VectorStream data = synth_stream(instances, feats, 7);
  std::printf("%u instances, %u features each, %d threads\n\n", instances, feats, threads);
  std::printf("%-12s %11s %11s %8s\n", "lane", "serial", "threaded", "speedup");

  struct Lane {
    const char* name;
    UpdateRule rule;
    uint32_t shards;
  };
  const Lane lanes[] = {
      {"local-tree", UpdateRule::Local, 16},
      {"backprop", UpdateRule::Backprop, 16},
      {"minibatch", UpdateRule::Minibatch, 1},
  };
  int rc = 0;
  for (const Lane& lane : lanes) {
    set_thread_override(0);
    LaneResult serial = run_sim_lane(lane.rule, lane.shards, data);
    set_thread_override(threads);
    LaneResult threaded = run_sim_lane(lane.rule, lane.shards, data);
    set_thread_override(-1);
    report(lane.name, serial, threaded);
    if (!(serial.model == threaded.model)) rc = 1;
  }
  return rc;
}
