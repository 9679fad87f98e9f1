#pragma once

#include <cstdint>
#include <vector>

namespace shardlearn {

struct StepLogEntry {
  uint64_t t;
  double yhat;
  double y;
};

// Snapshot taken when n_seen hits a power of two (and once more at the end).
struct MetricsRow {
  uint64_t t;
  double sq_loss_sum;
  uint64_t correct;
};

// Progressive validation counters. Predictions are recorded before the update
// that consumes the same instance. Accuracy thresholds predictions at 0.5.
struct Metrics {
  uint64_t n_seen = 0;
  double sq_loss_sum = 0.0;  // sum of (yhat - y)^2
  uint64_t correct = 0;
  uint64_t flagged_fallbacks = 0;  // e.g. CG steps that fell back to plain gradient

  bool keep_log = false;
  std::vector<StepLogEntry> log;
  std::vector<MetricsRow> rows;

  void record(double yhat, double y);
  double progressive_sq_loss() const { return n_seen ? sq_loss_sum / double(n_seen) : 0.0; }
  double accuracy() const { return n_seen ? double(correct) / double(n_seen) : 0.0; }
};

}  // namespace shardlearn
